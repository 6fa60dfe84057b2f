//! Spectral theory of the linearized operator
//! `L = -d^2/dR^2 + 3/(4R^2) - 8/(1+R^2)^2` on the half line.

pub mod eigen;
pub mod tables;
pub mod transform;

pub use eigen::{
    connection, m_function, potential, regular_eigenfunction, regular_solution, rho_from_a, secondary_eigenfunction,
    secondary_solution, weyl_asymptotic, weyl_solution, weyl_solution_from, wronskian, Connection, EigenKind,
    Eigenfunction, RealSolution, WeylSolution,
};
pub use tables::{connection_and_measure, default_tables, SpectralTables};
pub use transform::{test_corpus, SmallXiTail, SpectralBasis, SpectralCoefficients};
