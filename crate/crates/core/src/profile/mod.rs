//! Approximate blow-up profile: first correction by variation of constants,
//! second correction from self-similar solves, and the assembled evaluator.

pub mod assemble;
pub mod first;
pub mod fundamental;
pub mod lbeta;
pub mod second;

pub use assemble::{assemble, ApproxSolution};
pub use first::{first_correction, first_error_expansion, ErrorCoefficients, FirstErrorExpansion};
pub use fundamental::FundamentalPair;
pub use lbeta::{solve_lbeta, LbetaOptions, Parity, Rhs, SelfSimilarSolution};
pub use second::{second_correction, SecondCorrection};
