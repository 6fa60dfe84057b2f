//! Numerical laboratory for corotational wave maps blowing up at the rate
//! `lambda(t) = t^(-1-nu)`: profile construction, spectral theory of the
//! linearized operator, the Fourier-side parametrix, and a radial PDE solver
//! that measures the rate directly.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod model;
pub mod numerics;
pub mod parametrix;
pub mod profile;
pub mod simulator;
pub mod spectral;

pub use error::{Error, Result};
