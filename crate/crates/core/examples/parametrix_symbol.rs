//! The parametrix symbol S(tau, sigma, xi): special values, a row in sigma,
//! the scaling law and the empirical bound on a random sample.

use wavemap_core::config::Tolerances;
use wavemap_core::model::BlowupParams;
use wavemap_core::parametrix::{BoundSample, SymbolS};

fn main() -> wavemap_core::Result<()> {
    let nu = 0.5;
    let s = SymbolS::new(BlowupParams::new(nu)?, &Tolerances::default());
    println!("S(2, 2, 1) = {:?}   S(1, 3, 0) = {:?}", s.eval(2.0, 2.0, 1.0)?, s.eval(1.0, 3.0, 0.0)?);

    let row = s.row(1.0, 4.0, 8.0)?;
    println!("\nrow tau = 1, xi = 4:");
    for sigma in [1.0, 1.5, 2.0, 4.0, 8.0] {
        println!("  sigma = {sigma:<4} S = {:+.6}", row.eval(sigma));
    }

    println!("\nscaling law, direct vs rescaled:");
    for (tau, sigma, xi) in [(1.0, 2.0, 0.1), (2.0, 4.0, 10.0), (1.5, 9.0, 300.0)] {
        println!("  {:+.10}  {:+.10}", s.eval(tau, sigma, xi)?.0, s.eval_scaled(tau, sigma, xi)?);
    }

    let report = s.bound_check(&BoundSample::new(1000, 7))?;
    println!("\n{report:#?}");
    Ok(())
}
