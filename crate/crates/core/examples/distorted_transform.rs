//! Forward and inverse distorted Fourier transforms on the test corpus:
//! Plancherel ratios, round trips and a weighted norm.

use wavemap_core::config::Tolerances;
use wavemap_core::spectral::{default_tables, test_corpus, SpectralBasis};

fn main() -> wavemap_core::Result<()> {
    let tol = Tolerances::default();
    let basis = SpectralBasis::new(default_tables(&tol)?, &tol)?;
    println!("mass of rho below the grid: {:.4}", basis.tail.mass);
    println!("{:>14} {:>12} {:>12} {:>14}", "f", "Plancherel", "round trip", "||f^||_{1/2}");
    for (name, f) in test_corpus() {
        let x = basis.forward(f)?;
        println!(
            "{name:>14} {:>12.5} {:>12.2e} {:>14.5e}",
            basis.plancherel_ratio(f)?,
            basis.round_trip_error(f)?,
            basis.norm_alpha(&x, 0.5)
        );
    }
    Ok(())
}
