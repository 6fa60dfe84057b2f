//! Connection coefficient a(xi) and spectral density rho(xi) on the default
//! grid, with their small- and large-xi laws.
//!
//! Set WAVEMAP_CACHE_DIR to reuse the tables between runs.

use wavemap_core::config::Tolerances;
use wavemap_core::spectral::{default_tables, m_function};

fn main() -> wavemap_core::Result<()> {
    let tol = Tolerances::default();
    let t = default_tables(&tol)?;
    println!("{} frequencies in [{:e}, {:e}]", t.len(), t.xi_grid[0], t.xi_grid[t.len() - 1]);
    println!("slope of rho on [1e2, 1e4]: {:.4}", t.rho_slope(1e2, 1e4)?);
    let (lo, hi) = t.small_xi_band(1e-4, 1e-2);
    println!("|a| / (xi^1/2 |log xi|) on [1e-4, 1e-2] in [{lo:.4}, {hi:.4}]");
    let (lo, hi) = t.large_xi_band(1e2, 1e4);
    println!("|a| xi^1/2 on [1e2, 1e4] in [{lo:.4}, {hi:.4}]");

    println!("\n{:>10} {:>12} {:>12} {:>12}", "xi", "|a|", "rho", "Im m / pi");
    for i in (0..t.len()).step_by(64) {
        let xi = t.xi_grid[i];
        let m = m_function(xi, &tol)?;
        println!(
            "{xi:>10.3e} {:>12.5e} {:>12.5e} {:>12.5e}",
            t.a_values[i].norm(),
            t.rho_values[i],
            m.im / std::f64::consts::PI
        );
    }
    Ok(())
}
