//! Zeroth iterate of the parametrix applied to the order-2 residual, and its
//! weighted norm decay in tau. Writes `x0.csv` to the directory given as the
//! first argument, if any.

use std::path::PathBuf;

use wavemap_core::config::Tolerances;
use wavemap_core::model::BlowupParams;
use wavemap_core::parametrix::{zeroth_iterate, Parametrix, RhoModel, SymbolS, ZerothOptions};
use wavemap_core::profile::assemble;
use wavemap_core::spectral::{default_tables, SpectralBasis};

fn main() -> wavemap_core::Result<()> {
    let tol = Tolerances::default();
    let params = BlowupParams::new(0.5)?;
    let basis = SpectralBasis::new(default_tables(&tol)?, &tol)?;
    let u = Parametrix::new(SymbolS::new(params, &tol), RhoModel::new(&basis.tables)?);
    let approx = assemble(params, 2, &tol)?;
    let x0 = zeroth_iterate(&approx, &basis, &u, &ZerothOptions::default())?;

    println!("source decays like tau^-{:.3}", x0.source.decay_order);
    println!("{:>8} {:>12}", "tau", "norm");
    for (t, n) in x0.tau_grid.iter().zip(&x0.norms) {
        println!("{t:>8.3} {n:>12.4e}");
    }
    println!("log-log slope of the norm: {:.3}", x0.norm_slope);
    if let Some(dir) = std::env::args().nth(1).map(PathBuf::from) {
        x0.write_csv(&dir.join("x0.csv"))?;
    }
    Ok(())
}
