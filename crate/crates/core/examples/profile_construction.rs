//! Build u_0, u_1 and u_2 for one nu and watch the residual shrink.
//!
//! `cargo run --example profile_construction -- 0.5`

use wavemap_core::config::Tolerances;
use wavemap_core::model::BlowupParams;
use wavemap_core::profile::{assemble, FundamentalPair};

fn main() -> wavemap_core::Result<()> {
    let nu: f64 = std::env::args().nth(1).map_or(1.0, |s| s.parse().expect("nu"));
    let tol = Tolerances::default();
    let params = BlowupParams::new(nu)?;

    let pair = FundamentalPair;
    println!("W(phi, theta) at R = 0.01, 1, 100: {:?}", [0.01, 1.0, 100.0].map(|r| pair.wronskian(r)));

    let u2 = assemble(params, 2, &tol)?;
    let s = u2.summary();
    if let Some(f) = &s.far_field {
        println!("v1 ~ d1 R log R + d2 R: d1 = {:.6}, d2 = {:.6}", f.coefficients[0], f.coefficients[1]);
    }
    if let Some(e) = &s.error_coefficients {
        println!("t^2 e1 coefficients c1..c4 = {:?}", e.c);
    }

    // |t^2 e_k| at R = 1 for halving t: each order gains t^(2 nu).
    println!("\n{:>8} {:>12} {:>12} {:>12}", "t", "k = 0", "k = 1", "k = 2");
    let orders: Vec<_> = (0..3).map(|k| assemble(params, k, &tol)).collect::<Result<_, _>>()?;
    for t in [0.2, 0.1, 0.05, 0.025] {
        let r = 1.0 / params.lambda(t);
        let res: Vec<f64> = orders
            .iter()
            .map(|u| u.residual(t, r, 1e-3).map(|e| (t * t * e).abs()))
            .collect::<Result<_, _>>()?;
        println!("{t:>8} {:>12.3e} {:>12.3e} {:>12.3e}", res[0], res[1], res[2]);
    }
    Ok(())
}
