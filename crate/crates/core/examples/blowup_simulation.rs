//! Evolve order-2 profile data toward t = 0 and read off lambda(t).
//!
//! `cargo run --example blowup_simulation -- 1.0`

use wavemap_core::config::Tolerances;
use wavemap_core::model::BlowupParams;
use wavemap_core::profile::assemble;
use wavemap_core::simulator::{simulate, SimulationConfig};

fn main() -> wavemap_core::Result<()> {
    let nu: f64 = std::env::args().nth(1).map_or(1.0, |s| s.parse().expect("nu"));
    let cfg = SimulationConfig { nu, ..Default::default() };
    let approx = assemble(BlowupParams::new(nu)?, cfg.order, &Tolerances::default())?;
    let run = simulate(&approx, &cfg)?;

    println!("{:>10} {:>12} {:>14}", "t", "lambda", "t^(1+nu) lambda");
    for (t, l) in run.rate.t.iter().zip(&run.rate.lambda).step_by(20) {
        println!("{t:>10.5} {l:>12.4} {:>14.5}", t.powf(1.0 + nu) * l);
    }
    println!("\nstop: {:?} at t = {:.4} after {} steps", run.evolution.stop, run.evolution.t_stop, run.evolution.steps);
    println!("energy drift (net of boundary work): {:.2e}", run.energy_drift);
    println!("fitted p = {:.3} over the run (target {})", run.fit.p, 1.0 + nu);
    if let Some(f) = run.leading_fit {
        println!("fitted p = {:.3} over the first factor {:.1} below t0", f.p, f.span);
    }
    if let Some(trend) = run.local_trend {
        println!("E_loc t lambda / log^2 t: {trend:?}");
    }
    Ok(())
}
