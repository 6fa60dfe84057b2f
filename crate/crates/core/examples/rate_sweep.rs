//! Independent runs for several nu in parallel, tabulating the fitted rate
//! exponent against 1 + nu.

use wavemap_core::config::Tolerances;
use wavemap_core::simulator::{rate_sweep, SimulationConfig};

fn main() {
    let cfgs: Vec<SimulationConfig> = [0.25, 0.5, 1.0]
        .iter()
        .map(|&nu| SimulationConfig { nu, ..Default::default() })
        .collect();
    println!("{:>6} {:>8} {:>8} {:>10} {:>10}", "nu", "1 + nu", "p", "p leading", "wall (s)");
    for (cfg, run) in cfgs.iter().zip(rate_sweep(&cfgs, &Tolerances::default())) {
        match run {
            Ok(r) => println!(
                "{:>6} {:>8} {:>8.3} {:>10.3} {:>10.1}",
                cfg.nu,
                1.0 + cfg.nu,
                r.fit.p,
                r.leading_fit.map_or(f64::NAN, |f| f.p),
                r.wall_seconds
            ),
            Err(e) => println!("{:>6} failed: {e}", cfg.nu),
        }
    }
}
