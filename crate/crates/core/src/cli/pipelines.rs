//! One function per subcommand. Each writes its tables through `Artifacts`
//! and returns the summary that goes into the manifest.

use serde_json::{json, Value};

use super::config::RunConfig;
use super::manifest::Artifacts;
use crate::error::Result;
use crate::io::write_columns;
use crate::model::{ground_state, BlowupParams};
use crate::numerics::{least_squares, linear_grid};
use crate::parametrix::{zeroth_iterate, BoundSample, Parametrix, RhoModel, SymbolS};
use crate::profile::assemble;
use crate::simulator::{rate_sweep, simulate, write_field, SimulationConfig, SimulationRun};
use crate::spectral::{default_tables, test_corpus, SpectralBasis};

/// Slope of `ln y` against `ln x` and the RMS residual of that line.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let fit = least_squares(&[&|v| v, &|_| 1.0], &lx, &ly)?;
    Ok((fit.coefficients[0], fit.residual_rms))
}

const RESIDUAL_STEP: f64 = 1e-3;

pub fn profile(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value> {
    let p = &cfg.profile;
    let params = BlowupParams::new(p.nu)?;
    let approx = assemble(params, p.order, &cfg.tolerances)?;
    let lambda = params.lambda(p.t0);
    // Clear of the cone edge by more than the residual stencil.
    let r_end = approx.a_max().min(1.0) * p.t0 * (1.0 - 3.0 * RESIDUAL_STEP);
    let mut r: Vec<f64> = (1..=p.points).map(|i| r_end * i as f64 / p.points as f64).collect();
    let r_unit = 1.0 / lambda;
    if r_unit < r_end && !r.contains(&r_unit) {
        r.push(r_unit);
        r.sort_by(f64::total_cmp);
    }
    let big_r: Vec<f64> = r.iter().map(|r| lambda * r).collect();
    let q: Vec<f64> = big_r.iter().map(|&x| ground_state(x)).collect();
    let corr = r.iter().map(|&r| approx.correction(p.t0, r)).collect::<Result<Vec<_>>>()?;
    let u: Vec<f64> = q.iter().zip(&corr).map(|(q, c)| q + c).collect();
    let t2 = p.t0 * p.t0;
    let res = r
        .iter()
        .map(|&r| Ok(t2 * approx.residual(p.t0, r, RESIDUAL_STEP)?))
        .collect::<Result<Vec<_>>>()?;
    write_columns(
        &art.file("profile.csv"),
        &["r", "R", "u", "q", "correction", "t2_residual"],
        &[&r, &big_r, &u, &q, &corr, &res],
    )?;
    let u_at_unit = r.iter().position(|&x| x == r_unit).map(|i| u[i]);

    if let Some(v1) = &approx.v1 {
        v1.profile.write(&art.file("v1.csv"))?;
        art.file("v1.json");
        let f = &v1.far_fit;
        art.fit("d1", f.coefficients[0], f.relative_residual);
        art.fit("d2", f.coefficients[1], f.relative_residual);
    }
    if let Some(e) = &approx.error_coefficients {
        for (i, c) in e.c.iter().enumerate() {
            art.fit(format!("c{}", i + 1), *c, e.fit.relative_residual);
        }
    }
    if let Some(s) = &approx.second {
        let sols = [&s.w1, &s.w0, &s.wt1, &s.wt0];
        let a_top = sols.iter().map(|w| w.a_max()).fold(f64::INFINITY, f64::min) * (1.0 - 1e-9);
        let a = linear_grid(0.0, a_top, p.a_points);
        let cols: Vec<Vec<f64>> = sols.iter().map(|w| a.iter().map(|&x| w.value(x)).collect()).collect();
        write_columns(
            &art.file("second_correction.csv"),
            &["a", "w1", "w0", "wt1", "wt0"],
            &[&a, &cols[0], &cols[1], &cols[2], &cols[3]],
        )?;
    }
    Ok(json!({
        "nu": p.nu,
        "order": p.order,
        "t0": p.t0,
        "lambda_t0": lambda,
        "r_unit": r_unit,
        "u_at_unit": u_at_unit,
        "max_abs_t2_residual": res.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        "summary": approx.summary(),
    }))
}

pub fn spectral(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value> {
    let s = &cfg.spectral;
    let tables = default_tables(&cfg.tolerances)?;
    tables.write_csv(&art.file("spectral.csv"))?;
    let (lo, hi) = s.slope_window;
    let w = tables.window(lo, hi);
    let (slope, res) = loglog_fit(&tables.xi_grid[w.clone()], &tables.rho_values[w])?;
    art.fit("rho_slope", slope, res);
    let small = tables.small_xi_band(s.small_window.0, s.small_window.1);
    let mut results = json!({
        "points": tables.len(),
        "slope_window": s.slope_window,
        "small_xi_band": small,
        "small_xi_band_ratio": small.1 / small.0,
        "large_xi_band": tables.large_xi_band(lo, hi),
        "symbol_constant": tables.symbol_constant(),
        "rho_consistency": tables.rho_consistency(),
    });
    if s.corpus {
        let basis = SpectralBasis::new(tables, &cfg.tolerances)?;
        let mut rows = Vec::new();
        for (name, f) in test_corpus() {
            rows.push(json!({
                "name": name,
                "plancherel_ratio": basis.plancherel_ratio(f)?,
                "round_trip_error": basis.round_trip_error(f)?,
            }));
        }
        results["corpus"] = Value::Array(rows);
        results["small_xi_tail"] = serde_json::to_value(basis.tail)?;
    }
    Ok(results)
}

pub fn parametrix(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value> {
    let m = &cfg.parametrix;
    let tol = &cfg.tolerances;
    let params = BlowupParams::new(m.nu)?;
    let symbol = SymbolS::new(params, tol);
    let sample = BoundSample::new(m.bound_samples, cfg.seed);
    let report = symbol.bound_check(&sample)?;
    let triples = sample.triples();
    let mut cols = vec![Vec::with_capacity(triples.len()); 5];
    for &(tau, sigma, xi) in &triples {
        let (s, ds) = symbol.eval(tau, sigma, xi)?;
        for (c, v) in cols.iter_mut().zip([tau, sigma, xi, s, ds]) {
            c.push(v);
        }
    }
    write_columns(
        &art.file("symbol_sample.csv"),
        &["tau", "sigma", "xi", "s", "ds_dtau"],
        &[&cols[0], &cols[1], &cols[2], &cols[3], &cols[4]],
    )?;
    let mut results = json!({ "nu": m.nu, "bound": report });
    if m.zeroth {
        let tables = default_tables(tol)?;
        let basis = SpectralBasis::new(tables, tol)?;
        let u = Parametrix::new(symbol, RhoModel::new(&basis.tables)?);
        let approx = assemble(params, m.order, tol)?;
        let x0 = zeroth_iterate(&approx, &basis, &u, &m.zeroth_options)?;
        x0.write_csv(&art.file("x0.csv"))?;
        write_columns(&art.file("x0_norms.csv"), &["tau", "norm"], &[&x0.tau_grid, &x0.norms])?;
        let (slope, res) = loglog_fit(&x0.tau_grid, &x0.norms)?;
        art.fit("x0_norm_slope", slope, res);
        results["zeroth"] = json!({
            "order": m.order,
            "source_decay": x0.source.decay_order,
            "alpha": x0.alpha,
            "tau_range": [x0.tau_grid[0], x0.tau_grid[x0.tau_grid.len() - 1]],
            "xi_points": x0.xi_grid.len(),
            "options": m.zeroth_options,
        });
    }
    Ok(results)
}

/// Tables of one run, each file name prefixed by `tag`.
fn write_run(run: &SimulationRun, art: &mut Artifacts, tag: &str) -> Result<Value> {
    run.write_samples(&art.file(format!("{tag}samples.csv")))?;
    run.rate.write_csv(&art.file(format!("{tag}rate.csv")))?;
    run.write_local_energy(&art.file(format!("{tag}local_energy.csv")))?;
    for (i, f) in run.evolution.snapshots.iter().enumerate() {
        write_field(f, &art.file(format!("{tag}snapshot_{i:03}.csv")))?;
    }
    write_field(&run.evolution.last, &art.file(format!("{tag}final.csv")))?;
    let nu = run.config.nu;
    art.fit(format!("{tag}p"), run.fit.p, run.fit.residual);
    art.fit(format!("{tag}amplitude"), run.fit.amplitude, run.fit.residual);
    if let Some(f) = &run.leading_fit {
        art.fit(format!("{tag}p_leading"), f.p, f.residual);
    }
    art.truncated |= run.evolution.truncated();
    Ok(json!({
        "nu": nu,
        "target_p": 1.0 + nu,
        "p": run.fit.p,
        "relative_error": (run.fit.p - (1.0 + nu)).abs() / (1.0 + nu),
        "fit": run.fit,
        "leading_fit": run.leading_fit,
        "stop": run.evolution.stop,
        "t_stop": run.evolution.t_stop,
        "steps": run.evolution.steps,
        "lambda_monotone": run.rate.monotone(),
        "initial_energy": run.initial_energy,
        "energy_drift": run.energy_drift,
        "local_energy_trend": run.local_trend,
        "wall_seconds": run.wall_seconds,
    }))
}

pub fn simulate_one(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value> {
    let s = &cfg.simulate;
    let approx = assemble(BlowupParams::new(s.nu)?, s.order, &cfg.tolerances)?;
    let run = simulate(&approx, s)?;
    write_run(&run, art, "")
}

pub fn verify_rate(cfg: &RunConfig, art: &mut Artifacts) -> Result<Value> {
    let v = &cfg.verify_rate;
    let cfgs: Vec<SimulationConfig> = v
        .nus
        .iter()
        .map(|&nu| SimulationConfig {
            nu,
            ..cfg.simulate.clone()
        })
        .collect();
    let mut runs = Vec::new();
    let mut passed = true;
    for run in rate_sweep(&cfgs, &cfg.tolerances) {
        let run = run?;
        let mut r = write_run(&run, art, &format!("nu{}_", run.config.nu))?;
        let ok = r["relative_error"].as_f64().is_some_and(|e| e <= v.tolerance);
        r["within_tolerance"] = json!(ok);
        passed &= ok;
        runs.push(r);
    }
    Ok(json!({ "tolerance": v.tolerance, "passed": passed, "runs": runs }))
}
