//! Acceptance run: one PASS/FAIL line per criterion with the measured numbers.
//!
//! The process exits 0 so a known failure does not mask the rest of the test
//! suite. Set `ACCEPTANCE_STRICT=1` to exit 1 when any criterion fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavemap_core::config::Tolerances;
use wavemap_core::model::{e0_closed_form, pde_residual, BlowupParams, WaveField};
use wavemap_core::numerics::{least_squares, linear_grid, log_grid, loglog_slope};
use wavemap_core::parametrix::*;
use wavemap_core::profile::first::{far_field_fit, first_correction, log_derivatives, scaled_e0};
use wavemap_core::profile::fundamental::cos_2q;
use wavemap_core::profile::lbeta::apply_lbeta;
use wavemap_core::profile::{assemble, solve_lbeta, ApproxSolution, FundamentalPair, LbetaOptions, Parity, Rhs, SelfSimilarSolution};
use wavemap_core::simulator::{rate_sweep, SimulationConfig, SimulationRun};
use wavemap_core::spectral::*;
use wavemap_core::Result;

type Check = Result<(bool, String)>;

struct Outcome {
    id: usize,
    pass: bool,
}

fn run(id: usize, name: &str, f: impl FnOnce() -> Check) -> Outcome {
    let start = Instant::now();
    let (pass, detail) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    let secs = start.elapsed().as_secs_f64();
    println!("{} {id:>2} {name}: {detail} ({secs:.2} s)", if pass { "PASS" } else { "FAIL" });
    Outcome { id, pass }
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn fundamental_wronskian() -> Check {
    let start = Instant::now();
    let pair = FundamentalPair;
    let worst = log_grid(1e-2, 1e2, 100)
        .into_iter()
        .map(|r| (pair.wronskian(r) / FundamentalPair::WRONSKIAN - 1.0).abs())
        .fold(0.0f64, f64::max);
    let secs = start.elapsed().as_secs_f64();
    Ok((worst < 1e-8 && secs < 1.0, format!("max |W/2 - 1| = {worst:.2e} on 100 R in [1e-2, 1e2]")))
}

fn spectral_wronskian() -> Check {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for xi in [0.01, 1.0, 100.0] {
        let phi = regular_solution(xi, 10.0, &tol())?;
        let theta = secondary_solution(xi, 10.0, &tol())?;
        for r in log_grid(0.1, 10.0, 25) {
            let (p, dp) = phi.eval(r);
            let (q, dq) = theta.eval(r);
            worst = worst.max((q * dp - dq * p - 1.0).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((worst < 1e-6 && secs < 10.0, format!("max |W - 1| = {worst:.2e} at xi in {{0.01, 1, 100}}")))
}

/// Finite-difference residual at `(t, r)` with relative steps `h`.
fn fd_residual(u: &ApproxSolution, t: f64, r: f64, h: f64) -> Result<f64> {
    let (dt, dr) = (h * t, h * r);
    let grid: Vec<f64> = (0..5).map(|i| r + (i as f64 - 2.0) * dr).collect();
    let slice = |tt: f64| -> Result<WaveField> {
        let v = grid.iter().map(|&x| u.eval(tt, x)).collect::<Result<Vec<_>>>()?;
        WaveField::new(tt, grid.clone(), v, vec![0.0; 5])
    };
    let (_, res) = pde_residual(&slice(t - dt)?, &slice(t)?, &slice(t + dt)?)?;
    Ok(res[1])
}

fn e0_consistency() -> Check {
    let t = 0.5;
    let (coarse, fine) = (1e-2, 5e-3);
    let mut worst = 0.0f64;
    let mut orders = Vec::new();
    for nu in [0.25, 1.0] {
        let p = BlowupParams::new(nu)?;
        let u0 = assemble(p, 0, &tol())?;
        let lam = p.lambda(t);
        let (mut e_coarse, mut e_fine) = (0.0, 0.0);
        for big_r in log_grid(0.1, 10.0, 20) {
            let r = big_r / lam;
            let exact = e0_closed_form(t, big_r, nu);
            let a = fd_residual(&u0, t, r, coarse)?;
            let b = fd_residual(&u0, t, r, fine)?;
            worst = worst.max((b - exact).abs() / exact.abs());
            e_coarse += (a - exact).powi(2);
            e_fine += (b - exact).powi(2);
        }
        orders.push((e_coarse / e_fine).sqrt().log2());
    }
    let ok = worst < 0.01 && orders.iter().all(|o| (o - 2.0).abs() <= 0.3);
    Ok((ok, format!("max relative error {worst:.2e} at 20 R per nu; Richardson orders {orders:.3?}")))
}

fn first_correction_structure() -> Check {
    let grid = log_grid(tol().grid_r_min, tol().grid_r_max, tol().grid_points);
    let mut ok = true;
    let mut parts = Vec::new();
    for nu in [0.25, 0.5, 1.0] {
        let v = first_correction(nu, &grid, &tol())?;
        let (x, y) = v.window(1e-3, 1e-2);
        let ratios: Vec<f64> = x.iter().zip(&y).map(|(r, g)| g / r.powi(3)).collect();
        let (lo, hi) = ratios.iter().fold((f64::MAX, f64::MIN), |(a, b), &r| (a.min(r), b.max(r)));
        let spread = hi / lo;
        let fit = far_field_fit(&v, 1e2, 1e3)?;
        let (_, d2) = log_derivatives(&grid, &v.values)?;
        let mut ode = 0.0f64;
        for i in (10..grid.len() - 10).step_by(37) {
            let r = grid[i];
            let pot = cos_2q(r) * v.values[i] / (r * r);
            let lhs = d2[i] / (r * r) - pot;
            let f = scaled_e0(r, nu);
            ode = ode.max((lhs - f).abs() / (f.abs() + pot.abs()));
        }
        ok &= lo * hi > 0.0 && spread < 1.01 && fit.relative_residual < 0.02 && ode < 1e-4;
        parts.push(format!(
            "nu {nu}: g/R^3 spread {spread:.5}, far fit {:.2e}, ODE {ode:.1e}",
            fit.relative_residual
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn residual_improvement() -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for nu in [0.25, 1.0] {
        let p = BlowupParams::new(nu)?;
        let u0 = assemble(p, 0, &tol())?;
        let u1 = assemble(p, 1, &tol())?;
        let ratio = |t: f64| -> Result<f64> {
            let r = 1.0 / p.lambda(t);
            Ok((fd_residual(&u1, t, r, 1e-4)? / fd_residual(&u0, t, r, 1e-4)?).abs())
        };
        let observed = ratio(0.1)? / ratio(0.05)?;
        let expected = 2f64.powf(2.0 * nu);
        let q = observed / expected;
        ok &= q > 0.5 && q < 2.0;
        parts.push(format!("nu {nu}: {observed:.3} vs 2^(2nu) = {expected:.3}"));
    }
    Ok((ok, parts.join("; ")))
}

fn fd_lbeta(sol: &SelfSimilarSolution, a: f64) -> f64 {
    let h = 2e-3;
    let w = |x: f64| sol.value(x);
    let d1 = (w(a - 2.0 * h) - 8.0 * w(a - h) + 8.0 * w(a + h) - w(a + 2.0 * h)) / (12.0 * h);
    let d2 = (-w(a - 2.0 * h) + 16.0 * w(a - h) - 30.0 * w(a) + 16.0 * w(a + h) - w(a + 2.0 * h)) / (12.0 * h * h);
    apply_lbeta(sol.beta, a, w(a), d1, d2)
}

fn lbeta_solver() -> Check {
    let opts = LbetaOptions::default();
    let nodes = [0.1, 0.3, 0.5, 0.7, 0.9 * (1.0 - opts.delta_edge)];

    let zero = solve_lbeta(0.7, &Rhs::zero(), Parity::Even, 2, &opts)?;
    let zero_ok = zero.table(50).1.iter().all(|v| *v == 0.0);

    let mut back = 0.0f64;
    let cases = [
        (0.5, Rhs::polynomial(vec![0.0, 1.0]), Parity::Odd, 3),
        (0.25, Rhs::polynomial(vec![0.0, -2.0, 0.0, 0.7]), Parity::Odd, 3),
        (2.0, Rhs::polynomial(vec![1.0, 0.0, 3.0]), Parity::Even, 2),
    ];
    for (beta, rhs, parity, lead) in &cases {
        let s = solve_lbeta(*beta, rhs, *parity, *lead, &opts)?;
        for a in nodes {
            back = back.max((fd_lbeta(&s, a) - rhs.eval(a)).abs() / rhs.eval(a).abs().max(1.0));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut linear = 0.0f64;
    for _ in 0..16 {
        let (a, b): (f64, f64) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let f = Rhs::polynomial(vec![0.0, 1.0]);
        let g = Rhs::polynomial(vec![0.0, -2.0, 0.0, 0.7]);
        let mix = Rhs::polynomial(vec![0.0, a - 2.0 * b, 0.0, 0.7 * b]);
        let sf = solve_lbeta(0.5, &f, Parity::Odd, 3, &opts)?;
        let sg = solve_lbeta(0.5, &g, Parity::Odd, 3, &opts)?;
        let sm = solve_lbeta(0.5, &mix, Parity::Odd, 3, &opts)?;
        for x in linear_grid(0.0, 0.9, 19) {
            let (lhs, rhs) = (sm.value(x), a * sf.value(x) + b * sg.value(x));
            let scale = (a * sf.value(x)).abs() + (b * sg.value(x)).abs();
            linear = linear.max((lhs - rhs).abs() / scale.max(1e-300));
        }
    }

    let odd = solve_lbeta(0.5, &Rhs::polynomial(vec![0.0, 1.0]), Parity::Odd, 3, &opts)?;
    let even = solve_lbeta(1.0, &Rhs::polynomial(vec![1.0]), Parity::Even, 2, &opts)?;
    let a = linear_grid(-0.2, 0.2, 81);
    let mut forbidden = 0.0f64;
    let powers: Vec<Box<dyn Fn(f64) -> f64>> = (0..8).map(|p| Box::new(move |x: f64| x.powi(p)) as Box<dyn Fn(f64) -> f64>).collect();
    let refs: Vec<&dyn Fn(f64) -> f64> = powers.iter().map(|b| b.as_ref()).collect();
    for (sol, lead) in [(&odd, 3usize), (&even, 2)] {
        let y: Vec<f64> = a.iter().map(|&x| sol.value(x)).collect();
        let c = least_squares(&refs, &a, &y)?.coefficients;
        let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (p, cp) in c.iter().enumerate() {
            if p < lead || p % 2 != lead % 2 {
                forbidden = forbidden.max(cp.abs() / scale);
            }
        }
    }

    let ok = zero_ok && back < 1e-6 && linear < 1e-8 && forbidden < 1e-8;
    Ok((
        ok,
        format!(
            "zero rhs {}, back-substitution {back:.1e}, linearity {linear:.1e}, forbidden powers {forbidden:.1e}",
            if zero_ok { "exact" } else { "nonzero" }
        ),
    ))
}

fn unitarity(basis: &SpectralBasis, build_secs: f64) -> Check {
    let start = Instant::now();
    let (mut plancherel, mut round_trip) = (0.0f64, 0.0f64);
    for (_, f) in test_corpus() {
        plancherel = plancherel.max((basis.plancherel_ratio(f)? - 1.0).abs());
        round_trip = round_trip.max(basis.round_trip_error(f)?);
    }
    let secs = build_secs + start.elapsed().as_secs_f64();
    Ok((
        plancherel <= 0.02 && round_trip < 0.01 && secs < 120.0,
        format!("max |ratio - 1| = {plancherel:.2e}, max round trip {round_trip:.2e}, with basis {secs:.1} s"),
    ))
}

fn spectral_density(tables: &SpectralTables) -> Check {
    let slope = tables.rho_slope(1e2, 1e4)?;
    let (lo, hi) = tables.small_xi_band(1e-4, 1e-2);
    let ratio = hi / lo;
    Ok((
        (slope - 1.0).abs() <= 0.05 && ratio < 3.0,
        format!("rho slope {slope:.4} on [1e2, 1e4], small-xi band [{lo:.4}, {hi:.4}] ratio {ratio:.3}"),
    ))
}

fn separable(n: f64, tau_max: f64) -> Result<SourceSample> {
    let taus = log_grid(1.0, tau_max, 240);
    let xis = log_grid(1e-6, 1e6, 241);
    SourceSample::from_fn(taus, xis, n, |s, x| s.powf(-n) * (-(x.ln() / 4.0).powi(2)).exp())
}

fn parametrix_checks(basis: &SpectralBasis) -> Check {
    let params = BlowupParams::new(0.5)?;
    let s = SymbolS::new(params, &tol());

    let mut cauchy = true;
    for sigma in [0.7, 2.0, 9.0] {
        for xi in [0.0, 1e-3, 1.0, 1e3] {
            cauchy &= s.eval(sigma, sigma, xi)? == (0.0, -1.0);
        }
    }
    let mut flat = true;
    for (tau, sigma) in [(1.0, 2.0), (0.3, 7.5), (2.0, 4.0)] {
        flat &= s.eval(tau, sigma, 0.0)? == (sigma - tau, -1.0);
    }

    let mut scaling = 0.0f64;
    for nu in [0.25, 0.5, 1.0] {
        let sym = SymbolS::new(BlowupParams::new(nu)?, &tol());
        for (tau, sigma, xi) in BoundSample::new(200, 7).triples() {
            let direct = sym.eval(tau, sigma, xi)?.0;
            let scaled = sym.eval_scaled(tau, sigma, xi)?;
            let scale = sym.bound_envelope(tau, sigma, xi).max(direct.abs());
            scaling = scaling.max((direct - scaled).abs() / scale);
        }
    }

    let u = Parametrix::new(s, RhoModel::new(&basis.tables)?);
    let mut oracle = 0.0f64;
    for f in [separable(6.0, 400.0)?, separable(4.0, 2000.0)?] {
        for (tau, xi) in [(1.5, 0.01), (2.0, 1.0), (5.0, 100.0), (3.0, 1e4)] {
            let a = u.apply_u(&f, tau, xi)?.value;
            let b = u.apply_by_characteristics(&f, tau, xi)?;
            oracle = oracle.max((a - b).abs() / b.abs());
        }
    }

    let n = 6.0;
    let f = separable(n, 4000.0)?;
    let taus = log_grid(10.0, 100.0, 8);
    let mut slopes = Vec::new();
    for xi in [1e-3, 1.0, 100.0] {
        let vals = taus.iter().map(|&t| Ok(u.apply_u(&f, t, xi)?.value.abs())).collect::<Result<Vec<_>>>()?;
        slopes.push(loglog_slope(&taus, &vals)?.0);
    }
    let decay = slopes.iter().all(|s| *s < -(n - 2.0) + 0.25) && (slopes[0] + n - 2.0).abs() < 0.3;

    let ok = cauchy && flat && scaling < 1e-6 && oracle < 1e-4 && decay;
    Ok((
        ok,
        format!(
            "Cauchy data {}, xi = 0 {}, scaling {scaling:.1e} on 600 random triples, oracle {oracle:.1e}, \
             decay slopes {slopes:.3?} for a sigma^-6 source",
            if cauchy { "exact" } else { "off" },
            if flat { "exact" } else { "off" },
        ),
    ))
}

fn rate_runs() -> Vec<(f64, Result<SimulationRun>)> {
    let nus = [0.25, 0.5, 1.0];
    let cfgs: Vec<SimulationConfig> = nus.iter().map(|&nu| SimulationConfig { nu, ..Default::default() }).collect();
    nus.into_iter().zip(rate_sweep(&cfgs, &tol())).collect()
}

fn rate_reproduction(runs: &[(f64, Result<SimulationRun>)]) -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for (nu, run) in runs {
        match run {
            Ok(r) => {
                let target = 1.0 + nu;
                let err = (r.fit.p - target).abs() / target;
                let leading = r.leading_fit.as_ref().map_or(f64::NAN, |f| f.p);
                ok &= err <= 0.1 && r.fit.span >= 4.0 && r.wall_seconds < 300.0;
                // lambda t^(1+nu) over the run; the prescribed law keeps it near 1.
                let (lo, hi) = r
                    .rate
                    .t
                    .iter()
                    .zip(&r.rate.lambda)
                    .map(|(t, l)| l * t.powf(target))
                    .fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(v), b.max(v)));
                parts.push(format!(
                    "nu {nu}: p = {:.3} vs {target} (leading {leading:.3}, span {:.1}, \
                     lambda t^(1+nu) in [{lo:.1e}, {hi:.2}], lambda monotone {}, {:.1} s)",
                    r.fit.p,
                    r.fit.span,
                    r.rate.monotone(),
                    r.wall_seconds
                ));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("nu {nu}: {e}"));
            }
        }
    }
    Ok((ok, parts.join("; ")))
}

fn local_energy(runs: &[(f64, Result<SimulationRun>)]) -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for (nu, run) in runs {
        match run.as_ref().ok().and_then(|r| r.local_trend) {
            Some(t) => {
                ok &= !t.monotone_growth;
                parts.push(format!(
                    "nu {nu}: slope {:.2}, growing at {:.0}% of samples",
                    t.slope,
                    100.0 * t.increasing_fraction
                ));
            }
            None => {
                ok = false;
                parts.push(format!("nu {nu}: no trend"));
            }
        }
    }
    Ok((ok, parts.join("; ")))
}

fn main() {
    let mut out = vec![
        run(1, "fundamental system Wronskian", fundamental_wronskian),
        run(2, "spectral Wronskian", spectral_wronskian),
        run(3, "leading residual against its closed form", e0_consistency),
        run(4, "first correction structure", first_correction_structure),
        run(5, "first correction improves the residual", residual_improvement),
        run(6, "self-similar solver", lbeta_solver),
    ];

    let start = Instant::now();
    let basis = default_tables(&tol()).and_then(|t| SpectralBasis::new(t, &tol()));
    let build = start.elapsed().as_secs_f64();
    match &basis {
        Ok(b) => {
            out.push(run(7, "transform unitarity", || unitarity(b, build)));
            out.push(run(8, "spectral density", || spectral_density(&b.tables)));
            out.push(run(9, "parametrix", || parametrix_checks(b)));
        }
        Err(e) => {
            let msg = e.to_string();
            for (id, name) in [(7, "transform unitarity"), (8, "spectral density"), (9, "parametrix")] {
                out.push(run(id, name, || Ok((false, format!("basis: {msg}")))));
            }
        }
    }

    let runs = rate_runs();
    out.push(run(10, "blow-up rate", || rate_reproduction(&runs)));
    out.push(run(11, "local error energy", || local_energy(&runs)));

    let failed: Vec<usize> = out.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    println!("{} of {} criteria pass; failing: {failed:?}", out.len() - failed.len(), out.len());
    if !failed.is_empty() && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
