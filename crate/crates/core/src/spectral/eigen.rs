//! Generalized eigenfunctions of
//! `L = -d^2/dR^2 + 3/(4R^2) - 8/(1+R^2)^2`, i.e. solutions of
//! `f'' = (V(R) - xi) f`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::numerics::ode::{self, OdeOptions, Trajectory};

/// `V(R) = 3/(4R^2) - 8/(1+R^2)^2`.
pub fn potential(r: f64) -> f64 {
    0.75 / (r * r) - 8.0 / (1.0 + r * r).powi(2)
}

/// Coefficient of `R^(2m)` in `8/(1+R^2)^2`.
fn well_coefficient(m: usize) -> f64 {
    let s = if m % 2 == 0 { 1.0 } else { -1.0 };
    8.0 * (m as f64 + 1.0) * s
}

const SERIES_TERMS: usize = 40;

/// `phi(R, xi) = R^(3/2) Σ c_k R^(2k)`, `c_0 = 1`.
pub fn regular_series(xi: f64, terms: usize) -> Vec<f64> {
    let mut c = vec![0.0; terms];
    c[0] = 1.0;
    for k in 1..terms {
        let well: f64 = (0..k).map(|m| well_coefficient(m) * c[k - 1 - m]).sum();
        c[k] = (-xi * c[k - 1] - well) / (4.0 * (k * (k + 1)) as f64);
    }
    c
}

/// `theta = kappa phi log R + R^(-1/2) Σ b_k R^(2k)` with `b_0 = 1/2`,
/// `b_1 = -1/2`; returns `(kappa, b)`.
pub fn secondary_series(xi: f64, terms: usize) -> (f64, Vec<f64>) {
    let c = regular_series(xi, terms);
    let mut b = vec![0.0; terms];
    b[0] = 0.5;
    if terms > 1 {
        b[1] = -0.5;
    }
    let kappa = -(8.0 + xi) * b[0] / 2.0;
    for k in 2..terms {
        let well: f64 = (0..k).map(|m| well_coefficient(m) * b[k - 1 - m]).sum();
        let s = xi * b[k - 1] + well + kappa * c[k - 1] * (4 * k - 2) as f64;
        b[k] = -s / (4.0 * (k * (k - 1)) as f64);
    }
    (kappa, b)
}

fn eval_regular_series(c: &[f64], r: f64) -> (f64, f64) {
    let r2 = r * r;
    let (mut s, mut ds) = (0.0, 0.0);
    let mut p = 1.0;
    for (k, &ck) in c.iter().enumerate() {
        s += ck * p;
        ds += ck * (2.0 * k as f64 + 1.5) * p;
        p *= r2;
    }
    (r.powf(1.5) * s, r.sqrt() * ds)
}

fn eval_secondary_series(kappa: f64, c: &[f64], b: &[f64], r: f64) -> (f64, f64) {
    let (phi, dphi) = eval_regular_series(c, r);
    let r2 = r * r;
    let (mut s, mut ds) = (0.0, 0.0);
    let mut p = 1.0;
    for (k, &bk) in b.iter().enumerate() {
        s += bk * p;
        ds += bk * (2.0 * k as f64 - 0.5) * p;
        p *= r2;
    }
    let ln = r.ln();
    (
        kappa * phi * ln + s / r.sqrt(),
        kappa * (dphi * ln + phi / r) + ds / (r * r.sqrt()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenKind {
    Regular,
    Secondary,
    WeylPlus,
}

/// Samples of a solution and its derivative on a grid.
#[derive(Debug, Clone)]
pub struct Eigenfunction {
    pub xi: f64,
    pub kind: EigenKind,
    pub grid: Vec<f64>,
    pub values: Vec<Complex64>,
    pub derivatives: Vec<Complex64>,
    /// Set when the Weyl start radius had to move beyond the requested one.
    pub extended_start: Option<f64>,
}

impl Eigenfunction {
    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
}

/// Wronskian `f g' - f' g`.
pub fn wronskian(f: (Complex64, Complex64), g: (Complex64, Complex64)) -> Complex64 {
    f.0 * g.1 - f.1 * g.0
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid[0] <= 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::contract("eigenfunction grid must be positive and increasing"));
    }
    Ok(())
}

fn ode_options(tol: &Tolerances) -> OdeOptions {
    let mut o = OdeOptions::new(tol.ode_rel, tol.ode_abs);
    o.max_steps = 5_000_000;
    o
}

/// Launch radius: inside the convergence disc and well before the first
/// oscillation.
fn launch_radius(xi: f64, tol: &Tolerances) -> f64 {
    tol.spectral_r0.min(0.1 / xi.max(1e-300).sqrt())
}

/// Dense solution of `f'' = (V - xi) f` from series data at a small radius.
#[derive(Debug, Clone)]
pub struct RealSolution {
    pub xi: f64,
    r0: f64,
    series: SeriesData,
    trajectory: Trajectory<2>,
}

#[derive(Debug, Clone)]
enum SeriesData {
    Regular(Vec<f64>),
    Secondary(f64, Vec<f64>, Vec<f64>),
}

impl RealSolution {
    pub fn eval(&self, r: f64) -> (f64, f64) {
        if r <= self.r0 {
            return match &self.series {
                SeriesData::Regular(c) => eval_regular_series(c, r),
                SeriesData::Secondary(k, c, b) => eval_secondary_series(*k, c, b, r),
            };
        }
        self.trajectory.eval_pair(r, 0, 1)
    }

    pub fn r_max(&self) -> f64 {
        self.trajectory.x_range().1
    }

    pub fn sample(&self, grid: &[f64], kind: EigenKind) -> Eigenfunction {
        let (values, derivatives) = grid
            .iter()
            .map(|&r| {
                let (v, d) = self.eval(r);
                (Complex64::new(v, 0.0), Complex64::new(d, 0.0))
            })
            .unzip();
        Eigenfunction {
            xi: self.xi,
            kind,
            grid: grid.to_vec(),
            values,
            derivatives,
            extended_start: None,
        }
    }
}

fn integrate_from_series(xi: f64, r_end: f64, series: SeriesData, tol: &Tolerances) -> Result<RealSolution> {
    if !(xi >= 0.0) {
        return Err(Error::contract("spectral parameter must be nonnegative"));
    }
    let r0 = launch_radius(xi, tol).min(0.5 * r_end);
    let y0 = match &series {
        SeriesData::Regular(c) => eval_regular_series(c, r0),
        SeriesData::Secondary(k, c, b) => eval_secondary_series(*k, c, b, r0),
    };
    let f = move |r: f64, y: &[f64; 2]| [y[1], (potential(r) - xi) * y[0]];
    let mut opts = ode_options(tol);
    // Resolve each oscillation and the potential scale.
    opts.h_max = (0.5 / xi.max(1e-12).sqrt()).min(1.0);
    let trajectory = ode::solve_dense(f, r0, [y0.0, y0.1], r_end, opts)?;
    Ok(RealSolution {
        xi,
        r0,
        series,
        trajectory,
    })
}

/// Regular solution `phi(R, xi) ~ R^(3/2)` continued to `r_end`.
pub fn regular_solution(xi: f64, r_end: f64, tol: &Tolerances) -> Result<RealSolution> {
    integrate_from_series(xi, r_end, SeriesData::Regular(regular_series(xi, SERIES_TERMS)), tol)
}

/// Secondary solution `theta(R, xi) ~ R^(-1/2) / 2` with `W(theta, phi) = 1`.
pub fn secondary_solution(xi: f64, r_end: f64, tol: &Tolerances) -> Result<RealSolution> {
    let (kappa, b) = secondary_series(xi, SERIES_TERMS);
    let c = regular_series(xi, SERIES_TERMS);
    integrate_from_series(xi, r_end, SeriesData::Secondary(kappa, c, b), tol)
}

pub fn regular_eigenfunction(xi: f64, grid: &[f64], tol: &Tolerances) -> Result<Eigenfunction> {
    check_grid(grid)?;
    let end = grid[grid.len() - 1];
    Ok(regular_solution(xi, end, tol)?.sample(grid, EigenKind::Regular))
}

pub fn secondary_eigenfunction(xi: f64, grid: &[f64], tol: &Tolerances) -> Result<Eigenfunction> {
    check_grid(grid)?;
    let end = grid[grid.len() - 1];
    Ok(secondary_solution(xi, end, tol)?.sample(grid, EigenKind::Secondary))
}

/// Order-one Hankel coefficients `a_k = Π (4 - (2j-1)^2) / (k! 8^k)`.
const HANKEL: [f64; 4] = [1.0, 3.0 / 8.0, -15.0 / 128.0, 315.0 / 3072.0];

/// Outgoing asymptotics at large `R`:
/// `xi^(-1/4) e^(i z) Σ i^k a_k z^-k`, `z = R sqrt(xi)`, with the phase
/// shift of the `-8/R^4` tail.
pub fn weyl_asymptotic(xi: f64, r: f64) -> (Complex64, Complex64) {
    let k = xi.sqrt();
    let z = k * r;
    let i = Complex64::i();
    let mut s = Complex64::new(0.0, 0.0);
    let mut ds = Complex64::new(0.0, 0.0);
    let mut ik = Complex64::new(1.0, 0.0);
    for (n, &a) in HANKEL.iter().enumerate() {
        let zn = z.powi(-(n as i32));
        s += ik * a * zn;
        ds += ik * a * (-(n as f64)) * zn / r;
        ik *= i;
    }
    let phase = z - 4.0 / (3.0 * k * r.powi(3));
    let dphase = k + 4.0 / (k * r.powi(4));
    let e = Complex64::from_polar(xi.powf(-0.25), phase);
    (e * s, e * (i * dphase * s + ds))
}

/// `psi+` integrated backward from `r_far`; real and imaginary parts solve
/// the same real equation.
#[derive(Debug, Clone)]
pub struct WeylSolution {
    pub xi: f64,
    pub r_far: f64,
    trajectory: Trajectory<4>,
}

impl WeylSolution {
    pub fn eval(&self, r: f64) -> (Complex64, Complex64) {
        if r >= self.r_far {
            return weyl_asymptotic(self.xi, r);
        }
        let re = self.trajectory.eval_pair(r, 0, 1);
        let im = self.trajectory.eval_pair(r, 2, 3);
        (Complex64::new(re.0, im.0), Complex64::new(re.1, im.1))
    }

    pub fn r_min(&self) -> f64 {
        self.trajectory.x_range().0
    }
}

/// Default start radius `max(weyl_far, weyl_far / sqrt(xi))`.
pub fn weyl_start(xi: f64, tol: &Tolerances) -> f64 {
    tol.weyl_far.max(tol.weyl_far / xi.sqrt())
}

pub fn weyl_solution_from(xi: f64, r_far: f64, r_min: f64, tol: &Tolerances) -> Result<WeylSolution> {
    if !(xi > 0.0) {
        return Err(Error::contract("the Weyl solution needs xi > 0"));
    }
    if !(r_min > 0.0 && r_min < r_far) {
        return Err(Error::contract("Weyl integration range must satisfy 0 < r_min < r_far"));
    }
    let (p, dp) = weyl_asymptotic(xi, r_far);
    // Truncating the expansion leaves W(psi+, conj psi+) off -2i by ~1e-6 at
    // the default start; a real rescaling restores it exactly.
    let w = wronskian((p, dp), (p.conj(), dp.conj()));
    let s = (-2.0 / w.im).sqrt();
    let (p, dp) = (p * s, dp * s);
    let f = move |r: f64, y: &[f64; 4]| {
        let q = potential(r) - xi;
        [y[1], q * y[0], y[3], q * y[2]]
    };
    let mut opts = ode_options(tol);
    opts.h_max = (0.5 / xi.sqrt()).min(1.0);
    let trajectory = ode::solve_dense(f, r_far, [p.re, dp.re, p.im, dp.im], r_min, opts)?;
    Ok(WeylSolution { xi, r_far, trajectory })
}

/// `psi+(., xi)` sampled on `grid`. The start radius moves past the grid end
/// when needed; the returned function records it.
pub fn weyl_solution(xi: f64, grid: &[f64], tol: &Tolerances) -> Result<Eigenfunction> {
    check_grid(grid)?;
    let mut r_far = weyl_start(xi, tol);
    let end = grid[grid.len() - 1];
    let mut extended = None;
    if end >= r_far {
        r_far = 2.0 * end;
        extended = Some(r_far);
        log::warn!("Weyl start radius extended to {r_far} to cover the grid (xi = {xi})");
    }
    let w = weyl_solution_from(xi, r_far, grid[0], tol)?;
    let (values, derivatives) = grid.iter().map(|&r| w.eval(r)).unzip();
    Ok(Eigenfunction {
        xi,
        kind: EigenKind::WeylPlus,
        grid: grid.to_vec(),
        values,
        derivatives,
        extended_start: extended,
    })
}

/// Matching radius for the connection coefficient.
pub fn match_radius(xi: f64, tol: &Tolerances) -> f64 {
    tol.weyl_match.max(tol.weyl_match / xi.sqrt())
}

/// Connection data at one `xi`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Connection {
    pub xi: f64,
    pub a: Complex64,
    /// `|a|^-2 / (4 pi)`.
    pub rho: f64,
    /// `W(psi+, conj psi+)`; equals `-2i` for an accurate Weyl solution.
    pub weyl_wronskian: Complex64,
}

/// Density from the connection coefficient, normalized so the transform is
/// unitary from `L^2(dR)` to `L^2(rho dxi)`.
pub fn rho_from_a(a: Complex64) -> f64 {
    1.0 / (4.0 * std::f64::consts::PI * a.norm_sqr())
}

pub fn connection(xi: f64, tol: &Tolerances) -> Result<Connection> {
    let r_m = match_radius(xi, tol);
    let phi = regular_solution(xi, r_m, tol)?;
    let psi = weyl_solution_from(xi, weyl_start(xi, tol).max(2.0 * r_m), r_m, tol)?;
    let (p, dp) = psi.eval(r_m);
    let (f, df) = phi.eval(r_m);
    let f = (Complex64::new(f, 0.0), Complex64::new(df, 0.0));
    let w_pp = wronskian((p, dp), (p.conj(), dp.conj()));
    if w_pp.norm() < 1e-3 {
        return Err(Error::BadWeylSolution {
            xi,
            wronskian: w_pp.norm(),
        });
    }
    let a = wronskian(f, (p.conj(), dp.conj())) / w_pp;
    Ok(Connection {
        xi,
        a,
        rho: rho_from_a(a),
        weyl_wronskian: w_pp,
    })
}

/// `m(xi) = W(theta, psi+) / W(psi+, phi)`; `Im m / pi` is an independent
/// route to the spectral density.
pub fn m_function(xi: f64, tol: &Tolerances) -> Result<Complex64> {
    let r_m = match_radius(xi, tol);
    let phi = regular_solution(xi, r_m, tol)?;
    let theta = secondary_solution(xi, r_m, tol)?;
    let psi = weyl_solution_from(xi, weyl_start(xi, tol).max(2.0 * r_m), r_m, tol)?;
    let p = psi.eval(r_m);
    let c = |v: (f64, f64)| (Complex64::new(v.0, 0.0), Complex64::new(v.1, 0.0));
    Ok(wronskian(c(theta.eval(r_m)), p) / wronskian(p, c(phi.eval(r_m))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_xi_series_is_phi0() {
        let c = regular_series(0.0, 10);
        // R^(3/2)/(1+R^2) = R^(3/2) Σ (-1)^k R^(2k)
        for (k, ck) in c.iter().enumerate() {
            let expect = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((ck - expect).abs() < 1e-12, "c{k} = {ck}");
        }
    }

    #[test]
    fn series_wronskian_is_one() {
        for xi in [0.0, 0.3, 40.0] {
            let c = regular_series(xi, SERIES_TERMS);
            let (k, b) = secondary_series(xi, SERIES_TERMS);
            for r in [1e-3, 0.05, 0.3] {
                let phi = eval_regular_series(&c, r);
                let th = eval_secondary_series(k, &c, &b, r);
                let w = th.0 * phi.1 - th.1 * phi.0;
                assert!((w - 1.0).abs() < 1e-10, "xi {xi} r {r}: {w}");
            }
        }
    }

    #[test]
    fn weyl_asymptotic_wronskian() {
        for xi in [0.01, 1.0, 100.0] {
            let r = weyl_start(xi, &Tolerances::default());
            let (p, dp) = weyl_asymptotic(xi, r);
            let w = wronskian((p, dp), (p.conj(), dp.conj()));
            assert!((w - Complex64::new(0.0, -2.0)).norm() < 1e-5, "{w}");
        }
    }
}
