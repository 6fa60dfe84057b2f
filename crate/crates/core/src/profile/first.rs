//! First correction `v1` and the error it leaves behind.
//!
//! `v1 = g(R) / (t lambda)^2` where `g` solves the stationary linearized
//! problem `L~ g = t^2 e0`, built by variation of constants against the
//! closed-form fundamental pair.

use serde::{Deserialize, Serialize};

use super::fundamental::{cos_2q, sin_2q, FundamentalPair};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::model::{e0_closed_form, RadialProfile};
use crate::numerics::{least_squares, quad, LinearFit};

/// `t^2 e0` as a function of `R` alone.
pub fn scaled_e0(r: f64, nu: f64) -> f64 {
    e0_closed_form(1.0, r, nu)
}

/// `(t lambda)^2 v1` on `grid`, by variation of constants:
///
/// `g = 1/2 R^(-1/2) [ theta(R) ∫_0^R phi sqrt(R') f dR' - phi(R) ∫_0^R theta sqrt(R') f dR' ]`
/// with `f = t^2 e0`.
pub fn first_correction(nu: f64, grid: &[f64], tol: &Tolerances) -> Result<RadialProfile> {
    if !(nu > 0.0) {
        return Err(Error::contract("nu must be positive"));
    }
    if grid.is_empty() || grid[0] <= 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::contract("grid must be positive and strictly increasing"));
    }
    let fp = FundamentalPair;
    let f = |r: f64| scaled_e0(r, nu);
    let int_phi = |r: f64| fp.phi(r) * r.sqrt() * f(r);
    let int_theta = |r: f64| fp.theta(r) * r.sqrt() * f(r);

    // First interval from the axis via R' = s^2, then grid interval by interval.
    let abs = tol.quad_abs * 1e-6;
    let s0 = grid[0].sqrt();
    let sub = |h: &dyn Fn(f64) -> f64| {
        quad::integrate(|s: f64| h(s * s) * 2.0 * s, 0.0, s0, abs, tol.quad_rel)
    };
    let a0 = sub(&int_phi)?.value;
    let b0 = sub(&int_theta)?.value;
    let a_cum = quad::cumulative(int_phi, grid[0], grid, abs, tol.quad_rel)?;
    let b_cum = quad::cumulative(int_theta, grid[0], grid, abs, tol.quad_rel)?;

    let values: Vec<f64> = grid
        .iter()
        .zip(a_cum.iter().zip(&b_cum))
        .map(|(&r, (&a, &b))| {
            0.5 / r.sqrt() * (fp.theta(r) * (a0 + a) - fp.phi(r) * (b0 + b))
        })
        .collect();
    Ok(RadialProfile::new(grid.to_vec(), values, 3, (1, 1))?.with_nu(nu))
}

/// Large-`R` fit `g ≈ d1 R log R + d2 R` on `[lo, hi]`.
pub fn far_field_fit(profile: &RadialProfile, lo: f64, hi: f64) -> Result<LinearFit> {
    let (x, y) = profile.window(lo, hi);
    let b0 = |r: f64| r * r.ln();
    let b1 = |r: f64| r;
    least_squares(&[&b0, &b1], &x, &y)
}

/// Log-uniform spacing of a grid, or an error when it is not log-uniform or
/// too coarse for the derivative stencil.
fn log_step(grid: &[f64]) -> Result<f64> {
    if grid.len() < 7 {
        return Err(Error::GridTooCoarse(format!(
            "{} points; the log-R stencil needs at least 7",
            grid.len()
        )));
    }
    let h = (grid[1] / grid[0]).ln();
    for w in grid.windows(2) {
        let hi = (w[1] / w[0]).ln();
        if (hi - h).abs() > 1e-6 * h {
            return Err(Error::contract("log-R derivatives need a geometric grid"));
        }
    }
    if h > 0.05 {
        return Err(Error::GridTooCoarse(format!(
            "log-R spacing {h:.4} exceeds 0.05"
        )));
    }
    Ok(h)
}

/// `D g` and `D^2 g` with `D = R d/dR`, by sixth-order differences in `log R`.
pub fn log_derivatives(grid: &[f64], g: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let h = log_step(grid)?;
    let n = g.len();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for i in 0..n {
        // Shift the seven-point stencil inward at the ends.
        let c = i.clamp(HALF, n - 1 - HALF);
        let x = (i as f64) - (c as f64);
        let (w1, w2) = stencil_weights(x);
        for k in 0..STENCIL {
            let v = g[c + k - HALF];
            d1[i] += w1[k] * v;
            d2[i] += w2[k] * v;
        }
        d1[i] /= h;
        d2[i] /= h * h;
    }
    Ok((d1, d2))
}

const STENCIL: usize = 7;
const HALF: usize = STENCIL / 2;

/// First and second derivative weights of the Lagrange interpolant through
/// the nodes `-3..=3`, evaluated at `x`.
fn stencil_weights(x: f64) -> ([f64; STENCIL], [f64; STENCIL]) {
    let nodes: [f64; STENCIL] = std::array::from_fn(|k| k as f64 - HALF as f64);
    let mut w1 = [0.0; STENCIL];
    let mut w2 = [0.0; STENCIL];
    for j in 0..STENCIL {
        let others: Vec<f64> = (0..STENCIL).filter(|&m| m != j).map(|m| nodes[m]).collect();
        let denom: f64 = others.iter().map(|o| nodes[j] - o).product();
        let m = others.len();
        let prod_except = |skip: &[usize]| -> f64 {
            (0..m).filter(|k| !skip.contains(k)).map(|k| x - others[k]).product()
        };
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for a in 0..m {
            s1 += prod_except(&[a]);
            for b in 0..m {
                if b != a {
                    s2 += prod_except(&[a, b]);
                }
            }
        }
        w1[j] = s1 / denom;
        w2[j] = s2 / denom;
    }
    (w1, w2)
}

/// Leading coefficients of `t^2 e1 = (t lambda)^-2 [c1 R log R + c2 R + c3 log R + c4 + ...]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorCoefficients {
    pub c: [f64; 4],
    /// Fit window `[lo, hi]` in `R`.
    pub window: (f64, f64),
    pub fit: LinearFit,
}

#[derive(Debug, Clone)]
pub struct FirstErrorExpansion {
    /// `(t lambda)^2 t^2 e1` evaluated at `t_ref`.
    pub profile: RadialProfile,
    pub t_ref: f64,
    pub coefficients: ErrorCoefficients,
}

/// Reference time at which `t lambda = 10^6`; small enough that the cubic
/// term of the nonlinearity is invisible in the fitted coefficients.
pub fn default_reference_time(nu: f64) -> f64 {
    1e6f64.powf(-1.0 / nu)
}

/// Exact `t^2 e1` of `u1 = Q + v1` at time `t`, as a function of `R`, given
/// `g`, `D g`, `D^2 g`.
pub fn e1_scaled(nu: f64, t: f64, r: f64, g: f64, dg: f64, ddg: f64) -> f64 {
    let tl2 = t.powf(-2.0 * nu);
    let v1 = g / tl2;
    let dtt = (2.0 * nu * (2.0 * nu - 1.0) * g - (1.0 + nu) * (4.0 * nu - 1.0) * dg
        + (1.0 + nu).powi(2) * ddg)
        / tl2;
    // 1 - cos(2v) = 2 sin^2 v; 2v - sin 2v by series when small.
    let one_minus_cos = 2.0 * v1.sin().powi(2);
    let x = 2.0 * v1;
    let x_minus_sin = if x.abs() < 1e-3 {
        x.powi(3) / 6.0 - x.powi(5) / 120.0
    } else {
        x - x.sin()
    };
    let r2 = r * r;
    dtt - sin_2q(r) / (2.0 * r2) * tl2 * one_minus_cos - cos_2q(r) / (2.0 * r2) * tl2 * x_minus_sin
}

/// `(t lambda)^2 t^2 e1` at the reference time, plus the fitted leading
/// large-`R` coefficients on the last decade of the grid.
pub fn first_error_expansion(nu: f64, v1: &RadialProfile, t_ref: Option<f64>) -> Result<FirstErrorExpansion> {
    let t_ref = t_ref.unwrap_or_else(|| default_reference_time(nu));
    let (dg, ddg) = log_derivatives(&v1.grid, &v1.values)?;
    let tl2 = t_ref.powf(-2.0 * nu);
    let values: Vec<f64> = v1
        .grid
        .iter()
        .enumerate()
        .map(|(i, &r)| tl2 * e1_scaled(nu, t_ref, r, v1.values[i], dg[i], ddg[i]))
        .collect();
    let profile = RadialProfile::new(v1.grid.clone(), values, 3, (1, 1))?.with_nu(nu);
    // Last decade, minus the points where the derivative stencil is one-sided.
    let n = v1.grid.len();
    let hi = v1.grid[n - 1];
    let coefficients = fit_error_coefficients(&profile, hi / 10.0, v1.grid[n - 1 - HALF])?;
    Ok(FirstErrorExpansion {
        profile,
        t_ref,
        coefficients,
    })
}

/// Fit `c1 R log R + c2 R + c3 log R + c4` together with the decaying
/// `log^2 R / R`, `log R / R`, `1 / R` corrections on `[lo, hi]`; only the
/// first four coefficients are reported.
pub fn fit_error_coefficients(profile: &RadialProfile, lo: f64, hi: f64) -> Result<ErrorCoefficients> {
    let (x, y) = profile.window(lo, hi);
    let b: [&dyn Fn(f64) -> f64; 7] = [
        &|r: f64| r * r.ln(),
        &|r: f64| r,
        &|r: f64| r.ln(),
        &|_| 1.0,
        &|r: f64| r.ln().powi(2) / r,
        &|r: f64| r.ln() / r,
        &|r: f64| 1.0 / r,
    ];
    let fit = least_squares(&b, &x, &y)?;
    let c = [
        fit.coefficients[0],
        fit.coefficients[1],
        fit.coefficients[2],
        fit.coefficients[3],
    ];
    Ok(ErrorCoefficients {
        c,
        window: (lo, hi),
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::log_grid;

    #[test]
    fn stencil_weights_differentiate_sextics() {
        for x in [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0] {
            let (w1, w2) = stencil_weights(x);
            let p = |s: f64| s.powi(6) - 2.0 * s.powi(3) + s;
            let dp = |s: f64| 6.0 * s.powi(5) - 6.0 * s * s + 1.0;
            let ddp = |s: f64| 30.0 * s.powi(4) - 12.0 * s;
            let vals: Vec<f64> = (0..7).map(|k| p(k as f64 - 3.0)).collect();
            let d1: f64 = (0..7).map(|k| w1[k] * vals[k]).sum();
            let d2: f64 = (0..7).map(|k| w2[k] * vals[k]).sum();
            assert!((d1 - dp(x)).abs() < 1e-9);
            assert!((d2 - ddp(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn log_derivatives_of_power_law() {
        let grid = log_grid(1e-2, 1e2, 400);
        let g: Vec<f64> = grid.iter().map(|r| r.powi(3)).collect();
        let (d1, d2) = log_derivatives(&grid, &g).unwrap();
        for i in 0..grid.len() {
            assert!((d1[i] / (3.0 * g[i]) - 1.0).abs() < 1e-4);
            assert!((d2[i] / (9.0 * g[i]) - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn coarse_grid_rejected() {
        let grid = log_grid(1e-3, 1e3, 50);
        let g = vec![1.0; 50];
        assert!(matches!(log_derivatives(&grid, &g), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn e1_at_zero_correction_is_zero() {
        assert_eq!(e1_scaled(0.5, 0.1, 1.0, 0.0, 0.0, 0.0), 0.0);
    }
}
