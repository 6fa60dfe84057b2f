//! Numerical building blocks: quadrature, ODE integration, splines, fits, grids.

pub mod ode;
pub mod quad;
pub mod spline;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` geometrically spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + step * i as f64).exp()
            }
        })
        .collect()
}

/// `n` uniformly spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

/// Result of a linear least-squares fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    /// RMS of the residual.
    pub residual_rms: f64,
    /// ||residual|| / ||data||.
    pub relative_residual: f64,
}

impl LinearFit {
    pub fn eval(&self, basis: &[&dyn Fn(f64) -> f64], x: f64) -> f64 {
        self.coefficients
            .iter()
            .zip(basis)
            .map(|(c, b)| c * b(x))
            .sum()
    }
}

/// Least squares `y ≈ Σ c_j basis_j(x)` via SVD.
pub fn least_squares(basis: &[&dyn Fn(f64) -> f64], x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    let k = basis.len();
    if n != y.len() {
        return Err(Error::contract("fit abscissa and data lengths differ"));
    }
    if n < k {
        return Err(Error::InsufficientData(format!(
            "{n} samples for a {k}-term fit"
        )));
    }
    // Column scaling keeps the SVD well conditioned when basis sizes differ.
    let mut a = DMatrix::<f64>::zeros(n, k);
    for (i, &xi) in x.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            a[(i, j)] = b(xi);
        }
    }
    let scales: Vec<f64> = (0..k)
        .map(|j| {
            let s = a.column(j).norm();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    for j in 0..k {
        let s = scales[j];
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let sol = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::contract(format!("least squares failed: {e}")))?;
    let coefficients: Vec<f64> = (0..k).map(|j| sol[j] / scales[j]).collect();
    let resid = &a * &sol - &b;
    let rn = resid.norm();
    let yn = b.norm();
    Ok(LinearFit {
        coefficients,
        residual_rms: rn / (n as f64).sqrt(),
        relative_residual: if yn > 0.0 { rn / yn } else { rn },
    })
}

/// Piecewise-linear interpolation in (log x, log y); `y` must be positive.
/// Outside the table the end segments are extended.
pub fn loglog_interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let lx = x.ln();
    let idx = xs.partition_point(|&v| v <= x);
    let i = idx.clamp(1, xs.len() - 1) - 1;
    let (x0, x1) = (xs[i].ln(), xs[i + 1].ln());
    let (y0, y1) = (ys[i].ln(), ys[i + 1].ln());
    let s = (lx - x0) / (x1 - x0);
    (y0 + s * (y1 - y0)).exp()
}

/// Linear interpolation in log x of a signed quantity; clamps outside the table.
pub fn logx_interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let n = xs.len();
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let idx = xs.partition_point(|&v| v <= x);
    let i = idx.clamp(1, n - 1) - 1;
    let (x0, x1) = (xs[i].ln(), xs[i + 1].ln());
    let s = (x.ln() - x0) / (x1 - x0);
    ys[i] + s * (ys[i + 1] - ys[i])
}

/// Slope of a straight-line fit of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let one = |_: f64| 1.0;
    let id = |v: f64| v;
    let fit = least_squares(&[&id, &one], &lx, &ly)?;
    Ok((fit.coefficients[0], fit.coefficients[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log_grid_endpoints_and_ratio() {
        let g = log_grid(1e-3, 1e3, 7);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[6], 1e3);
        assert_relative_eq!(g[3], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn exact_fit_recovers_coefficients() {
        let x = linear_grid(1.0, 10.0, 50);
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v * v.ln() - 0.5 * v + 3.0).collect();
        let b0 = |v: f64| v * v.ln();
        let b1 = |v: f64| v;
        let b2 = |_: f64| 1.0;
        let fit = least_squares(&[&b0, &b1, &b2], &x, &y).unwrap();
        assert_relative_eq!(fit.coefficients[0], 2.0, epsilon = 1e-10);
        assert_relative_eq!(fit.coefficients[1], -0.5, epsilon = 1e-10);
        assert_relative_eq!(fit.coefficients[2], 3.0, epsilon = 1e-9);
        assert!(fit.relative_residual < 1e-12);
    }

    #[test]
    fn loglog_interp_power_law_is_exact() {
        let xs = log_grid(1e-2, 1e2, 9);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(1.7)).collect();
        assert_relative_eq!(loglog_interp(&xs, &ys, 0.37), 3.0 * 0.37f64.powf(1.7), max_relative = 1e-12);
    }
}
