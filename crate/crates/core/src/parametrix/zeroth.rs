//! Zeroth iterate `x0 = U lambda^-2 F[R^(1/2) e~]`, with `e~` the residual of
//! the approximate solution cut off sharply at the light cone.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::apply::{Parametrix, SourceSample, UValue};
use crate::error::{Error, Result};
use crate::numerics::{log_grid, loglog_slope};
use crate::profile::ApproxSolution;
use crate::spectral::{SpectralBasis, SpectralCoefficients};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZerothOptions {
    /// Source slices, log-spaced from `tau(t0)` to where the cone fills the
    /// transform domain.
    pub source_points: usize,
    pub t0: f64,
    /// Output times: log-spaced over the first `1 / out_fraction` of the
    /// source range.
    pub out_points: usize,
    pub out_fraction: f64,
    /// Every `xi_stride`-th basis frequency is an output frequency.
    pub xi_stride: usize,
    /// Relative finite-difference step of the residual.
    pub h_rel: f64,
    /// Tail tolerance relative to each output row's largest value.
    pub tail_rel: f64,
}

impl Default for ZerothOptions {
    fn default() -> Self {
        Self {
            source_points: 24,
            t0: 0.5,
            out_points: 8,
            out_fraction: 4.0,
            xi_stride: 8,
            h_rel: 4e-3,
            tail_rel: 0.1,
        }
    }
}

/// `x0` on a `tau x xi` grid with its source and weighted norms.
#[derive(Debug, Clone, Serialize)]
pub struct ZerothIterate {
    pub nu: f64,
    pub source: SourceSample,
    pub tau_grid: Vec<f64>,
    pub xi_grid: Vec<f64>,
    pub values: Vec<Vec<UValue>>,
    /// `||x0(tau, .)||` in `L^{2, alpha}_rho` per output time.
    pub alpha: f64,
    pub norms: Vec<f64>,
    /// Log-log slope of `norms` in `tau`.
    pub norm_slope: f64,
}

/// `lambda^-2 R^(1/2) e~(t, R / lambda)` on the basis grid at `tau`.
pub fn residual_slice(approx: &ApproxSolution, basis: &SpectralBasis, tau: f64, h_rel: f64) -> Result<Vec<f64>> {
    let p = &approx.params;
    let t = p.t_of_tau(tau);
    let lambda = p.lambda(t);
    let a_cut = approx.a_max().min(1.0) * (1.0 - 2.0 * h_rel);
    if a_cut * t * lambda >= basis.r_max() {
        return Err(Error::contract(format!(
            "light cone R = {} at tau = {tau} exceeds the transform domain {}",
            t * lambda,
            basis.r_max()
        )));
    }
    basis
        .r_grid
        .iter()
        .map(|&big_r| {
            let r = big_r / lambda;
            if big_r == 0.0 || r > a_cut * t {
                return Ok(0.0);
            }
            Ok(big_r.sqrt() * approx.residual(t, r, h_rel)? / (lambda * lambda))
        })
        .collect()
}

/// The transformed, cone-truncated residual as a parametrix source.
pub fn residual_source(approx: &ApproxSolution, basis: &SpectralBasis, taus: &[f64], h_rel: f64) -> Result<SourceSample> {
    let rows: Vec<SpectralCoefficients> = taus
        .par_iter()
        .map(|&tau| basis.forward_samples(&residual_slice(approx, basis, tau, h_rel)?))
        .collect::<Result<_>>()?;
    let values: Vec<Vec<f64>> = rows.into_iter().map(|c| c.values).collect();
    let maxes: Vec<f64> = values.iter().map(|r| r.iter().fold(0.0f64, |m, v| m.max(v.abs()))).collect();
    let n = taus.len();
    let s = n / 2;
    let slope = loglog_slope(&taus[s..], &maxes[s..])?.0;
    let decay = -slope;
    if !(decay > 2.0) {
        return Err(Error::InsufficientData(format!(
            "residual source decays like tau^{slope:.2}; the parametrix tail needs faster than tau^-2"
        )));
    }
    SourceSample::new(taus.to_vec(), basis.tables.xi_grid.clone(), values, decay)
}

pub fn zeroth_iterate(
    approx: &ApproxSolution,
    basis: &SpectralBasis,
    parametrix: &Parametrix,
    opts: &ZerothOptions,
) -> Result<ZerothIterate> {
    let p = &approx.params;
    let tau0 = p.tau(opts.t0);
    // tau lambda(t) = nu tau, so the cone fills the domain at tau = R_max / nu.
    let a_cut = approx.a_max().min(1.0) * (1.0 - 2.0 * opts.h_rel);
    let tau_top = 0.99 * basis.r_max() / (p.nu * a_cut);
    if tau_top <= 2.0 * opts.out_fraction * tau0 {
        return Err(Error::contract(format!(
            "t0 = {} leaves too short a tau range before the cone leaves the transform domain",
            opts.t0
        )));
    }
    let taus = log_grid(tau0, tau_top, opts.source_points);
    let source = residual_source(approx, basis, &taus, opts.h_rel)?;
    let out_taus = log_grid(tau0, tau_top / opts.out_fraction, opts.out_points);
    let xis: Vec<f64> = basis.tables.xi_grid.iter().step_by(opts.xi_stride.max(1)).copied().collect();
    let mut u = parametrix.clone();
    u.options.tail_rel = opts.tail_rel;
    let values = u.apply_grid(&source, &out_taus, &xis)?;

    let alpha = 0.5 + p.nu / 2.0 - 0.05;
    let norms: Vec<f64> = values
        .iter()
        .map(|row| weighted_norm(&xis, row, alpha, &parametrix.rho))
        .collect();
    let norm_slope = loglog_slope(&out_taus, &norms)?.0;
    Ok(ZerothIterate {
        nu: p.nu,
        source,
        tau_grid: out_taus,
        xi_grid: xis,
        values,
        alpha,
        norms,
        norm_slope,
    })
}

/// `(∫ |x|^2 <xi>^(2 alpha) rho dxi)^(1/2)` by the trapezoid rule in `log xi`
/// on the output grid.
fn weighted_norm(xis: &[f64], row: &[UValue], alpha: f64, rho: &super::apply::RhoModel) -> f64 {
    let lx: Vec<f64> = xis.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = xis
        .iter()
        .zip(row)
        .map(|(&xi, u)| u.value.powi(2) * (1.0 + xi * xi).powf(alpha) * rho.eval(xi) * xi)
        .collect();
    crate::numerics::quad::trapezoid(&lx, &y).sqrt()
}

impl ZerothIterate {
    /// Long-format CSV: `tau, xi, value, tail`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["tau", "xi", "value", "tail"])?;
        for (tau, row) in self.tau_grid.iter().zip(&self.values) {
            for (xi, u) in self.xi_grid.iter().zip(row) {
                w.write_record([tau, xi, &u.value, &u.tail].map(|v| format!("{v:e}")))?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}
