//! The parametrix
//!
//! ```text
//!   (U f)(tau, xi) = ∫_tau^∞ (lambda(tau)/lambda(sigma))^(3/2)
//!                     (rho(xi_s) / rho(xi))^(1/2) S(tau, sigma, lambda(tau)^2 xi) f(sigma, xi_s) dsigma,
//!   xi_s = lambda(tau)^2 xi / lambda(sigma)^2,
//! ```
//!
//! truncated at the last source time with a power-law tail estimate.

use rayon::prelude::*;
use serde::Serialize;

use super::symbol::SymbolS;
use crate::error::{Error, Result};
use crate::numerics::ode::{self, OdeOptions};
use crate::numerics::quad::integrate;
use crate::numerics::{loglog_interp, loglog_slope};
use crate::spectral::{SmallXiTail, SpectralTables};

/// `rho` between and beyond the tabulated points: log-log interpolation
/// inside, the `K / (xi (log xi - b)^2)` law below, linear log-log
/// extrapolation above.
#[derive(Debug, Clone)]
pub struct RhoModel {
    pub xi: Vec<f64>,
    pub rho: Vec<f64>,
    pub tail: SmallXiTail,
}

impl RhoModel {
    pub fn new(tables: &SpectralTables) -> Result<Self> {
        Ok(Self {
            xi: tables.xi_grid.clone(),
            rho: tables.rho_values.clone(),
            tail: SmallXiTail::fit(tables)?,
        })
    }

    pub fn eval(&self, xi: f64) -> f64 {
        let lo = self.xi[0];
        if xi < lo {
            return self.rho[0] * self.tail.density(xi) / self.tail.density(lo);
        }
        loglog_interp(&self.xi, &self.rho, xi)
    }
}

/// Samples `f(sigma, xi)` on a tensor grid with a declared decay `sigma^-N`.
#[derive(Debug, Clone, Serialize)]
pub struct SourceSample {
    pub tau_grid: Vec<f64>,
    pub xi_grid: Vec<f64>,
    /// `values[i][j] = f(tau_grid[i], xi_grid[j])`.
    pub values: Vec<Vec<f64>>,
    pub decay_order: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnvelopeCheck {
    pub declared: f64,
    /// Log-log slope of `max_xi |f|` over the last `tau` decade.
    pub measured_slope: f64,
    pub consistent: bool,
}

fn increasing(v: &[f64]) -> bool {
    v.len() >= 2 && v[0] > 0.0 && v.windows(2).all(|w| w[1] > w[0])
}

impl SourceSample {
    pub fn new(tau_grid: Vec<f64>, xi_grid: Vec<f64>, values: Vec<Vec<f64>>, decay_order: f64) -> Result<Self> {
        if !increasing(&tau_grid) || !increasing(&xi_grid) {
            return Err(Error::contract("source grids must be positive and increasing"));
        }
        if values.len() != tau_grid.len() || values.iter().any(|r| r.len() != xi_grid.len()) {
            return Err(Error::contract("source values must be a tau x xi matrix"));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::contract("source values must be finite"));
        }
        if !(decay_order > 2.0) {
            return Err(Error::contract(format!(
                "declared decay order {decay_order} must exceed 2 for the tail to converge"
            )));
        }
        Ok(Self {
            tau_grid,
            xi_grid,
            values,
            decay_order,
        })
    }

    pub fn from_fn(tau_grid: Vec<f64>, xi_grid: Vec<f64>, decay_order: f64, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = tau_grid
            .iter()
            .map(|&t| xi_grid.iter().map(|&x| f(t, x)).collect())
            .collect();
        Self::new(tau_grid, xi_grid, values, decay_order)
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_grid[self.tau_grid.len() - 1]
    }

    /// Bilinear interpolation in `(log sigma, log xi)`, clamped at the grid edges.
    pub fn eval(&self, sigma: f64, xi: f64) -> f64 {
        let cell = |g: &[f64], x: f64| -> (usize, f64) {
            let n = g.len();
            if x <= g[0] {
                return (0, 0.0);
            }
            if x >= g[n - 1] {
                return (n - 2, 1.0);
            }
            let i = g.partition_point(|&v| v <= x) - 1;
            (i, (x.ln() - g[i].ln()) / (g[i + 1].ln() - g[i].ln()))
        };
        let (i, s) = cell(&self.tau_grid, sigma);
        let (j, u) = cell(&self.xi_grid, xi);
        let v = &self.values;
        (1.0 - s) * ((1.0 - u) * v[i][j] + u * v[i][j + 1]) + s * ((1.0 - u) * v[i + 1][j] + u * v[i + 1][j + 1])
    }

    /// `max_xi |f(tau, xi)|` per `tau` row.
    pub fn row_max(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|r| r.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .collect()
    }

    /// Spot check of the declared envelope on the last `tau` decade.
    pub fn check_envelope(&self) -> Result<EnvelopeCheck> {
        let hi = self.tau_max();
        let s = self.tau_grid.partition_point(|&t| t < hi / 10.0);
        let m = self.row_max();
        if self.tau_grid.len() - s < 3 {
            return Err(Error::InsufficientData("fewer than 3 tau samples on the last decade".into()));
        }
        let slope = loglog_slope(&self.tau_grid[s..], &m[s..])?.0;
        Ok(EnvelopeCheck {
            declared: self.decay_order,
            measured_slope: slope,
            consistent: slope <= -self.decay_order + 0.25,
        })
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ApplyOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// The tail estimate may not exceed `tail_rel * |U f| + tail_abs`.
    pub tail_rel: f64,
    pub tail_abs: f64,
}

impl Default for ApplyOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-9,
            tail_rel: 1e-2,
            tail_abs: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct UValue {
    pub value: f64,
    /// Bound on the neglected `sigma > tau_max` part.
    pub tail: f64,
}

/// The parametrix with its symbol and density.
#[derive(Debug, Clone)]
pub struct Parametrix {
    pub symbol: SymbolS,
    pub rho: RhoModel,
    pub options: ApplyOptions,
}

impl Parametrix {
    pub fn new(symbol: SymbolS, rho: RhoModel) -> Self {
        Self {
            symbol,
            rho,
            options: ApplyOptions::default(),
        }
    }

    fn lambda(&self, tau: f64) -> f64 {
        self.symbol.params.lambda_of_tau(tau)
    }

    /// `(lambda(tau)/lambda(sigma))^(3/2) (rho(xi_s)/rho(xi))^(1/2)` and `xi_s`.
    pub fn kernel(&self, tau: f64, sigma: f64, xi: f64) -> (f64, f64) {
        let q = self.lambda(tau) / self.lambda(sigma);
        let xs = q * q * xi;
        (q.powf(1.5) * (self.rho.eval(xs) / self.rho.eval(xi)).sqrt(), xs)
    }

    /// `sigma^2 A sigma^-N` integrated past `tau_max`, with the kernel there.
    pub fn tail_estimate(&self, f: &SourceSample, tau: f64, xi: f64) -> f64 {
        let tm = f.tau_max();
        let n = f.decay_order;
        let amp = f.row_max()[f.tau_grid.len() - 1] * tm.powf(n);
        let (k, _) = self.kernel(tau, tm, xi);
        k * amp * tm.powf(2.0 - n) / (n - 2.0)
    }

    /// `(U f)(tau, xi)` without the tail check.
    pub fn apply_truncated(&self, f: &SourceSample, tau: f64, xi: f64) -> Result<f64> {
        let tm = f.tau_max();
        if tau >= tm {
            return Ok(0.0);
        }
        let eta = self.lambda(tau).powi(2) * xi;
        let row = self.symbol.row(tau, eta, tm)?;
        let g = |s: f64| {
            let (k, xs) = self.kernel(tau, s, xi);
            k * row.eval(s) * f.eval(s, xs)
        };
        // Panels split at the tau nodes, where the bilinear interpolant kinks.
        let mut nodes: Vec<f64> = vec![tau];
        nodes.extend(f.tau_grid.iter().copied().filter(|&t| t > tau));
        let o = &self.options;
        let mut total = 0.0;
        for w in nodes.windows(2) {
            total += integrate(&g, w[0], w[1], o.abs_tol, o.rel_tol)?.value;
        }
        Ok(total)
    }

    pub fn apply_u(&self, f: &SourceSample, tau: f64, xi: f64) -> Result<UValue> {
        let value = self.apply_truncated(f, tau, xi)?;
        let tail = self.tail_estimate(f, tau, xi);
        let o = &self.options;
        let tolerance = o.tail_rel * value.abs() + o.tail_abs;
        if tail > tolerance {
            return Err(Error::TailTooLarge {
                tau_max: f.tau_max(),
                estimate: tail,
                tolerance,
            });
        }
        Ok(UValue { value, tail })
    }

    /// `U f` on a `tau x xi` grid, in parallel. The tail check runs per
    /// `tau` row against the row's largest value, so isolated zeros of the
    /// oscillating output do not trip it.
    pub fn apply_grid(&self, f: &SourceSample, taus: &[f64], xis: &[f64]) -> Result<Vec<Vec<UValue>>> {
        let rows: Vec<Vec<UValue>> = taus
            .par_iter()
            .map(|&t| {
                xis.iter()
                    .map(|&x| {
                        Ok(UValue {
                            value: self.apply_truncated(f, t, x)?,
                            tail: self.tail_estimate(f, t, x),
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let o = &self.options;
        for row in &rows {
            let scale = row.iter().fold(0.0f64, |m, u| m.max(u.value.abs()));
            let tail = row.iter().fold(0.0f64, |m, u| m.max(u.tail));
            let tolerance = o.tail_rel * scale + o.tail_abs;
            if tail > tolerance {
                return Err(Error::TailTooLarge {
                    tau_max: f.tau_max(),
                    estimate: tail,
                    tolerance,
                });
            }
        }
        Ok(rows)
    }

    /// Same quantity by a second route: along `xi_s = eta / lambda(s)^2`
    /// with `eta = lambda(tau)^2 xi`, `x = m z` with
    /// `m = lambda^(3/2) rho^(-1/2)` turns `D_tau^2 x + xi x = f` into
    /// `z'' + eta lambda^-2 z = f / m`, solved backward from `tau_max` with
    /// zero data.
    pub fn apply_by_characteristics(&self, f: &SourceSample, tau: f64, xi: f64) -> Result<f64> {
        let tm = f.tau_max();
        if tau >= tm {
            return Ok(0.0);
        }
        let eta = self.lambda(tau).powi(2) * xi;
        let m = |s: f64| {
            let l = self.lambda(s);
            l.powf(1.5) / self.rho.eval(eta / (l * l)).sqrt()
        };
        // Scaled by m(tau) so the unknown has the size of the result.
        let m_tau = m(tau);
        let rhs = |s: f64, y: &[f64; 2]| {
            let l = self.lambda(s);
            [y[1], f.eval(s, eta / (l * l)) * m_tau / m(s) - eta / (l * l) * y[0]]
        };
        let mut opts = OdeOptions::new(1e-11, 1e-15);
        let omega = (eta / self.lambda(tau).powi(2)).sqrt();
        if omega > 0.0 {
            opts.h_max = 0.5 / omega;
        }
        // Pass through every tau node so the kinks of the source land on steps.
        let mut stops: Vec<f64> = f.tau_grid.iter().copied().filter(|&t| t > tau && t < tm).rev().collect();
        stops.push(tau);
        let ys = ode::solve_at(rhs, tm, [0.0, 0.0], &stops, opts)?;
        Ok(ys[ys.len() - 1][0])
    }
}
