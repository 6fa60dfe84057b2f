//! Forward and inverse distorted Fourier transforms.
//!
//! `f^(xi) = ∫ phi(R, xi) f(R) dR` by Simpson on a uniform `R` grid;
//! `f(R) = ∫ phi(R, xi) f^(xi) rho(xi) dxi` by the trapezoid rule in
//! `log xi` plus a model of the mass of `rho` below the first grid point.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::Serialize;

use super::eigen::regular_solution;
use super::tables::SpectralTables;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::model::RadialProfile;
use crate::numerics::ode::hermite;
use crate::numerics::quad::{simpson_uniform, trapezoid};
use crate::numerics::spline::CubicSpline;
use crate::numerics::{least_squares, linear_grid};

/// `f` counts as decaying when `|f(R_max)| <= DECAY_RATIO * max |f|`.
pub const DECAY_RATIO: f64 = 1e-6;

/// `1 / (xi rho(xi)) ≈ c2 L^2 + c1 L + c0` with `L = log xi` below the grid,
/// which is `|a(xi)|^2 / xi` for `a ≈ xi^(1/2) (alpha L + beta)`.
/// `mass` is the integral of that model over `(0, xi_min)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SmallXiTail {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
    pub mass: f64,
}

impl SmallXiTail {
    /// Fit `1/(xi rho)` as a quadratic in `log xi` over the first decade.
    pub fn fit(tables: &SpectralTables) -> Result<Self> {
        let lo = tables.xi_grid[0];
        let w = tables.window(lo, 10.0 * lo);
        if w.len() < 6 {
            return Err(Error::InsufficientData("fewer than 6 points in the first xi decade".into()));
        }
        let x: Vec<f64> = tables.xi_grid[w.clone()].iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = w.map(|i| 1.0 / (tables.xi_grid[i] * tables.rho_values[i])).collect();
        let fit = least_squares(&[&|v: f64| v * v, &|v| v, &|_| 1.0], &x, &y)?;
        let (c2, c1, c0) = (fit.coefficients[0], fit.coefficients[1], fit.coefficients[2]);
        let disc = 4.0 * c2 * c0 - c1 * c1;
        if !(c2 > 0.0 && disc > 0.0) {
            return Err(Error::InsufficientData(format!(
                "small-xi tail fit {c2} L^2 + {c1} L + {c0} is not positive for all L"
            )));
        }
        // ∫_{-inf}^{L} dL / (c2 L^2 + c1 L + c0)
        let q = disc.sqrt();
        let mass = 2.0 / q * (FRAC_PI_2 + ((2.0 * c2 * lo.ln() + c1) / q).atan());
        Ok(Self { c2, c1, c0, mass })
    }

    /// Model density below the grid.
    pub fn density(&self, xi: f64) -> f64 {
        let l = xi.ln();
        1.0 / (xi * (self.c2 * l * l + self.c1 * l + self.c0))
    }
}

/// Regular eigenfunctions on a uniform `R` grid for every `xi` in a table.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    pub tables: SpectralTables,
    /// Uniform grid starting at `R = 0`.
    pub r_grid: Vec<f64>,
    /// `phi[i][j] = phi(r_grid[j], xi_i)`, and likewise `dphi`.
    pub phi: Vec<Vec<f64>>,
    pub dphi: Vec<Vec<f64>>,
    /// `phi(R, 0)` on the grid, for the small-`xi` tail.
    pub phi_zero: Vec<f64>,
    pub tail: SmallXiTail,
}

/// Transform coefficients on the basis `xi` grid.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralCoefficients {
    pub xi_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// `∫ phi(R, 0) f(R) dR`, the limit of the coefficients at `xi -> 0`.
    pub at_zero: f64,
}

fn phi_zero(r: f64) -> f64 {
    r.powf(1.5) / (1.0 + r * r)
}

impl SpectralBasis {
    pub fn new(tables: SpectralTables, tol: &Tolerances) -> Result<Self> {
        let n = tol.transform_points;
        let r_max = tol.transform_r_max;
        let r_grid = linear_grid(0.0, r_max, n);
        let cols: Vec<(Vec<f64>, Vec<f64>)> = tables
            .xi_grid
            .par_iter()
            .map(|&xi| {
                let sol = regular_solution(xi, r_max, tol)?;
                Ok(r_grid
                    .iter()
                    .map(|&r| if r == 0.0 { (0.0, 0.0) } else { sol.eval(r) })
                    .unzip())
            })
            .collect::<Result<_>>()?;
        let (phi, dphi) = cols.into_iter().unzip();
        let tail = SmallXiTail::fit(&tables)?;
        let phi_zero = r_grid.iter().map(|&r| phi_zero(r)).collect();
        Ok(Self {
            tables,
            r_grid,
            phi,
            dphi,
            phi_zero,
            tail,
        })
    }

    pub fn r_max(&self) -> f64 {
        self.r_grid[self.r_grid.len() - 1]
    }

    fn step(&self) -> f64 {
        self.r_grid[1] - self.r_grid[0]
    }

    /// Transform of samples of `f` on the basis grid.
    pub fn forward_samples(&self, f: &[f64]) -> Result<SpectralCoefficients> {
        if f.len() != self.r_grid.len() {
            return Err(Error::contract("samples must live on the basis R grid"));
        }
        let peak = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tail = f[f.len() - 1].abs();
        if !peak.is_finite() || tail > DECAY_RATIO * peak {
            return Err(Error::NonDecaying {
                tail: if peak > 0.0 { tail / peak } else { f64::INFINITY },
            });
        }
        let h = self.step();
        let quad = |p: &[f64]| {
            let prod: Vec<f64> = p.iter().zip(f).map(|(a, b)| a * b).collect();
            simpson_uniform(h, &prod)
        };
        Ok(SpectralCoefficients {
            xi_grid: self.tables.xi_grid.clone(),
            values: self.phi.par_iter().map(|p| quad(p)).collect(),
            at_zero: quad(&self.phi_zero),
        })
    }

    /// Transform of a function of `R`.
    pub fn forward<F: Fn(f64) -> f64>(&self, f: F) -> Result<SpectralCoefficients> {
        let s: Vec<f64> = self.r_grid.iter().map(|&r| f(r)).collect();
        self.forward_samples(&s)
    }

    /// Transform of a tabulated profile. Between nodes the profile is a cubic
    /// spline; below the first node it scales like `R^(3/2)`; past the last
    /// node it is zero.
    pub fn forward_transform(&self, f: &RadialProfile) -> Result<SpectralCoefficients> {
        let spline = CubicSpline::new(&f.grid, &f.values)?;
        let (lo, hi) = (f.grid[0], f.grid[f.len() - 1]);
        let peak = f.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let last = f.values[f.len() - 1].abs();
        if last > DECAY_RATIO * peak {
            return Err(Error::NonDecaying {
                tail: last / peak.max(f64::MIN_POSITIVE),
            });
        }
        self.forward(|r| {
            if r < lo {
                f.values[0] * (r / lo).powf(1.5)
            } else if r > hi {
                0.0
            } else {
                spline.eval(r)
            }
        })
    }

    /// `∫ x(xi) y(xi) rho dxi`, tail included.
    pub fn inner(&self, x: &SpectralCoefficients, y: &SpectralCoefficients) -> f64 {
        let t = &self.tables;
        let lx: Vec<f64> = t.xi_grid.iter().map(|v| v.ln()).collect();
        let integrand: Vec<f64> = (0..t.len())
            .map(|i| x.values[i] * y.values[i] * t.rho_values[i] * t.xi_grid[i])
            .collect();
        trapezoid(&lx, &integrand) + self.tail.mass * x.at_zero * y.at_zero
    }

    /// `∫ |f^|^2 rho dxi / ∫ |f|^2 dR` for samples on the basis grid.
    pub fn plancherel_ratio<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        let s: Vec<f64> = self.r_grid.iter().map(|&r| f(r)).collect();
        let c = self.forward_samples(&s)?;
        let sq: Vec<f64> = s.iter().map(|v| v * v).collect();
        Ok(self.inner(&c, &c) / simpson_uniform(self.step(), &sq))
    }

    /// Relative L2 error of `inverse(forward(f))` against `f` on `(0, 6]`.
    pub fn round_trip_error<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        let x = self.forward(&f)?;
        let grid = linear_grid(0.01, 6.0_f64.min(self.r_max()), 600);
        let back = self.inverse_transform(&x, &grid)?;
        let (mut num, mut den) = (0.0, 0.0);
        for (r, v) in grid.iter().zip(&back.values) {
            num += (v - f(*r)).powi(2);
            den += f(*r).powi(2);
        }
        Ok((num / den).sqrt())
    }

    /// `phi(R, xi_i)` by Hermite interpolation of the stored samples.
    fn phi_at(&self, i: usize, r: f64) -> f64 {
        let h = self.step();
        let j = ((r / h).floor() as usize).min(self.r_grid.len() - 2);
        let (p, d) = (&self.phi[i], &self.dphi[i]);
        hermite(self.r_grid[j], p[j], d[j], self.r_grid[j + 1], p[j + 1], d[j + 1], r).0
    }

    /// `f(R) = ∫ phi(R, xi) x(xi) rho(xi) dxi` on `r_grid`.
    pub fn inverse_transform(&self, x: &SpectralCoefficients, r_grid: &[f64]) -> Result<RadialProfile> {
        if x.values.len() != self.tables.len() {
            return Err(Error::contract("coefficients must live on the basis xi grid"));
        }
        if r_grid.iter().any(|&r| !(r > 0.0) || r > self.r_max()) {
            return Err(Error::contract(format!(
                "inverse transform grid must lie in (0, {}]",
                self.r_max()
            )));
        }
        if let Some(w) = self.decay_warning(x) {
            log::warn!("{w}");
        }
        let t = &self.tables;
        let lx: Vec<f64> = t.xi_grid.iter().map(|v| v.ln()).collect();
        let w: Vec<f64> = (0..t.len())
            .map(|i| x.values[i] * t.rho_values[i] * t.xi_grid[i])
            .collect();
        let values = r_grid
            .par_iter()
            .map(|&r| {
                let integrand: Vec<f64> = (0..t.len()).map(|i| self.phi_at(i, r) * w[i]).collect();
                trapezoid(&lx, &integrand) + self.tail.mass * x.at_zero * phi_zero(r)
            })
            .collect();
        RadialProfile::new(r_grid.to_vec(), values, 0, (0, 0))
    }

    /// Message when `x` decays too slowly for the inverse quadrature: the
    /// `alpha = 1` norm is infinite or its last-decade share exceeds 1e-3.
    pub fn decay_warning(&self, x: &SpectralCoefficients) -> Option<String> {
        let t = &self.tables;
        let total = self.norm_alpha(x, 1.0).powi(2);
        let w = t.window(t.xi_grid[t.len() - 1] / 10.0, f64::INFINITY);
        let lx: Vec<f64> = t.xi_grid[w.clone()].iter().map(|v| v.ln()).collect();
        let tail: Vec<f64> = w
            .map(|i| {
                let xi = t.xi_grid[i];
                x.values[i].powi(2) * (1.0 + xi * xi) * t.rho_values[i] * xi
            })
            .collect();
        let share = trapezoid(&lx, &tail) / total;
        if !total.is_finite() || !(share <= 1e-3) {
            Some(format!(
                "spectral coefficients decay slowly: last xi decade carries {share:.2e} of the <xi>^2-weighted norm"
            ))
        } else {
            None
        }
    }

    /// `(∫ |x|^2 <xi>^(2 alpha) rho dxi)^(1/2)` with `<xi> = (1 + xi^2)^(1/2)`.
    pub fn norm_alpha(&self, x: &SpectralCoefficients, alpha: f64) -> f64 {
        let t = &self.tables;
        let lx: Vec<f64> = t.xi_grid.iter().map(|v| v.ln()).collect();
        let integrand: Vec<f64> = (0..t.len())
            .map(|i| {
                let xi = t.xi_grid[i];
                x.values[i].powi(2) * (1.0 + xi * xi).powf(alpha) * t.rho_values[i] * xi
            })
            .collect();
        (trapezoid(&lx, &integrand) + self.tail.mass * x.at_zero.powi(2)).sqrt()
    }

    /// Relative change in `f^` from halving the `R` domain: a check that the
    /// quadrature truncation at `R_max` is harmless.
    pub fn truncation_check(&self, f: &[f64]) -> Result<f64> {
        let full = self.forward_samples(f)?;
        let half_n = self.r_grid.len() / 2 + 1;
        let h = self.step();
        let num: f64 = self
            .phi
            .iter()
            .zip(&full.values)
            .map(|(p, v)| {
                let prod: Vec<f64> = p[..half_n].iter().zip(&f[..half_n]).map(|(a, b)| a * b).collect();
                (simpson_uniform(h, &prod) - v).abs()
            })
            .fold(0.0, f64::max);
        let scale = full.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(num / scale.max(f64::MIN_POSITIVE))
    }
}

/// The `R^(3/2)`-weighted Gaussian bumps used for transform checks.
pub fn test_corpus() -> Vec<(&'static str, fn(f64) -> f64)> {
    fn g1(r: f64) -> f64 {
        r.powf(1.5) * (-r * r).exp()
    }
    fn g2(r: f64) -> f64 {
        r.powf(1.5) * (-r * r / 4.0).exp()
    }
    fn g3(r: f64) -> f64 {
        r.powf(1.5) * (-4.0 * r * r).exp()
    }
    fn g4(r: f64) -> f64 {
        r.powf(1.5) * (-(r - 2.0).powi(2)).exp()
    }
    fn g5(r: f64) -> f64 {
        r.powf(1.5) * (-(r - 3.0).powi(2) / 2.0).exp()
    }
    vec![
        ("gauss", g1 as fn(f64) -> f64),
        ("gauss_wide", g2),
        ("gauss_narrow", g3),
        ("bump_at_2", g4),
        ("bump_at_3", g5),
    ]
}
