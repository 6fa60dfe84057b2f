//! The approximate solution `u_k = Q + v1 + v2` as a callable evaluator.

use serde::Serialize;

use super::first::{far_field_fit, first_correction, first_error_expansion, ErrorCoefficients};
use super::lbeta::LbetaOptions;
use super::second::{second_correction, SecondCorrection, SecondCorrectionSummary};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::model::{ground_state, BlowupParams, RadialProfile};
use crate::numerics::spline::CubicSpline;
use crate::numerics::{log_grid, LinearFit};

/// `(t lambda)^2 v1` as a smooth function of `R`: cubic spline in `log R`
/// on the grid, `R^3` scaling below it, `d1 R log R + d2 R` above it.
#[derive(Debug, Clone)]
pub struct FirstCorrectionEvaluator {
    pub profile: RadialProfile,
    pub far_fit: LinearFit,
    spline: CubicSpline,
}

impl FirstCorrectionEvaluator {
    pub fn new(profile: RadialProfile) -> Result<Self> {
        let hi = *profile.grid.last().expect("nonempty profile");
        let far_fit = far_field_fit(&profile, hi / 10.0, hi)?;
        let x: Vec<f64> = profile.grid.iter().map(|r| r.ln()).collect();
        let spline = CubicSpline::new(&x, &profile.values)?;
        Ok(Self {
            profile,
            far_fit,
            spline,
        })
    }

    pub fn eval(&self, big_r: f64) -> f64 {
        if big_r < 0.0 {
            return -self.eval(-big_r);
        }
        let g = &self.profile;
        let (lo, hi) = (g.grid[0], g.grid[g.len() - 1]);
        if big_r == 0.0 {
            0.0
        } else if big_r < lo {
            g.values[0] * (big_r / lo).powi(3)
        } else if big_r > hi {
            let c = &self.far_fit.coefficients;
            c[0] * big_r * big_r.ln() + c[1] * big_r
        } else {
            self.spline.eval(big_r.ln())
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AssemblySummary {
    pub nu: f64,
    pub order: usize,
    pub far_field: Option<LinearFit>,
    pub error_coefficients: Option<ErrorCoefficients>,
    pub second: Option<SecondCorrectionSummary>,
}

/// Approximate blow-up solution of order `k <= 2`.
#[derive(Debug, Clone)]
pub struct ApproxSolution {
    pub params: BlowupParams,
    pub order: usize,
    pub v1: Option<FirstCorrectionEvaluator>,
    pub error_coefficients: Option<ErrorCoefficients>,
    pub second: Option<SecondCorrection>,
}

/// Build `u_k` for `k in {0, 1, 2}`.
pub fn assemble(params: BlowupParams, order: usize, tol: &Tolerances) -> Result<ApproxSolution> {
    if order > 2 {
        return Err(Error::contract(format!("order {order} not implemented; at most 2")));
    }
    let nu = params.nu;
    let mut out = ApproxSolution {
        params,
        order,
        v1: None,
        error_coefficients: None,
        second: None,
    };
    if order == 0 {
        return Ok(out);
    }
    let grid = log_grid(tol.grid_r_min, tol.grid_r_max, tol.grid_points);
    let v1 = first_correction(nu, &grid, tol)?;
    if order == 2 {
        let e1 = first_error_expansion(nu, &v1, None)?;
        let c = e1.coefficients.c;
        out.second = Some(second_correction(nu, c, &LbetaOptions::from_tolerances(tol))?);
        out.error_coefficients = Some(e1.coefficients);
    }
    out.v1 = Some(FirstCorrectionEvaluator::new(v1)?);
    Ok(out)
}

impl ApproxSolution {
    /// Largest `r / t` where the evaluator is defined.
    pub fn a_max(&self) -> f64 {
        self.second.as_ref().map_or(f64::INFINITY, |s| s.a_max())
    }

    /// `u_k(t, r) - Q(lambda(t) r)`.
    pub fn correction(&self, t: f64, r: f64) -> Result<f64> {
        let mut c = 0.0;
        if let Some(v1) = &self.v1 {
            let big_r = self.params.lambda(t) * r;
            c += t.powf(2.0 * self.params.nu) * v1.eval(big_r);
        }
        if let Some(s) = &self.second {
            c += s.v2(t, r)?;
        }
        Ok(c)
    }

    /// `u_k(t, r)`; odd in `r`.
    pub fn eval(&self, t: f64, r: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::contract("evaluation time must be positive"));
        }
        Ok(ground_state(self.params.lambda(t) * r) + self.correction(t, r)?)
    }

    /// `u_tt - u_rr - u_r/r + sin(2u)/(2r^2)` by central differences with
    /// steps `h_rel * t` and `h_rel * r`.
    pub fn residual(&self, t: f64, r: f64, h_rel: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::contract("residual needs r > 0"));
        }
        let (ht, hr) = (h_rel * t, h_rel * r);
        let u = self.eval(t, r)?;
        let utt = (self.eval(t + ht, r)? - 2.0 * u + self.eval(t - ht, r)?) / (ht * ht);
        let (up, um) = (self.eval(t, r + hr)?, self.eval(t, r - hr)?);
        let urr = (up - 2.0 * u + um) / (hr * hr);
        let ur = (up - um) / (2.0 * hr);
        Ok(utt - urr - ur / r + (2.0 * u).sin() / (2.0 * r * r))
    }

    pub fn summary(&self) -> AssemblySummary {
        AssemblySummary {
            nu: self.params.nu,
            order: self.order,
            far_field: self.v1.as_ref().map(|v| v.far_fit.clone()),
            error_coefficients: self.error_coefficients.clone(),
            second: self.second.as_ref().map(|s| s.summary()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_zero_is_the_ground_state() {
        let p = BlowupParams::new(0.5).unwrap();
        let u = assemble(p, 0, &Tolerances::default()).unwrap();
        for (t, r) in [(0.1, 0.01), (0.5, 0.3), (0.2, 5.0)] {
            assert_eq!(u.eval(t, r).unwrap(), ground_state(p.lambda(t) * r));
        }
    }

    #[test]
    fn order_three_rejected() {
        let p = BlowupParams::new(0.5).unwrap();
        assert!(assemble(p, 3, &Tolerances::default()).is_err());
    }
}
