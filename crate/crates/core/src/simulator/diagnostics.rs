//! Concentration scale, rate fit and local error energy of a simulated field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ground_state, ground_state_slope, radial_derivative, WaveField, HALF_PI};
use crate::numerics::least_squares;

/// `1 / r*` with `r*` the smallest radius where `u` crosses `pi/2`, by linear
/// interpolation. The axis value `u(0) = 0` counts as the first node.
pub fn extract_lambda(field: &WaveField) -> Result<f64> {
    let mut prev = (0.0, 0.0);
    for (&r, &u) in field.r.iter().zip(&field.u) {
        let (r0, u0) = prev;
        if (u0 - HALF_PI) * (u - HALF_PI) <= 0.0 && u != u0 {
            let r_star = r0 + (HALF_PI - u0) * (r - r0) / (u - u0);
            return Ok(1.0 / r_star);
        }
        prev = (r, u);
    }
    Err(Error::NoCrossing)
}

/// `(t, lambda_est)` pairs along a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RateSeries {
    pub t: Vec<f64>,
    pub lambda: Vec<f64>,
}

/// `lambda ≈ amplitude t^-p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub p: f64,
    pub amplitude: f64,
    /// RMS residual of the fit in `log lambda`.
    pub residual: f64,
    pub samples: usize,
    /// `max t / min t` over the fitted samples.
    pub span: f64,
}

pub const MIN_RATE_SAMPLES: usize = 8;
pub const MIN_RATE_SPAN: f64 = 4.0;

impl RateSeries {
    pub fn push(&mut self, t: f64, lambda: f64) {
        self.t.push(t);
        self.lambda.push(lambda);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn span(&self) -> f64 {
        let (lo, hi) = self.t.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &t| (lo.min(t), hi.max(t)));
        hi / lo
    }

    /// Samples with `t` in `[lo, hi]`.
    pub fn window(&self, lo: f64, hi: f64) -> RateSeries {
        let mut out = RateSeries::default();
        for (&t, &l) in self.t.iter().zip(&self.lambda) {
            if t >= lo && t <= hi {
                out.push(t, l);
            }
        }
        out
    }

    /// True when `lambda` increases at every step toward `t = 0`.
    pub fn monotone(&self) -> bool {
        self.t
            .windows(2)
            .zip(self.lambda.windows(2))
            .all(|(t, l)| (t[1] - t[0]) * (l[1] - l[0]) < 0.0)
    }
}

/// Least squares of `log lambda` against `log t`.
pub fn rate_fit(series: &RateSeries) -> Result<RateFit> {
    let n = series.len();
    if n < MIN_RATE_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "rate fit needs {MIN_RATE_SAMPLES} samples, got {n}"
        )));
    }
    let span = series.span();
    if !(span >= MIN_RATE_SPAN) {
        return Err(Error::InsufficientData(format!(
            "rate fit needs t to span a factor {MIN_RATE_SPAN}, got {span:.3}"
        )));
    }
    if series.t.iter().chain(&series.lambda).any(|v| !(*v > 0.0)) {
        return Err(Error::contract("rate series must be positive"));
    }
    let x: Vec<f64> = series.t.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = series.lambda.iter().map(|l| l.ln()).collect();
    let one = |_: f64| 1.0;
    let id = |x: f64| x;
    let fit = least_squares(&[&one, &id], &x, &y)?;
    Ok(RateFit {
        p: -fit.coefficients[1],
        amplitude: fit.coefficients[0].exp(),
        residual: fit.residual_rms,
        samples: n,
        span,
    })
}

/// Energy of `eps = u - Q(lambda_est r)` inside `r < cone_factor |t|`:
/// `∫ (eps_t^2 + eps_r^2 + eps^2 / r^2) r dr`, with
/// `eps_t = u_t - d_t Q(lambda(t) r)` for `lambda = A t^-p`.
pub fn local_error_energy(field: &WaveField, lambda_est: f64, p: f64, cone_factor: f64) -> Result<f64> {
    let t = field.t;
    if !(lambda_est * t.abs() > 1.0) {
        return Err(Error::contract(format!(
            "local energy needs lambda t > 1 (concentration inside the cone), got {}",
            lambda_est * t.abs()
        )));
    }
    let eps: Vec<f64> = field
        .r
        .iter()
        .zip(&field.u)
        .map(|(&r, &u)| u - ground_state(lambda_est * r))
        .collect();
    let eps_r = radial_derivative(&field.r, &eps);
    let lambda_dot = -p * lambda_est / t;
    let limit = cone_factor * t.abs();
    let mut rs = vec![0.0];
    let mut density = vec![0.0];
    for i in 0..field.r.len() {
        let r = field.r[i];
        if r > limit {
            break;
        }
        let et = field.ut[i] - lambda_dot * r * ground_state_slope(lambda_est * r);
        rs.push(r);
        density.push((et * et + eps_r[i] * eps_r[i] + (eps[i] / r).powi(2)) * r);
    }
    if rs.len() < 3 {
        return Err(Error::GridTooCoarse("fewer than two nodes inside the cone".into()));
    }
    Ok(crate::numerics::quad::trapezoid(&rs, &density))
}
