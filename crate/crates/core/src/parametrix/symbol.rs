//! The oscillator symbol `S(tau, sigma, xi)`:
//! `d_tau^2 S + lambda(tau)^-2 xi S = 0`, `S = 0` and `d_tau S = -1` at `tau = sigma`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::model::BlowupParams;
use crate::numerics::ode::{self, OdeOptions, Trajectory};

#[derive(Debug, Clone, Copy)]
pub struct SymbolS {
    pub params: BlowupParams,
    pub rtol: f64,
    pub atol: f64,
}

/// `S(tau, ., xi)` for a fixed `tau` as a dense function of `sigma >= tau`.
///
/// As a function of `sigma`, `S` solves the same equation with `S = 0` and
/// `d_sigma S = 1` at `sigma = tau`.
#[derive(Debug, Clone)]
pub struct SymbolRow {
    pub tau: f64,
    pub xi: f64,
    trajectory: Option<Trajectory<2>>,
}

impl SymbolRow {
    pub fn eval(&self, sigma: f64) -> f64 {
        match &self.trajectory {
            Some(t) => t.eval_pair(sigma, 0, 1).0,
            None => sigma - self.tau,
        }
    }
}

impl SymbolS {
    pub fn new(params: BlowupParams, tol: &Tolerances) -> Self {
        Self {
            params,
            rtol: tol.ode_rel,
            atol: tol.ode_abs,
        }
    }

    /// `lambda(tau)^-2`.
    pub fn potential(&self, tau: f64) -> f64 {
        self.params.lambda_of_tau(tau).powi(-2)
    }

    fn options(&self, xi: f64, tau: f64) -> OdeOptions {
        let mut o = OdeOptions::new(self.rtol, self.atol);
        // A few steps per local period at the fast (small tau) end.
        let omega = (xi * self.potential(tau)).sqrt();
        if omega > 0.0 {
            o.h_max = 0.5 / omega;
        }
        o
    }

    fn check(&self, tau: f64, sigma: f64, xi: f64) -> Result<()> {
        if !(tau > 0.0) || !(xi >= 0.0) || !sigma.is_finite() {
            return Err(Error::contract("symbol needs tau > 0, xi >= 0"));
        }
        if tau > sigma {
            return Err(Error::contract(format!(
                "symbol evaluated with tau = {tau} > sigma = {sigma}; only the retarded direction is defined"
            )));
        }
        Ok(())
    }

    /// `(S, d_tau S)` by integrating from `sigma` down to `tau`.
    pub fn eval(&self, tau: f64, sigma: f64, xi: f64) -> Result<(f64, f64)> {
        self.check(tau, sigma, xi)?;
        if xi == 0.0 {
            return Ok((sigma - tau, -1.0));
        }
        if tau == sigma {
            return Ok((0.0, -1.0));
        }
        let p = *self;
        let f = move |s: f64, y: &[f64; 2]| [y[1], -xi * p.potential(s) * y[0]];
        let y = ode::solve(f, sigma, [0.0, -1.0], tau, self.options(xi, tau))?;
        Ok((y[0], y[1]))
    }

    /// `S` through the scaling law, from the `xi = 1` symbol.
    pub fn eval_scaled(&self, tau: f64, sigma: f64, xi: f64) -> Result<f64> {
        self.check(tau, sigma, xi)?;
        if xi == 0.0 {
            return Ok(sigma - tau);
        }
        let c = xi.powf(-self.params.nu / 2.0);
        Ok(self.eval(tau * c, sigma * c, 1.0)?.0 / c)
    }

    /// `sigma -> S(tau, sigma, xi)` on `[tau, sigma_max]` from one forward solve.
    pub fn row(&self, tau: f64, xi: f64, sigma_max: f64) -> Result<SymbolRow> {
        self.check(tau, sigma_max, xi)?;
        if xi == 0.0 || sigma_max == tau {
            return Ok(SymbolRow {
                tau,
                xi,
                trajectory: None,
            });
        }
        let p = *self;
        let f = move |s: f64, y: &[f64; 2]| [y[1], -xi * p.potential(s) * y[0]];
        let t = ode::solve_dense(f, tau, [0.0, 1.0], sigma_max, self.options(xi, tau))?;
        Ok(SymbolRow {
            tau,
            xi,
            trajectory: Some(t),
        })
    }

    /// Envelope of the bound `|S| <~ sigma (sigma/tau)^C (1 + tau^(-2/nu) xi)^(-1/2)`
    /// without the `(sigma/tau)^C` factor.
    pub fn bound_envelope(&self, tau: f64, sigma: f64, xi: f64) -> f64 {
        sigma / (1.0 + tau.powf(-2.0 / self.params.nu) * xi).sqrt()
    }

    /// Largest sampled `|S| / (envelope (sigma/tau)^c)` for a given `c`.
    pub fn max_ratio_with(&self, c: f64, sample: &BoundSample) -> Result<f64> {
        let mut m = 0.0f64;
        for (tau, sigma, xi) in sample.triples() {
            let s = self.eval(tau, sigma, xi)?.0;
            m = m.max(s.abs() / (self.bound_envelope(tau, sigma, xi) * (sigma / tau).powf(c)));
        }
        Ok(m)
    }

    /// Empirical check of the symbol bounds on a Latin-hypercube sample.
    pub fn bound_check(&self, sample: &BoundSample) -> Result<BoundReport> {
        let triples = sample.triples();
        let mut logs = Vec::with_capacity(triples.len());
        let mut max_dtau = 0.0f64;
        let mut max_dtau_ratio_log = 0.0f64;
        for &(tau, sigma, xi) in &triples {
            let (s, ds) = self.eval(tau, sigma, xi)?;
            let q = (sigma / tau).ln();
            logs.push((q, (s.abs() / self.bound_envelope(tau, sigma, xi)).ln()));
            max_dtau = max_dtau.max(ds.abs());
            if q > 0.0 {
                max_dtau_ratio_log = max_dtau_ratio_log.max(ds.abs().ln() / q);
            }
        }
        // Smallest C making every ratio at most one, ignoring sigma = tau.
        let c = logs
            .iter()
            .filter(|(q, _)| *q > 1e-3)
            .map(|(q, l)| l / q)
            .fold(0.0f64, f64::max);
        // Report the ratio with C rounded up to the next quarter.
        let c_report = (c * 4.0).ceil() / 4.0;
        let max_ratio = logs
            .iter()
            .map(|(q, l)| (l - c_report * q).exp())
            .fold(0.0f64, f64::max);
        Ok(BoundReport {
            samples: triples.len(),
            fitted_c: c,
            reported_c: c_report,
            max_ratio,
            max_dtau,
            dtau_exponent: max_dtau_ratio_log,
        })
    }
}

/// Latin-hypercube sample of `(tau, sigma, xi)` with `tau <= sigma`, drawn in
/// `log tau`, `log(sigma/tau)` and `log xi`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundSample {
    pub n: usize,
    pub seed: u64,
    pub tau: (f64, f64),
    pub ratio_max: f64,
    pub xi: (f64, f64),
}

impl BoundSample {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            seed,
            tau: (1.0, 10.0),
            ratio_max: 8.0,
            xi: (1e-3, 1e3),
        }
    }

    pub fn triples(&self) -> Vec<(f64, f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let n = self.n;
        let strata = |rng: &mut ChaCha8Rng| {
            let mut v: Vec<f64> = (0..n).map(|i| (i as f64 + rng.gen::<f64>()) / n as f64).collect();
            v.shuffle(rng);
            v
        };
        let (u1, u2, u3) = (strata(&mut rng), strata(&mut rng), strata(&mut rng));
        let lerp = |(a, b): (f64, f64), u: f64| (a.ln() + u * (b.ln() - a.ln())).exp();
        (0..n)
            .map(|i| {
                let tau = lerp(self.tau, u1[i]);
                let sigma = tau * lerp((1.0, self.ratio_max), u2[i]);
                (tau, sigma, lerp(self.xi, u3[i]))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundReport {
    pub samples: usize,
    /// Smallest `C` for which every sampled ratio is at most one.
    pub fitted_c: f64,
    pub reported_c: f64,
    /// Largest `|S| / (sigma (sigma/tau)^C (1 + tau^(-2/nu) xi)^(-1/2))` at `reported_c`.
    pub max_ratio: f64,
    pub max_dtau: f64,
    /// Smallest `C'` with `|d_tau S| <= (sigma/tau)^C'` on the sample.
    pub dtau_exponent: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symbol() -> SymbolS {
        SymbolS::new(BlowupParams::new(0.5).unwrap(), &Tolerances::default())
    }

    #[test]
    fn cauchy_data() {
        let s = symbol();
        for xi in [0.0, 0.3, 50.0] {
            assert_eq!(s.eval(2.0, 2.0, xi).unwrap(), (0.0, -1.0));
        }
    }

    #[test]
    fn forward_direction_rejected() {
        assert!(symbol().eval(3.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn row_matches_direct_solve() {
        let s = symbol();
        let row = s.row(1.5, 7.0, 6.0).unwrap();
        for sigma in [1.7, 2.5, 5.9] {
            let direct = s.eval(1.5, sigma, 7.0).unwrap().0;
            assert!((row.eval(sigma) - direct).abs() < 1e-8 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn latin_hypercube_fills_every_stratum() {
        let t = BoundSample::new(50, 3).triples();
        let mut bins = [0usize; 50];
        for (tau, _, _) in &t {
            let u = tau.ln() / 10f64.ln();
            bins[((u * 50.0) as usize).min(49)] += 1;
        }
        assert!(bins.iter().all(|&b| b == 1));
    }
}
