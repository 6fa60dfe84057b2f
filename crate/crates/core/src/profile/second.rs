//! Second correction `v2 = w2 + w~2` from four self-similar solves.
//!
//! With `P = t^2 (-d_tt + d_rr + d_r / r - 1/r^2)` one has
//! `P(t^beta (W1 log R + W0)) = t^beta (log R L_beta W1 + L_beta W0 + F_beta W1)`,
//! where the cross terms are
//! `F_beta W = (1+nu)(2 beta - 1) W + (2/a - 2(1+nu) a) W'`.
//! Matching the leading large-`R` part of `t^2 e1` gives
//!
//! ```text
//!   L_nu  W1 = a c1        L_nu  W0 = a c2 - F_nu W1
//!   L_2nu W~1 = c3         L_2nu W~0 = c4 - F_2nu W~1
//! ```

use std::sync::Arc;

use serde::Serialize;

use super::lbeta::{solve_lbeta, LbetaOptions, Parity, Rhs, SelfSimilarSolution};
use crate::error::{Error, Result};

/// `F_beta W` as an `Rhs`, Taylor coefficients included.
pub fn coupling(nu: f64, sol: &SelfSimilarSolution) -> Rhs {
    let beta = sol.beta;
    let amp = (1.0 + nu) * (2.0 * beta - 1.0);
    let w = &sol.series;
    let n = w.len().saturating_sub(2);
    let taylor = (0..n)
        .map(|m| amp * w[m] + 2.0 * (m + 2) as f64 * w[m + 2] - 2.0 * (1.0 + nu) * m as f64 * w[m])
        .collect::<Vec<_>>();
    let at_zero = taylor.first().copied().unwrap_or(0.0);
    let s = Arc::new(sol.clone());
    Rhs::new(taylor, move |a| {
        if a == 0.0 {
            return at_zero;
        }
        let (v, dv) = s.eval(a);
        amp * v + (2.0 / a - 2.0 * (1.0 + nu) * a) * dv
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SecondCorrectionSummary {
    pub nu: f64,
    pub coefficients: [f64; 4],
    pub w1_a3: f64,
    pub w0_a3: f64,
    pub wt1_a2: f64,
    pub wt0_a2: f64,
}

#[derive(Debug, Clone)]
pub struct SecondCorrection {
    pub nu: f64,
    pub coefficients: [f64; 4],
    /// `W2^1`, `W2^0` (`beta = nu`, odd, `~ a^3`).
    pub w1: SelfSimilarSolution,
    pub w0: SelfSimilarSolution,
    /// `W~2^1`, `W~2^0` (`beta = 2 nu`, even, `~ a^2`).
    pub wt1: SelfSimilarSolution,
    pub wt0: SelfSimilarSolution,
    /// Right-hand sides in the same order.
    pub rhs: [Rhs; 4],
}

/// Solve the four matched systems for the fitted `c1..c4`.
pub fn second_correction(nu: f64, c: [f64; 4], opts: &LbetaOptions) -> Result<SecondCorrection> {
    if !(nu > 0.0) {
        return Err(Error::contract("nu must be positive"));
    }
    let odd = |k: f64| Rhs::polynomial(vec![0.0, k]);
    let r_w1 = odd(c[0]);
    let w1 = solve_lbeta(nu, &r_w1, Parity::Odd, 3, opts)?;
    let r_w0 = odd(c[1]).add(&coupling(nu, &w1).scaled(-1.0));
    let w0 = solve_lbeta(nu, &r_w0, Parity::Odd, 3, opts)?;
    let r_wt1 = Rhs::polynomial(vec![c[2]]);
    let wt1 = solve_lbeta(2.0 * nu, &r_wt1, Parity::Even, 2, opts)?;
    let r_wt0 = Rhs::polynomial(vec![c[3]]).add(&coupling(nu, &wt1).scaled(-1.0));
    let wt0 = solve_lbeta(2.0 * nu, &r_wt0, Parity::Even, 2, opts)?;
    Ok(SecondCorrection {
        nu,
        coefficients: c,
        w1,
        w0,
        wt1,
        wt0,
        rhs: [r_w1, r_w0, r_wt1, r_wt0],
    })
}

impl SecondCorrection {
    pub fn a_max(&self) -> f64 {
        self.w1.a_max()
    }

    fn cone(&self, t: f64, r: f64) -> Result<(f64, f64)> {
        let a = r / t;
        if !(t > 0.0) || a.abs() > self.a_max() {
            return Err(Error::OutsideCone {
                t,
                r,
                a,
                limit: self.a_max(),
            });
        }
        Ok((a, t.powf(-1.0 - self.nu) * r))
    }

    /// `w2 = t^nu (W2^1(a) log(1+R^2)/2 + W2^0(a))`.
    pub fn w2(&self, t: f64, r: f64) -> Result<f64> {
        let (a, big_r) = self.cone(t, r)?;
        let l = 0.5 * big_r.mul_add(big_r, 1.0).ln();
        Ok(t.powf(self.nu) * (self.w1.value(a) * l + self.w0.value(a)))
    }

    /// `w~2 = t^(2 nu) R/sqrt(1+R^2) (W~2^1(a) log(1+R^2)/2 + W~2^0(a))`.
    pub fn w2_tilde(&self, t: f64, r: f64) -> Result<f64> {
        let (a, big_r) = self.cone(t, r)?;
        let s = big_r.mul_add(big_r, 1.0);
        let l = 0.5 * s.ln();
        Ok(t.powf(2.0 * self.nu) * big_r / s.sqrt() * (self.wt1.value(a) * l + self.wt0.value(a)))
    }

    pub fn v2(&self, t: f64, r: f64) -> Result<f64> {
        Ok(self.w2(t, r)? + self.w2_tilde(t, r)?)
    }

    /// Large-`R` form `t^nu (W1 log R + W0) + t^(2 nu) (W~1 log R + W~0)`
    /// that the matched systems are derived for.
    pub fn v2_log_form(&self, t: f64, r: f64) -> Result<f64> {
        let (a, big_r) = self.cone(t, r)?;
        let l = big_r.abs().ln();
        Ok(t.powf(self.nu) * (self.w1.value(a) * l + self.w0.value(a))
            + t.powf(2.0 * self.nu) * (self.wt1.value(a) * l + self.wt0.value(a)))
    }

    pub fn summary(&self) -> SecondCorrectionSummary {
        SecondCorrectionSummary {
            nu: self.nu,
            coefficients: self.coefficients,
            w1_a3: self.w1.series[3],
            w0_a3: self.w0.series[3],
            wt1_a2: self.wt1.series[2],
            wt0_a2: self.wt0.series[2],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SecondCorrection {
        second_correction(0.5, [1.3, -0.4, 0.7, 0.2], &LbetaOptions::default()).unwrap()
    }

    #[test]
    fn vanishes_on_the_axis() {
        let s = sample();
        for t in [0.01, 0.3, 1.0] {
            assert_eq!(s.w2(t, 0.0).unwrap(), 0.0);
            assert_eq!(s.w2_tilde(t, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn outside_cone_is_rejected() {
        let s = sample();
        assert!(matches!(s.v2(0.1, 0.1), Err(Error::OutsideCone { .. })));
    }

    #[test]
    fn odd_in_r() {
        let s = sample();
        for r in [0.01, 0.05, 0.09] {
            let p = s.v2(0.1, r).unwrap();
            let m = s.v2(0.1, -r).unwrap();
            assert!((p + m).abs() <= 1e-14 * p.abs().max(1.0));
        }
    }

    #[test]
    fn coupling_taylor_matches_pointwise() {
        let s = sample();
        for sol in [&s.w1, &s.wt1] {
            let f = coupling(0.5, sol);
            let a: f64 = 0.01;
            let series: f64 = f.taylor.iter().enumerate().map(|(k, c)| c * a.powi(k as i32)).sum();
            assert!((series - f.eval(a)).abs() < 1e-12 * f.eval(a).abs().max(1e-3));
        }
    }
}
