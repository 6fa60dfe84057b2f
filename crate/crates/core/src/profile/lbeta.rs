//! Regular solutions of the self-similar family
//!
//! ```text
//!   L_beta W = (1 - a^2) W'' + (1/a + 2 a beta - 2 a) W' + (-beta^2 + beta - 1/a^2) W = rhs(a)
//! ```
//!
//! on `[0, 1 - delta]`. `a = 0` is a regular singular point with exponents
//! `±1`; the regular solution is launched from a Frobenius series and handed to
//! the adaptive integrator at `a_switch`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::numerics::ode::{self, OdeOptions, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Right-hand side: Taylor coefficients at `a = 0` (index = power) and a
/// pointwise evaluator used beyond the series region.
#[derive(Clone)]
pub struct Rhs {
    pub taylor: Vec<f64>,
    pub func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for Rhs {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Rhs").field("taylor", &self.taylor).finish_non_exhaustive()
    }
}

impl Rhs {
    pub fn new(taylor: Vec<f64>, func: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            taylor,
            func: Arc::new(func),
        }
    }

    pub fn zero() -> Self {
        Self::polynomial(vec![])
    }

    /// Polynomial `Σ c_k a^k`.
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        let c = coeffs.clone();
        Self::new(coeffs, move |a| c.iter().rev().fold(0.0, |acc, &ck| acc * a + ck))
    }

    pub fn eval(&self, a: f64) -> f64 {
        (self.func)(a)
    }

    pub fn coefficient(&self, k: usize) -> f64 {
        self.taylor.get(k).copied().unwrap_or(0.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let f = self.func.clone();
        Self::new(self.taylor.iter().map(|c| c * s).collect(), move |a| s * f(a))
    }

    pub fn add(&self, other: &Rhs) -> Self {
        let n = self.taylor.len().max(other.taylor.len());
        let taylor = (0..n).map(|k| self.coefficient(k) + other.coefficient(k)).collect();
        let (f, g) = (self.func.clone(), other.func.clone());
        Self::new(taylor, move |a| f(a) + g(a))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LbetaOptions {
    /// Series terms beyond the leading power.
    pub order: usize,
    pub a_switch: f64,
    pub delta_edge: f64,
    /// Amplitude of the regular homogeneous solution (`~ a`), odd parity only.
    pub free_coefficient: f64,
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
}

impl LbetaOptions {
    pub fn from_tolerances(tol: &Tolerances) -> Self {
        Self {
            order: tol.frobenius_order,
            a_switch: tol.a_switch,
            delta_edge: tol.delta_edge,
            free_coefficient: 0.0,
            rtol: tol.ode_rel,
            atol: tol.ode_abs,
            h_max: tol.a_max_step,
        }
    }
}

impl Default for LbetaOptions {
    fn default() -> Self {
        Self::from_tolerances(&Tolerances::default())
    }
}

/// `q(k)`: coefficient of `a^k` in `L_beta a^k` beyond the singular part;
/// `L_beta a^p = (p^2 - 1) a^(p-2) + q(p) a^p`.
fn q_coeff(beta: f64, p: f64) -> f64 {
    -(p - beta) * (p - beta + 1.0)
}

/// Frobenius coefficients (index = power) of the regular solution.
pub fn frobenius_series(
    beta: f64,
    rhs: &Rhs,
    parity: Parity,
    leading: usize,
    order: usize,
    free_coefficient: f64,
) -> Result<Vec<f64>> {
    let expected_parity = if leading % 2 == 0 { Parity::Even } else { Parity::Odd };
    if leading < 1 || expected_parity != parity {
        return Err(Error::contract(format!(
            "leading order {leading} inconsistent with {parity:?} parity"
        )));
    }
    if parity == Parity::Even && free_coefficient != 0.0 {
        return Err(Error::contract("even solutions have no regular homogeneous part"));
    }
    let top = leading + order;
    let scale = rhs
        .taylor
        .iter()
        .fold(0.0f64, |m, c| m.max(c.abs()))
        .max(f64::MIN_POSITIVE);
    // rhs must have the parity of the solution and start at a^(leading-2).
    for (k, &c) in rhs.taylor.iter().enumerate().take(top.saturating_sub(1)) {
        let wrong_parity = (k % 2 == 0) != (parity == Parity::Even);
        let too_low = k + 2 < leading;
        if (wrong_parity || too_low) && c.abs() > 1e-12 * scale {
            return Err(Error::IndicialMismatch {
                leading,
                index: k,
                value: c,
            });
        }
    }
    let mut w = vec![0.0; top + 1];
    if parity == Parity::Odd {
        w[1] = free_coefficient;
    }
    // ((k+2)^2 - 1) w_{k+2} = r_k - q(k) w_k
    let start = if parity == Parity::Odd { 1 } else { 0 };
    let mut k = start;
    while k + 2 <= top {
        let p = (k + 2) as f64;
        w[k + 2] = (rhs.coefficient(k) - q_coeff(beta, k as f64) * w[k]) / (p * p - 1.0);
        k += 2;
    }
    if parity == Parity::Odd && free_coefficient == 0.0 && leading > 3 {
        // Leading orders above 3 need the lower coefficients to vanish.
        for (j, &c) in w.iter().enumerate().take(leading) {
            if c != 0.0 {
                return Err(Error::IndicialMismatch {
                    leading,
                    index: j,
                    value: c,
                });
            }
        }
    }
    Ok(w)
}

/// Regular solution of an `L_beta` problem on `[0, 1 - delta]`.
#[derive(Debug, Clone)]
pub struct SelfSimilarSolution {
    pub beta: f64,
    pub parity: Parity,
    pub leading_order: usize,
    pub delta_edge: f64,
    pub a_switch: f64,
    /// Frobenius coefficients, index = power of `a`.
    pub series: Vec<f64>,
    trajectory: Trajectory<2>,
}

impl SelfSimilarSolution {
    pub fn a_max(&self) -> f64 {
        1.0 - self.delta_edge
    }

    /// `(W(a), W'(a))`. Values beyond `1 - delta` are clamped to the edge;
    /// negative `a` uses the parity.
    pub fn eval(&self, a: f64) -> (f64, f64) {
        if a < 0.0 {
            let (w, dw) = self.eval(-a);
            return match self.parity {
                Parity::Odd => (-w, dw),
                Parity::Even => (w, -dw),
            };
        }
        if a <= self.a_switch {
            let mut w = 0.0;
            let mut dw = 0.0;
            for (p, &c) in self.series.iter().enumerate().rev() {
                w = w * a + c;
                if p > 0 {
                    dw = dw * a + p as f64 * c;
                }
            }
            return (w, dw);
        }
        let a = a.min(self.a_max());
        self.trajectory.eval_pair(a, 0, 1)
    }

    pub fn value(&self, a: f64) -> f64 {
        self.eval(a).0
    }

    /// Tabulated `(a, W)` on `n` uniform points of `[0, 1 - delta]`.
    pub fn table(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let a: Vec<f64> = crate::numerics::linear_grid(0.0, self.a_max(), n);
        let w = a.iter().map(|&x| self.value(x)).collect();
        (a, w)
    }

    /// Second derivative from the ODE itself.
    pub fn second_derivative(&self, a: f64, rhs: &Rhs) -> f64 {
        let (w, dw) = self.eval(a);
        lbeta_second_derivative(self.beta, a, w, dw, rhs.eval(a))
    }
}

fn lbeta_second_derivative(beta: f64, a: f64, w: f64, dw: f64, rhs: f64) -> f64 {
    let p = 1.0 / a + 2.0 * a * (beta - 1.0);
    let q = -beta * beta + beta - 1.0 / (a * a);
    (rhs - p * dw - q * w) / (1.0 - a * a)
}

/// Apply `L_beta` to given `(W, W', W'')`.
pub fn apply_lbeta(beta: f64, a: f64, w: f64, dw: f64, ddw: f64) -> f64 {
    (1.0 - a * a) * ddw + (1.0 / a + 2.0 * a * beta - 2.0 * a) * dw + (-beta * beta + beta - 1.0 / (a * a)) * w
}

/// Solve `L_beta W = rhs` for the solution regular at `a = 0` with the
/// requested parity and leading power.
pub fn solve_lbeta(
    beta: f64,
    rhs: &Rhs,
    parity: Parity,
    leading: usize,
    opts: &LbetaOptions,
) -> Result<SelfSimilarSolution> {
    if !(opts.delta_edge > 0.0 && opts.delta_edge < 1.0 - opts.a_switch) {
        return Err(Error::contract("delta_edge must lie in (0, 1 - a_switch)"));
    }
    let series = frobenius_series(beta, rhs, parity, leading, opts.order, opts.free_coefficient)?;
    let a0 = opts.a_switch;
    let (mut w0, mut dw0) = (0.0, 0.0);
    for (p, &c) in series.iter().enumerate().rev() {
        w0 = w0 * a0 + c;
        if p > 0 {
            dw0 = dw0 * a0 + p as f64 * c;
        }
    }
    let rhs_c = rhs.clone();
    let f = move |a: f64, y: &[f64; 2]| [y[1], lbeta_second_derivative(beta, a, y[0], y[1], rhs_c.eval(a))];
    let a_end = 1.0 - opts.delta_edge;
    let mut ode_opts = OdeOptions::new(opts.rtol, opts.atol).with_h_max(opts.h_max);
    ode_opts.max_steps = 2_000_000;
    let trajectory = ode::solve_dense(f, a0, [w0, dw0], a_end, ode_opts)?;
    Ok(SelfSimilarSolution {
        beta,
        parity,
        leading_order: leading,
        delta_edge: opts.delta_edge,
        a_switch: a0,
        series,
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rhs_gives_zero() {
        let s = solve_lbeta(0.5, &Rhs::zero(), Parity::Odd, 3, &LbetaOptions::default()).unwrap();
        for a in [0.0, 0.01, 0.3, 0.9, 0.999] {
            assert_eq!(s.value(a), 0.0);
        }
    }

    #[test]
    fn leading_coefficients() {
        // L(w3 a^3) = 8 w3 a + ... so a*c gives w3 = c/8; L(w2 a^2) = 3 w2 + ...
        let s = frobenius_series(0.7, &Rhs::polynomial(vec![0.0, 2.0]), Parity::Odd, 3, 8, 0.0).unwrap();
        assert!((s[3] - 0.25).abs() < 1e-15);
        assert!(s.iter().step_by(2).all(|c| *c == 0.0));
        let e = frobenius_series(1.4, &Rhs::polynomial(vec![3.0]), Parity::Even, 2, 8, 0.0).unwrap();
        assert!((e[2] - 1.0).abs() < 1e-15);
        assert!(e.iter().skip(1).step_by(2).all(|c| *c == 0.0));
    }

    #[test]
    fn series_satisfies_recurrence() {
        let beta = 0.37;
        let rhs = Rhs::polynomial(vec![0.0, 1.5, 0.0, -0.4]);
        let s = frobenius_series(beta, &rhs, Parity::Odd, 3, 12, 0.0).unwrap();
        // Check L_beta applied to the truncated series at small a.
        let a: f64 = 0.02;
        let w: f64 = s.iter().enumerate().map(|(p, c)| c * a.powi(p as i32)).sum();
        let dw: f64 = s.iter().enumerate().skip(1).map(|(p, c)| p as f64 * c * a.powi(p as i32 - 1)).sum();
        let ddw: f64 = s
            .iter()
            .enumerate()
            .skip(2)
            .map(|(p, c)| (p * (p - 1)) as f64 * c * a.powi(p as i32 - 2))
            .sum();
        let lhs = apply_lbeta(beta, a, w, dw, ddw);
        assert!((lhs - rhs.eval(a)).abs() < 1e-14);
    }

    #[test]
    fn wrong_parity_rhs_is_an_indicial_mismatch() {
        let err = frobenius_series(0.5, &Rhs::polynomial(vec![1.0, 1.0]), Parity::Odd, 3, 8, 0.0).unwrap_err();
        assert!(matches!(err, Error::IndicialMismatch { index: 0, .. }));
        let err = frobenius_series(0.5, &Rhs::polynomial(vec![0.0, 1.0]), Parity::Even, 2, 8, 0.0).unwrap_err();
        assert!(matches!(err, Error::IndicialMismatch { index: 1, .. }));
    }

    #[test]
    fn parity_and_leading_must_agree() {
        assert!(frobenius_series(0.5, &Rhs::zero(), Parity::Even, 3, 8, 0.0).is_err());
    }

    #[test]
    fn negative_a_follows_parity() {
        let s = solve_lbeta(0.5, &Rhs::polynomial(vec![0.0, 1.0]), Parity::Odd, 3, &LbetaOptions::default()).unwrap();
        for a in [0.01, 0.2, 0.6] {
            assert_eq!(s.value(-a), -s.value(a));
        }
    }
}
