//! Globally adaptive Gauss–Kronrod (7/15) quadrature plus a few fixed rules
//! for sampled data.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7/K15 panel: returns (kronrod estimate, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).abs())
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Integrate `f` over `[a, b]` to `max(abs_tol, rel_tol * |I|)`.
///
/// Fails with [`Error::Quadrature`] naming the worst panel when the panel
/// budget runs out.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    const MAX_PANELS: usize = 2000;
    let (v, e) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v, err: e });
    let mut total = v;
    let mut total_err = e;
    let mut evals = 15;
    loop {
        let tol = abs_tol.max(rel_tol * total.abs());
        if total.is_finite() && total_err <= tol {
            break;
        }
        let worst = *heap.peek().expect("heap is never empty");
        if !total.is_finite() || !total_err.is_finite() || heap.len() >= MAX_PANELS || (worst.b - worst.a).abs() <= 4.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs())
        {
            return Err(Error::Quadrature {
                a: worst.a,
                b: worst.b,
                err: worst.err,
            });
        }
        heap.pop();
        let m = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk15(&f, worst.a, m);
        let (v2, e2) = gk15(&f, m, worst.b);
        evals += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: m, value: v1, err: e1 });
        heap.push(Panel { a: m, b: worst.b, value: v2, err: e2 });
    }
    // Re-sum to shed accumulated cancellation from the running updates.
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.err).sum();
    Ok(QuadResult {
        value,
        error,
        evaluations: evals,
    })
}

/// Running integral `∫_{lower}^{x_i} f` at every node of an increasing grid.
///
/// Each grid interval is integrated adaptively on its own, so the tolerances
/// apply per interval.
pub fn cumulative<F: Fn(f64) -> f64>(
    f: F,
    lower: f64,
    nodes: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(nodes.len());
    let mut acc = 0.0;
    let mut prev = lower;
    for &x in nodes {
        acc += integrate(&f, prev, x, abs_tol, rel_tol)?.value;
        out.push(acc);
        prev = x;
    }
    Ok(out)
}

/// Composite trapezoid rule on an arbitrary increasing grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Composite Simpson rule for uniformly spaced samples. An even number of
/// intervals is handled exactly; with an odd count the last interval uses the
/// 3/8 rule.
pub fn simpson_uniform(h: f64, y: &[f64]) -> f64 {
    let n = y.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (y[0] + y[1]),
        3 => h / 3.0 * (y[0] + 4.0 * y[1] + y[2]),
        _ => {
            let intervals = n - 1;
            let (simpson_end, tail) = if intervals % 2 == 0 {
                (n - 1, 0.0)
            } else {
                let k = n - 4;
                (
                    k,
                    3.0 * h / 8.0 * (y[k] + 3.0 * y[k + 1] + 3.0 * y[k + 2] + y[k + 3]),
                )
            };
            let mut s = y[0] + y[simpson_end];
            for (i, v) in y.iter().enumerate().take(simpson_end).skip(1) {
                s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            s * h / 3.0 + tail
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, 1e-14, 1e-14).unwrap();
        assert_relative_eq!(r.value, 64.0 / 6.0 - 8.0, epsilon = 1e-13);
    }

    #[test]
    fn sqrt_endpoint_singularity() {
        let r = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 1e-10).unwrap();
        assert_relative_eq!(r.value, 2.0, epsilon = 1e-8);
    }

    #[test]
    fn log_endpoint() {
        let r = integrate(|x: f64| x.sqrt() * x.ln(), 0.0, 1.0, 1e-12, 1e-12).unwrap();
        assert_relative_eq!(r.value, -4.0 / 9.0, epsilon = 1e-10);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let f = |x: f64| x.exp();
        let a = integrate(f, 0.0, 1.0, 1e-12, 1e-12).unwrap().value;
        let b = integrate(f, 1.0, 0.0, 1e-12, 1e-12).unwrap().value;
        assert_relative_eq!(a, -b, epsilon = 1e-14);
    }

    #[test]
    fn nonintegrable_reports_failure() {
        let err = integrate(|x: f64| 1.0 / x, 0.0, 1.0, 1e-12, 1e-12).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }

    #[test]
    fn cumulative_matches_antiderivative() {
        let nodes: Vec<f64> = (1..=10).map(|i| i as f64 * 0.3).collect();
        let c = cumulative(|x: f64| x.cos(), 0.0, &nodes, 1e-13, 1e-13).unwrap();
        for (x, v) in nodes.iter().zip(&c) {
            assert_relative_eq!(*v, x.sin(), epsilon = 1e-12);
        }
    }

    #[test]
    fn simpson_odd_and_even_interval_counts() {
        for n in [5usize, 6, 101, 102] {
            let h = 1.0 / (n - 1) as f64;
            let y: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(3)).collect();
            assert_relative_eq!(simpson_uniform(h, &y), 0.25, epsilon = 1e-12);
        }
    }
}
