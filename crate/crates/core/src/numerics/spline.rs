//! Natural cubic spline on a strictly increasing abscissa.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::contract("spline abscissa and ordinate lengths differ"));
        }
        if n < 3 {
            return Err(Error::contract("spline needs at least three points"));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::contract("spline abscissa must be strictly increasing"));
        }
        // Tridiagonal system for second derivatives, natural end conditions.
        let mut m = vec![0.0; n];
        let mut c_prime = vec![0.0; n];
        let mut d_prime = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let a = h0;
            let b = 2.0 * (h0 + h1);
            let c = h1;
            let d = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            let denom = b - a * c_prime[i - 1];
            c_prime[i] = c / denom;
            d_prime[i] = (d - a * d_prime[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d_prime[i] - c_prime[i] * m[i + 1];
        }
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn segment(&self, t: f64) -> usize {
        let idx = self.x.partition_point(|&v| v <= t);
        idx.clamp(1, self.x.len() - 1) - 1
    }

    /// Value, first and second derivative. Outside the knots the end cubic is
    /// continued.
    pub fn eval_all(&self, t: f64) -> (f64, f64, f64) {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let v = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d = (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        let dd = a * m0 + b * m1;
        (v, d, dd)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_all(t).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_smooth_function() {
        let x: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let y: Vec<f64> = x.iter().map(|v| v.sin()).collect();
        let s = CubicSpline::new(&x, &y).unwrap();
        for t in [0.5, 3.3, 7.77] {
            let (v, d, _) = s.eval_all(t);
            assert!((v - f64::sin(t)).abs() < 1e-6);
            assert!((d - f64::cos(t)).abs() < 1e-4);
        }
    }

    #[test]
    fn hits_knots_exactly() {
        let x = [0.0, 1.0, 2.5, 4.0];
        let y = [1.0, -2.0, 0.5, 3.0];
        let s = CubicSpline::new(&x, &y).unwrap();
        for (a, b) in x.iter().zip(y) {
            assert!((s.eval(*a) - b).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_unsorted() {
        assert!(CubicSpline::new(&[0.0, 2.0, 1.0], &[0.0; 3]).is_err());
    }
}
