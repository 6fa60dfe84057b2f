//! Dormand–Prince 5(4) integrator for small fixed-size real systems.
//!
//! Integration runs in either direction. Complex systems are handled by the
//! callers as pairs of real components.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on |h|; `f64::INFINITY` for none.
    pub h_max: f64,
    pub h_init: Option<f64>,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            h_max: f64::INFINITY,
            h_init: None,
            max_steps: 5_000_000,
        }
    }

    pub fn with_h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// One accepted node of a recorded trajectory.
#[derive(Debug, Clone, Copy)]
pub struct Node<const N: usize> {
    pub x: f64,
    pub y: [f64; N],
    pub dy: [f64; N],
}

/// Accepted steps with derivatives, for cubic Hermite dense output.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub nodes: Vec<Node<N>>,
}

impl<const N: usize> Trajectory<N> {
    /// Cubic Hermite interpolation of component `c` (and its derivative).
    pub fn eval(&self, x: f64, c: usize) -> (f64, f64) {
        let nodes = &self.nodes;
        let ascending = nodes.last().map_or(true, |l| l.x >= nodes[0].x);
        let key = |n: &Node<N>| if ascending { n.x } else { -n.x };
        let xk = if ascending { x } else { -x };
        let idx = nodes.partition_point(|n| key(n) <= xk);
        let i = idx.clamp(1, nodes.len() - 1) - 1;
        let (a, b) = (&nodes[i], &nodes[i + 1]);
        hermite(a.x, a.y[c], a.dy[c], b.x, b.y[c], b.dy[c], x)
    }

    /// For a second-order pair (`y[vel] = y[pos]'`), quintic Hermite
    /// interpolation of `y[pos]` using `y, y', y''` at both nodes. Returns
    /// value and slope.
    pub fn eval_pair(&self, x: f64, pos: usize, vel: usize) -> (f64, f64) {
        let nodes = &self.nodes;
        let ascending = nodes.last().map_or(true, |l| l.x >= nodes[0].x);
        let key = |n: &Node<N>| if ascending { n.x } else { -n.x };
        let xk = if ascending { x } else { -x };
        let idx = nodes.partition_point(|n| key(n) <= xk);
        let i = idx.clamp(1, nodes.len() - 1) - 1;
        let (a, b) = (&nodes[i], &nodes[i + 1]);
        quintic_hermite(
            [a.x, a.y[pos], a.y[vel], a.dy[vel]],
            [b.x, b.y[pos], b.y[vel], b.dy[vel]],
            x,
        )
    }

    pub fn x_range(&self) -> (f64, f64) {
        let a = self.nodes[0].x;
        let b = self.nodes[self.nodes.len() - 1].x;
        (a.min(b), a.max(b))
    }
}

/// Cubic Hermite interpolant through (x0, y0, d0), (x1, y1, d1); returns value and slope.
pub fn hermite(x0: f64, y0: f64, d0: f64, x1: f64, y1: f64, d1: f64, x: f64) -> (f64, f64) {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let v = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    let dh00 = (6.0 * s2 - 6.0 * s) / h;
    let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
    let dh01 = (-6.0 * s2 + 6.0 * s) / h;
    let dh11 = 3.0 * s2 - 2.0 * s;
    let dv = dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1;
    (v, dv)
}

/// Quintic Hermite interpolant through `[x, y, y', y'']` at two nodes;
/// returns value and slope.
pub fn quintic_hermite(n0: [f64; 4], n1: [f64; 4], x: f64) -> (f64, f64) {
    let h = n1[0] - n0[0];
    let t = (x - n0[0]) / h;
    let (t2, t3) = (t * t, t * t * t);
    let (t4, t5) = (t3 * t, t3 * t2);
    let b = [
        1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
        t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
        0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5,
        0.5 * t3 - t4 + 0.5 * t5,
        -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
        10.0 * t3 - 15.0 * t4 + 6.0 * t5,
    ];
    let db = [
        -30.0 * t2 + 60.0 * t3 - 30.0 * t4,
        1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
        t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4,
        1.5 * t2 - 4.0 * t3 + 2.5 * t4,
        -12.0 * t2 + 28.0 * t3 - 15.0 * t4,
        30.0 * t2 - 60.0 * t3 + 30.0 * t4,
    ];
    let c = [n0[1], h * n0[2], h * h * n0[3], h * h * n1[3], h * n1[2], n1[1]];
    let v = b.iter().zip(&c).map(|(p, q)| p * q).sum();
    let dv: f64 = db.iter().zip(&c).map(|(p, q)| p * q).sum();
    (v, dv / h)
}

struct Stepper<'a, const N: usize, F> {
    f: &'a F,
    opts: OdeOptions,
    x: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    steps: usize,
}

impl<'a, const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]> Stepper<'a, N, F> {
    fn new(f: &'a F, x0: f64, y0: [f64; N], x1: f64, opts: OdeOptions) -> Self {
        let k1 = f(x0, &y0);
        let span = (x1 - x0).abs();
        let h = opts.h_init.unwrap_or_else(|| {
            let d0 = (0..N).map(|i| y0[i].abs()).fold(0.0, f64::max);
            let d1 = (0..N).map(|i| k1[i].abs()).fold(0.0, f64::max);
            let guess = if d0 < 1e-5 || d1 < 1e-5 {
                1e-6 * span.max(1e-3)
            } else {
                0.01 * d0 / d1
            };
            guess.min(span).max(span * 1e-12)
        });
        Self {
            f,
            opts,
            x: x0,
            y: y0,
            k1,
            h: h.min(opts.h_max).min(span.max(f64::MIN_POSITIVE)),
            steps: 0,
        }
    }

    /// Advance to exactly `target`, calling `on_accept` after each accepted step.
    fn advance_to<G: FnMut(f64, &[f64; N], &[f64; N])>(
        &mut self,
        target: f64,
        mut on_accept: G,
    ) -> Result<()> {
        let dir = if target >= self.x { 1.0 } else { -1.0 };
        let f = self.f;
        while (target - self.x) * dir > 0.0 {
            if self.steps >= self.opts.max_steps {
                return Err(Error::TooManySteps {
                    steps: self.steps,
                    reached: self.x,
                });
            }
            let remaining = (target - self.x).abs();
            let mut h = self.h.min(self.opts.h_max);
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let hs = h * dir;
            let x = self.x;
            let y = &self.y;
            let k1 = &self.k1;
            let k2 = f(x + C2 * hs, &axpy(y, hs, &[(A21, k1)]));
            let k3 = f(x + C3 * hs, &axpy(y, hs, &[(A31, k1), (A32, &k2)]));
            let k4 = f(x + C4 * hs, &axpy(y, hs, &[(A41, k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                x + C5 * hs,
                &axpy(y, hs, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                x + hs,
                &axpy(y, hs, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = axpy(y, hs, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let x_new = if last { target } else { x + hs };
            let k7 = f(x_new, &y_new);
            let mut err = 0.0f64;
            for i in 0..N {
                let e = hs
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.opts.atol + self.opts.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / sc).abs());
            }
            self.steps += 1;
            if y_new.iter().chain(k7.iter()).any(|v| !v.is_finite()) {
                err = f64::INFINITY;
            }
            if !err.is_finite() {
                self.h = 0.25 * h;
                if self.h <= 1e-15 * x.abs().max(1.0) {
                    return Err(Error::StepCollapse { reached: x, target });
                }
                continue;
            }
            if err <= 1.0 {
                self.x = x_new;
                self.y = y_new;
                self.k1 = k7;
                on_accept(self.x, &self.y, &self.k1);
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if !last {
                    self.h = h * fac;
                } else {
                    self.h = self.h.max(h * fac);
                }
            } else {
                let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                self.h = h * fac;
                if self.h <= 1e-15 * x.abs().max(1.0) {
                    return Err(Error::StepCollapse { reached: x, target });
                }
            }
        }
        Ok(())
    }
}

/// Integrate `y' = f(x, y)` from `x0` to `x1`.
pub fn solve<const N: usize, F>(f: F, x0: f64, y0: [f64; N], x1: f64, opts: OdeOptions) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut st = Stepper::new(&f, x0, y0, x1, opts);
    st.advance_to(x1, |_, _, _| {})?;
    Ok(st.y)
}

/// Integrate through a monotone sequence of output points (in the direction of
/// integration), returning the state at each.
pub fn solve_at<const N: usize, F>(
    f: F,
    x0: f64,
    y0: [f64; N],
    xs: &[f64],
    opts: OdeOptions,
) -> Result<Vec<[f64; N]>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let Some(&last) = xs.last() else {
        return Ok(Vec::new());
    };
    let mut st = Stepper::new(&f, x0, y0, last, opts);
    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        st.advance_to(x, |_, _, _| {})?;
        out.push(st.y);
    }
    Ok(out)
}

/// Integrate and record every accepted step for dense output.
pub fn solve_dense<const N: usize, F>(
    f: F,
    x0: f64,
    y0: [f64; N],
    x1: f64,
    opts: OdeOptions,
) -> Result<Trajectory<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut st = Stepper::new(&f, x0, y0, x1, opts);
    let mut nodes = vec![Node {
        x: x0,
        y: y0,
        dy: st.k1,
    }];
    st.advance_to(x1, |x, y, dy| nodes.push(Node { x, y: *y, dy: *dy }))?;
    Ok(Trajectory { nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn oscillator(_x: f64, y: &[f64; 2]) -> [f64; 2] {
        [y[1], -y[0]]
    }

    #[test]
    fn quintic_hermite_reproduces_quintics() {
        let p = |x: f64| [x, 1.0 - x + 2.0 * x.powi(3) - x.powi(5), -1.0 + 6.0 * x * x - 5.0 * x.powi(4), 12.0 * x - 20.0 * x.powi(3)];
        let (a, b) = (p(0.3), p(1.1));
        for x in [0.3, 0.5, 0.77, 1.1] {
            let (v, d) = quintic_hermite(a, b, x);
            assert_relative_eq!(v, p(x)[1], epsilon = 1e-12);
            assert_relative_eq!(d, p(x)[2], epsilon = 1e-12);
        }
    }

    #[test]
    fn harmonic_oscillator_forward_and_back() {
        let opts = OdeOptions::new(1e-12, 1e-14);
        let y = solve(oscillator, 0.0, [0.0, 1.0], 10.0, opts).unwrap();
        assert_relative_eq!(y[0], 10f64.sin(), epsilon = 1e-9);
        assert_relative_eq!(y[1], 10f64.cos(), epsilon = 1e-9);
        let back = solve(oscillator, 10.0, y, 0.0, opts).unwrap();
        assert!(back[0].abs() < 1e-9);
        assert_relative_eq!(back[1], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn output_points_hit_exactly() {
        let xs = [0.5, 1.0, 2.0, 3.5];
        let opts = OdeOptions::new(1e-12, 1e-14);
        let ys = solve_at(|_x, y: &[f64; 1]| [y[0]], 0.0, [1.0], &xs, opts).unwrap();
        for (x, y) in xs.iter().zip(ys) {
            assert_relative_eq!(y[0], x.exp(), max_relative = 1e-10);
        }
    }

    #[test]
    fn dense_output_interpolates() {
        let opts = OdeOptions::new(1e-12, 1e-14).with_h_max(0.01);
        let tr = solve_dense(oscillator, 0.0, [0.0, 1.0], 3.0, opts).unwrap();
        for x in [0.123, 1.777, 2.999] {
            let (v, d) = tr.eval(x, 0);
            assert_relative_eq!(v, f64::sin(x), epsilon = 1e-9);
            assert_relative_eq!(d, f64::cos(x), epsilon = 1e-7);
        }
    }

    #[test]
    fn blowup_reports_collapse() {
        let opts = OdeOptions::new(1e-10, 1e-12);
        let err = solve(|_x, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], 2.0, opts).unwrap_err();
        assert!(matches!(
            err,
            Error::StepCollapse { .. } | Error::TooManySteps { .. }
        ));
    }
}
