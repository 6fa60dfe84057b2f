//! Closed-form fundamental system of the linearization around `Q`.
//!
//! In the half-density normalization `w = sqrt(R) v` the linearized operator
//! becomes `-L = d^2/dR^2 - 3/(4R^2) + 8/(1+R^2)^2`, whose kernel is spanned by
//! `phi = R^(3/2)/(1+R^2)` and `theta = (-1 + 4R^2 log R + R^4)/(sqrt(R)(1+R^2))`.

/// Potential part of `-L`: `-3/(4R^2) + 8/(1+R^2)^2`.
pub fn half_density_potential(r: f64) -> f64 {
    -0.75 / (r * r) + 8.0 / (1.0 + r * r).powi(2)
}

/// `cos(2 Q(R)) = (1 - 6R^2 + R^4) / (1 + R^2)^2`.
pub fn cos_2q(r: f64) -> f64 {
    let r2 = r * r;
    (1.0 - 6.0 * r2 + r2 * r2) / (1.0 + r2).powi(2)
}

/// `sin(2 Q(R)) = 4R(1 - R^2) / (1 + R^2)^2`.
pub fn sin_2q(r: f64) -> f64 {
    let r2 = r * r;
    4.0 * r * (1.0 - r2) / (1.0 + r2).powi(2)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FundamentalPair;

impl FundamentalPair {
    /// `phi(R) = R^(3/2) / (1 + R^2)`.
    pub fn phi(&self, r: f64) -> f64 {
        r.powf(1.5) / (1.0 + r * r)
    }

    pub fn phi_prime(&self, r: f64) -> f64 {
        let s = 1.0 + r * r;
        1.5 * r.sqrt() / s - 2.0 * r.powf(2.5) / (s * s)
    }

    /// `theta(R) = (-1 + 4R^2 log R + R^4) / (sqrt(R) (1 + R^2))`.
    pub fn theta(&self, r: f64) -> f64 {
        let r2 = r * r;
        (-1.0 + 4.0 * r2 * r.ln() + r2 * r2) / (r.sqrt() * (1.0 + r2))
    }

    pub fn theta_prime(&self, r: f64) -> f64 {
        let r2 = r * r;
        let n = -1.0 + 4.0 * r2 * r.ln() + r2 * r2;
        let dn = 8.0 * r * r.ln() + 4.0 * r + 4.0 * r2 * r;
        let d = r.sqrt() * (1.0 + r2);
        let dd = 0.5 / r.sqrt() * (1.0 + r2) + 2.0 * r.powf(1.5);
        (dn * d - n * dd) / (d * d)
    }

    /// `phi theta' - phi' theta`; identically 2.
    pub fn wronskian(&self, r: f64) -> f64 {
        self.phi(r) * self.theta_prime(r) - self.phi_prime(r) * self.theta(r)
    }

    pub const WRONSKIAN: f64 = 2.0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::log_grid;

    /// Five-point second derivative.
    fn d2<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
        (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
            / (12.0 * h * h)
    }

    #[test]
    fn wronskian_is_two() {
        let fp = FundamentalPair;
        for r in log_grid(1e-2, 1e2, 100) {
            assert!((fp.wronskian(r) / 2.0 - 1.0).abs() < 1e-8, "R = {r}");
        }
    }

    #[test]
    fn both_solve_the_half_density_equation() {
        let fp = FundamentalPair;
        for r in [0.05, 0.3, 1.0, 4.0, 30.0] {
            let h = 1e-3 * r;
            for f in [
                &(|x: f64| fp.phi(x)) as &dyn Fn(f64) -> f64,
                &(|x: f64| fp.theta(x)),
            ] {
                let res = d2(f, r, h) + half_density_potential(r) * f(r);
                let scale = (f(r).abs() + f(1.5 * r).abs()) / (r * r);
                assert!(res.abs() < 1e-6 * scale, "R = {r}: {res} vs {scale}");
            }
        }
    }

    #[test]
    fn trig_identities_match_ground_state() {
        for r in [0.0, 0.4, 1.0, 3.0] {
            let q = crate::model::ground_state(r);
            assert!((cos_2q(r) - (2.0 * q).cos()).abs() < 1e-14);
            assert!((sin_2q(r) - (2.0 * q).sin()).abs() < 1e-14);
        }
    }
}
