//! Tolerance and discretization constants shared by every module.
//!
//! Everything numeric that is a knob rather than a law lives here, so a run
//! manifest can record the full set with one serialization.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Adaptive quadrature absolute tolerance.
    pub quad_abs: f64,
    /// Adaptive quadrature relative tolerance.
    pub quad_rel: f64,
    /// ODE integrator relative tolerance.
    pub ode_rel: f64,
    /// ODE integrator absolute tolerance.
    pub ode_abs: f64,

    /// Default radial profile grid `[r_min, r_max]` with `points` log-spaced nodes.
    pub grid_r_min: f64,
    pub grid_r_max: f64,
    pub grid_points: usize,

    /// Number of Frobenius terms beyond the leading power.
    pub frobenius_order: usize,
    /// Self-similar variable where the series hands over to the integrator.
    pub a_switch: f64,
    /// Distance from the light cone `a = 1` where self-similar solves stop.
    pub delta_edge: f64,
    /// Largest integrator step in the self-similar variable.
    pub a_max_step: f64,

    /// Spectral grid.
    pub xi_min: f64,
    pub xi_max: f64,
    pub xi_points: usize,
    /// Launch radius for the regular eigenfunction series.
    pub spectral_r0: f64,
    /// Weyl solution initialization radius factor: `R_far = far * max(1, xi^-1/2)`.
    pub weyl_far: f64,
    /// Matching radius factor: `R_match = match * max(1, xi^-1/2)`.
    pub weyl_match: f64,
    /// Transform quadrature grid: uniform on `(0, transform_r_max]`.
    pub transform_r_max: f64,
    pub transform_points: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quad_abs: 1e-10,
            quad_rel: 1e-8,
            ode_rel: 1e-11,
            ode_abs: 1e-14,
            grid_r_min: 1e-3,
            grid_r_max: 1e3,
            grid_points: 2048,
            frobenius_order: 8,
            a_switch: 0.05,
            delta_edge: 1e-3,
            a_max_step: 2e-3,
            xi_min: 1e-4,
            xi_max: 1e4,
            xi_points: 512,
            spectral_r0: 1e-3,
            weyl_far: 50.0,
            weyl_match: 5.0,
            transform_r_max: 12.0,
            transform_points: 4801,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let mut pos = |name: &str, v: f64| {
            if !(v.is_finite() && v > 0.0) {
                errs.push(format!("tolerances.{name} must be positive, got {v}"));
            }
        };
        pos("quad_abs", self.quad_abs);
        pos("quad_rel", self.quad_rel);
        pos("ode_rel", self.ode_rel);
        pos("ode_abs", self.ode_abs);
        pos("grid_r_min", self.grid_r_min);
        pos("grid_r_max", self.grid_r_max);
        pos("a_switch", self.a_switch);
        pos("delta_edge", self.delta_edge);
        pos("a_max_step", self.a_max_step);
        pos("xi_min", self.xi_min);
        pos("xi_max", self.xi_max);
        pos("spectral_r0", self.spectral_r0);
        pos("weyl_far", self.weyl_far);
        pos("weyl_match", self.weyl_match);
        pos("transform_r_max", self.transform_r_max);
        if self.grid_r_min >= self.grid_r_max {
            errs.push("tolerances.grid_r_min must be below grid_r_max".into());
        }
        if self.xi_min >= self.xi_max {
            errs.push("tolerances.xi_min must be below xi_max".into());
        }
        if self.grid_points < 16 {
            errs.push("tolerances.grid_points must be at least 16".into());
        }
        if self.xi_points < 8 {
            errs.push("tolerances.xi_points must be at least 8".into());
        }
        if self.transform_points < 64 {
            errs.push("tolerances.transform_points must be at least 64".into());
        }
        if self.a_switch >= 0.5 {
            errs.push("tolerances.a_switch must be below 0.5".into());
        }
        if self.delta_edge >= 0.5 {
            errs.push("tolerances.delta_edge must be below 0.5".into());
        }
        if self.weyl_match >= self.weyl_far {
            errs.push("tolerances.weyl_match must be below weyl_far".into());
        }
        errs
    }
}
