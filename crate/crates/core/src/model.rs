//! Blow-up parameters, radial profiles, and the closed-form base quantities of
//! the corotational wave-map problem
//!
//! ```text
//!   u_tt - u_rr - u_r / r + sin(2u) / (2 r^2) = 0,
//! ```
//!
//! with the ground state `Q(R) = 2 arctan R` and the prescribed concentration
//! scale `lambda(t) = t^(-1-nu)`.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;

/// Blow-up exponent and the scales derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupParams {
    pub nu: f64,
    /// Reference time used to nondimensionalize diagnostics.
    pub t_ref: f64,
    /// Fraction of the light cone used by local-energy diagnostics.
    pub cone_radius_factor: f64,
}

impl BlowupParams {
    pub fn new(nu: f64) -> Result<Self> {
        Self::with_options(nu, 1.0, 1.0)
    }

    pub fn with_options(nu: f64, t_ref: f64, cone_radius_factor: f64) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::contract(format!("nu must be positive, got {nu}")));
        }
        if !(t_ref.is_finite() && t_ref > 0.0) {
            return Err(Error::contract(format!("t_ref must be positive, got {t_ref}")));
        }
        if !(cone_radius_factor > 0.0 && cone_radius_factor <= 1.0) {
            return Err(Error::contract(format!(
                "cone_radius_factor must lie in (0, 1], got {cone_radius_factor}"
            )));
        }
        Ok(Self {
            nu,
            t_ref,
            cone_radius_factor,
        })
    }

    /// `lambda(t) = t^(-1-nu)`.
    pub fn lambda(&self, t: f64) -> f64 {
        t.powf(-1.0 - self.nu)
    }

    /// `d lambda / dt`.
    pub fn lambda_dot(&self, t: f64) -> f64 {
        -(1.0 + self.nu) * t.powf(-2.0 - self.nu)
    }

    /// `t * lambda(t) = t^(-nu)`; its inverse square is the small parameter of
    /// the profile expansion.
    pub fn t_lambda(&self, t: f64) -> f64 {
        t.powf(-self.nu)
    }

    /// Renormalized time `tau = t^(-nu) / nu`.
    pub fn tau(&self, t: f64) -> f64 {
        t.powf(-self.nu) / self.nu
    }

    pub fn t_of_tau(&self, tau: f64) -> f64 {
        (self.nu * tau).powf(-1.0 / self.nu)
    }

    /// `lambda` as a function of `tau`: `(nu tau)^((1+nu)/nu)`.
    pub fn lambda_of_tau(&self, tau: f64) -> f64 {
        (self.nu * tau).powf((1.0 + self.nu) / self.nu)
    }
}

/// Point in the backward light cone with every coordinate the profile
/// construction uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfSimilarContext {
    pub t: f64,
    pub r: f64,
    /// `r / t`.
    pub a: f64,
    /// `lambda(t) r`.
    pub big_r: f64,
    pub b1: f64,
    pub b2: f64,
}

impl SelfSimilarContext {
    pub fn new(params: &BlowupParams, t: f64, r: f64) -> Self {
        let tl = params.t_lambda(t);
        let big_r = params.lambda(t) * r;
        Self {
            t,
            r,
            a: r / t,
            big_r,
            b1: (1.0 + big_r * big_r).ln().powi(2) / (tl * tl),
            b2: 1.0 / (tl * tl),
        }
    }
}

/// `Q(R) = 2 arctan R`.
pub fn ground_state(big_r: f64) -> f64 {
    2.0 * big_r.atan()
}

/// `Q'(R) = 2 / (1 + R^2)`.
pub fn ground_state_slope(big_r: f64) -> f64 {
    2.0 / (1.0 + big_r * big_r)
}

/// Residual of `u0(t, r) = Q(lambda(t) r)`:
/// `e0 = t^-2 [ (nu+1)^2 4R/(1+R^2)^2 - nu(nu+1) 2R/(1+R^2) ]`.
pub fn e0_closed_form(t: f64, big_r: f64, nu: f64) -> f64 {
    let s = 1.0 + big_r * big_r;
    ((nu + 1.0).powi(2) * 4.0 * big_r / (s * s) - nu * (nu + 1.0) * 2.0 * big_r / s) / (t * t)
}

/// A function of `R` sampled on a strictly increasing positive grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Declared order of vanishing at `R = 0`.
    pub vanishing_order: u32,
    /// `(k, l)`: envelope `R^k (log R)^l` at infinity.
    pub log_growth: (i32, i32),
    #[serde(default)]
    pub nu: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProfileSidecar {
    vanishing_order: u32,
    log_growth: (i32, i32),
    nu: Option<f64>,
    points: usize,
}

impl RadialProfile {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, vanishing_order: u32, log_growth: (i32, i32)) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::contract("profile grid and values differ in length"));
        }
        if grid.len() < 2 {
            return Err(Error::contract("profile needs at least two points"));
        }
        if grid[0] <= 0.0 {
            return Err(Error::contract("profile grid must start above zero"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::contract("profile grid must be strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("profile values must be finite"));
        }
        Ok(Self {
            grid,
            values,
            vanishing_order,
            log_growth,
            nu: None,
        })
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = Some(nu);
        self
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `R^k (log R)^l` with `log` taken as `log(e + R)` so the envelope stays
    /// positive on the whole grid.
    pub fn envelope(&self, big_r: f64) -> f64 {
        let (k, l) = self.log_growth;
        big_r.powi(k) * (std::f64::consts::E + big_r).ln().powi(l)
    }

    fn decade(&self, first: bool) -> impl Iterator<Item = (f64, f64)> + '_ {
        let lo = self.grid[0];
        let hi = self.grid[self.grid.len() - 1];
        self.grid
            .iter()
            .copied()
            .zip(self.values.iter().copied())
            .filter(move |(r, _)| if first { *r <= 10.0 * lo } else { *r >= hi / 10.0 })
    }

    /// Max of `|value / R^m|` on the first decade of the grid.
    pub fn vanishing_ratio_max(&self) -> f64 {
        let m = self.vanishing_order as i32;
        self.decade(true)
            .map(|(r, v)| (v / r.powi(m)).abs())
            .fold(0.0, f64::max)
    }

    /// Max of `|value / envelope|` on the last decade of the grid.
    pub fn envelope_ratio_max(&self) -> f64 {
        self.decade(false)
            .map(|(r, v)| (v / self.envelope(r)).abs())
            .fold(0.0, f64::max)
    }

    /// Samples restricted to `[lo, hi]`.
    pub fn window(&self, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
        self.grid
            .iter()
            .zip(&self.values)
            .filter(|(r, _)| **r >= lo && **r <= hi)
            .map(|(r, v)| (*r, *v))
            .unzip()
    }

    /// Two-column CSV `(R, value)` plus a `.json` sidecar with the metadata.
    pub fn write(&self, csv_path: &Path) -> Result<()> {
        io::write_columns(csv_path, &["R", "value"], &[&self.grid, &self.values])?;
        io::write_json(
            &csv_path.with_extension("json"),
            &ProfileSidecar {
                vanishing_order: self.vanishing_order,
                log_growth: self.log_growth,
                nu: self.nu,
                points: self.grid.len(),
            },
        )
    }

    pub fn read(csv_path: &Path) -> Result<Self> {
        let (_, cols) = io::read_columns(csv_path)?;
        if cols.len() != 2 {
            return Err(Error::contract("profile CSV must have exactly two columns"));
        }
        let side_path = csv_path.with_extension("json");
        let text = std::fs::read_to_string(&side_path).map_err(|e| Error::io(&side_path, e))?;
        let side: ProfileSidecar = serde_json::from_str(&text)?;
        let mut it = cols.into_iter();
        let grid = it.next().unwrap_or_default();
        let values = it.next().unwrap_or_default();
        let mut p = Self::new(grid, values, side.vanishing_order, side.log_growth)?;
        p.nu = side.nu;
        Ok(p)
    }
}

/// `(u, u_t)` on a uniform radial grid at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub t: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub ut: Vec<f64>,
}

impl WaveField {
    pub fn new(t: f64, r: Vec<f64>, u: Vec<f64>, ut: Vec<f64>) -> Result<Self> {
        if r.len() != u.len() || r.len() != ut.len() {
            return Err(Error::contract("wave field arrays differ in length"));
        }
        if r.len() < 3 {
            return Err(Error::contract("wave field needs at least three grid points"));
        }
        if r[0] <= 0.0 || r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::contract("wave field grid must be positive and increasing"));
        }
        Ok(Self { t, r, u, ut })
    }

    /// Cell-centred grid `r_i = (i + 1/2) dr` reaching at least `r_max`.
    pub fn cell_centred_grid(r_max: f64, dr: f64) -> Vec<f64> {
        let n = (r_max / dr).ceil() as usize;
        (0..n).map(|i| (i as f64 + 0.5) * dr).collect()
    }

    pub fn dr(&self) -> f64 {
        self.r[1] - self.r[0]
    }

    pub fn has_nan(&self) -> bool {
        self.u.iter().chain(&self.ut).any(|v| !v.is_finite())
    }
}

/// Radial derivative at every node with the odd ghost value `u(-r0) = -u(r0)`
/// supplying the axis neighbour.
pub fn radial_derivative(r: &[f64], u: &[f64]) -> Vec<f64> {
    let n = r.len();
    let mut d = vec![0.0; n];
    // Three-point derivative on the nonuniform stencil (-r0, r0, r1).
    let (xm, x0, xp) = (-r[0], r[0], r[1]);
    let (fm, f0, fp) = (-u[0], u[0], u[1]);
    d[0] = three_point_derivative(xm, x0, xp, fm, f0, fp);
    for i in 1..n - 1 {
        d[i] = three_point_derivative(r[i - 1], r[i], r[i + 1], u[i - 1], u[i], u[i + 1]);
    }
    let k = n - 1;
    let h1 = r[k] - r[k - 1];
    let h2 = r[k - 1] - r[k - 2];
    if (h1 - h2).abs() <= 1e-9 * h1 {
        d[k] = (3.0 * u[k] - 4.0 * u[k - 1] + u[k - 2]) / (2.0 * h1);
    } else {
        d[k] = (u[k] - u[k - 1]) / h1;
    }
    d
}

fn three_point_derivative(xm: f64, x0: f64, xp: f64, fm: f64, f0: f64, fp: f64) -> f64 {
    let h0 = x0 - xm;
    let h1 = xp - x0;
    (-h1 / (h0 * (h0 + h1))) * fm + ((h1 - h0) / (h0 * h1)) * f0 + (h0 / (h1 * (h0 + h1))) * fp
}

/// Second-order finite-difference residual
/// `u_tt - u_rr - u_r / r + sin(2u) / (2 r^2)` at the interior nodes of the
/// middle slice. Returns `(r, residual)` with both endpoints dropped.
pub fn pde_residual(prev: &WaveField, cur: &WaveField, next: &WaveField) -> Result<(Vec<f64>, Vec<f64>)> {
    if prev.r != cur.r || next.r != cur.r {
        return Err(Error::contract("residual slices must share one radial grid"));
    }
    let dt1 = cur.t - prev.t;
    let dt2 = next.t - cur.t;
    if dt1 <= 0.0 || dt2 <= 0.0 || (dt1 - dt2).abs() > 1e-9 * dt1.max(dt2) {
        return Err(Error::contract(format!(
            "residual slices must be equally spaced increasing times, got steps {dt1} and {dt2}"
        )));
    }
    for f in [prev, cur, next] {
        if f.has_nan() {
            return Err(Error::contract("NaN in residual slice"));
        }
    }
    let n = cur.r.len();
    let mut rs = Vec::with_capacity(n.saturating_sub(2));
    let mut res = Vec::with_capacity(n.saturating_sub(2));
    let dt = dt1;
    for i in 1..n - 1 {
        let (rm, r0, rp) = (cur.r[i - 1], cur.r[i], cur.r[i + 1]);
        let (um, u0, up) = (cur.u[i - 1], cur.u[i], cur.u[i + 1]);
        let h0 = r0 - rm;
        let h1 = rp - r0;
        let urr = 2.0 * (h0 * up - (h0 + h1) * u0 + h1 * um) / (h0 * h1 * (h0 + h1));
        let ur = three_point_derivative(rm, r0, rp, um, u0, up);
        let utt = (next.u[i] - 2.0 * u0 + prev.u[i]) / (dt * dt);
        rs.push(r0);
        res.push(utt - urr - ur / r0 + (2.0 * u0).sin() / (2.0 * r0 * r0));
    }
    Ok((rs, res))
}

/// `∫ [u_t^2 + u_r^2 + sin^2(u) / r^2] r dr` over the sampled range, by the
/// trapezoid rule with the integrand pinned to zero at the axis.
pub fn reduced_energy(field: &WaveField) -> Result<f64> {
    if field.has_nan() {
        return Err(Error::contract("NaN in wave field"));
    }
    let density = energy_density(field);
    let mut e = 0.5 * field.r[0] * density[0];
    e += crate::numerics::quad::trapezoid(&field.r, &density);
    Ok(e)
}

/// Energy integrand `(u_t^2 + u_r^2 + sin^2 u / r^2) r` at each node.
pub fn energy_density(field: &WaveField) -> Vec<f64> {
    let ur = radial_derivative(&field.r, &field.u);
    field
        .r
        .iter()
        .zip(&field.u)
        .zip(&field.ut)
        .zip(&ur)
        .map(|(((&r, &u), &ut), &ur)| {
            let s = if u.abs() < 1e-8 {
                // (u/r)^2 (sin u / u)^2 with the sinc factor ≈ 1.
                (u / r).powi(2) * (1.0 - u * u / 3.0)
            } else {
                (u.sin() / r).powi(2)
            };
            (ut * ut + ur * ur + s) * r
        })
        .collect()
}

/// `pi / 2`: the level crossed by `Q` at `R = 1`.
pub const HALF_PI: f64 = PI / 2.0;
