//! Method-of-lines evolution of `u_tt = u_rr + u_r / r - sin(2u) / (2 r^2)` on
//! a cell-centred radial grid, started from the approximate blow-up profile.

use std::f64::consts::PI;

use serde::Serialize;

use super::diagnostics::extract_lambda;
use crate::error::{Error, Result};
use crate::model::{ground_state, reduced_energy, WaveField};
use crate::profile::ApproxSolution;

/// Width of the blend to the outer ground state, as a fraction of `t0`.
pub const BLEND_FRACTION: f64 = 0.05;

/// Smallest number of cells the blend may span.
pub const MIN_BLEND_CELLS: usize = 8;

/// C-infinity step: 1 for `x <= 0`, 0 for `x >= 1`.
pub fn smooth_step(x: f64) -> f64 {
    let psi = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    if x <= 0.0 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        psi(1.0 - x) / (psi(1.0 - x) + psi(x))
    }
}

/// `u_k` inside the cone and the static `Q(lambda(t0) r)` outside, joined by
/// a smooth blend over `[(1 - delta) t0, t0]` (pulled in slightly when the
/// profile stops short of the cone). `u_t` is a centred difference in `t` of
/// the same blend, so it vanishes outside the cone.
pub fn init_from_profile(approx: &ApproxSolution, t0: f64, r_max: f64, dr: f64) -> Result<WaveField> {
    if !(t0 > 0.0) || !(dr > 0.0) {
        return Err(Error::contract("initial time and dr must be positive"));
    }
    if r_max < 2.0 * t0 {
        return Err(Error::contract(format!("r_max = {r_max} must be at least 2 t0 = {}", 2.0 * t0)));
    }
    let h = 1e-4 * t0;
    let outer = (approx.a_max().min(1.0) * t0 * (1.0 - 2.0 * h / t0)).min(t0);
    let inner = (1.0 - BLEND_FRACTION) * t0;
    let cells = ((outer - inner) / dr).floor() as usize;
    if cells < MIN_BLEND_CELLS {
        return Err(Error::GridTooCoarse(format!(
            "blend over [{inner}, {outer}] spans {cells} cells; need {MIN_BLEND_CELLS}"
        )));
    }
    let r = WaveField::cell_centred_grid(r_max, dr);
    let q0 = |x: f64| ground_state(approx.params.lambda(t0) * x);
    let blended = |t: f64, x: f64| -> Result<f64> {
        let w = smooth_step((x - inner) / (outer - inner));
        if w == 0.0 {
            return Ok(q0(x));
        }
        Ok((1.0 - w) * q0(x) + w * approx.eval(t, x)?)
    };
    let mut u = Vec::with_capacity(r.len());
    let mut ut = Vec::with_capacity(r.len());
    for &x in &r {
        u.push(blended(t0, x)?);
        ut.push((blended(t0 + h, x)? - blended(t0 - h, x)?) / (2.0 * h));
    }
    WaveField::new(t0, r, u, ut)
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolveOptions {
    pub cfl: f64,
    /// Times at which full fields are kept; steps are shortened to land on them.
    pub snapshot_times: Vec<f64>,
    /// Stop once `lambda_est * dr` exceeds this.
    pub resolution_limit: f64,
    /// Diagnostic samples are taken whenever `|log t|` has moved by
    /// `log(sample_ratio)` since the last one.
    pub sample_ratio: f64,
    /// Keep the field at every diagnostic sample.
    pub keep_sample_fields: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            cfl: 0.5,
            snapshot_times: Vec::new(),
            resolution_limit: 0.05,
            sample_ratio: 1.02,
            keep_sample_fields: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopReason {
    Reached,
    UnderResolved { lambda_dr: f64 },
    NonFinite,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sample {
    pub t: f64,
    /// `None` while `u` has no `pi/2` crossing.
    pub lambda: Option<f64>,
    pub energy: f64,
    /// `∫ 2 r u_r u_t dt` at the outer node since the start: the energy that
    /// has crossed the boundary, so `energy - boundary_work` is conserved.
    pub boundary_work: f64,
    #[serde(skip)]
    pub field: Option<WaveField>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Evolution {
    #[serde(skip)]
    pub snapshots: Vec<WaveField>,
    pub samples: Vec<Sample>,
    #[serde(skip)]
    pub last: WaveField,
    pub stop: StopReason,
    /// Time of the last finite field.
    pub t_stop: f64,
    pub steps: usize,
}

impl Evolution {
    /// True when the run ended early (under-resolution or non-finite values).
    pub fn truncated(&self) -> bool {
        self.stop != StopReason::Reached
    }

    /// Largest `|E - W - E0| / E0` over the samples, with `W` the work done
    /// through the outer boundary.
    pub fn energy_drift(&self) -> f64 {
        let Some(e0) = self.samples.first().map(|s| s.energy) else {
            return 0.0;
        };
        self.samples
            .iter()
            .map(|s| ((s.energy - s.boundary_work - e0) / e0).abs())
            .fold(0.0, f64::max)
    }
}

/// Semi-discrete right-hand side. `dir` is the sign of the time step; the
/// outer boundary is outgoing in that direction.
struct Operator {
    r: Vec<f64>,
    dr: f64,
    dir: f64,
}

impl Operator {
    fn apply(&self, u: &[f64], v: &[f64], du: &mut [f64], dv: &mut [f64]) {
        let n = u.len();
        let (dr, r) = (self.dr, &self.r);
        let inv2 = 1.0 / (dr * dr);
        for i in 0..n - 1 {
            // Odd ghost value at the axis.
            let um = if i == 0 { -u[0] } else { u[i - 1] };
            let (u0, up, ri) = (u[i], u[i + 1], r[i]);
            du[i] = v[i];
            dv[i] = (up - 2.0 * u0 + um) * inv2 + (up - um) / (2.0 * dr * ri) - (2.0 * u0).sin() / (2.0 * ri * ri);
        }
        // (d_t + dir d_r)(r (u - pi)) = 0 at the last node: outgoing to
        // leading order, and exact for the static 1/r tail of Q(lambda r).
        let k = n - 1;
        let ur = (3.0 * u[k] - 4.0 * u[k - 1] + u[k - 2]) / (2.0 * dr);
        du[k] = -self.dir * (ur + (u[k] - PI) / r[k]);
        dv[k] = 0.0;
    }
}

struct Rk4 {
    op: Operator,
    k: [(Vec<f64>, Vec<f64>); 4],
    tmp: (Vec<f64>, Vec<f64>),
}

impl Rk4 {
    fn new(op: Operator, n: usize) -> Self {
        let z = || (vec![0.0; n], vec![0.0; n]);
        Self {
            op,
            k: [z(), z(), z(), z()],
            tmp: z(),
        }
    }

    fn step(&mut self, u: &mut [f64], v: &mut [f64], dt: f64) {
        let n = u.len();
        let stages = [0.0, 0.5, 0.5, 1.0];
        for s in 0..4 {
            let (tu, tv) = (&mut self.tmp.0, &mut self.tmp.1);
            if s == 0 {
                tu.copy_from_slice(u);
                tv.copy_from_slice(v);
            } else {
                let (pu, pv) = (&self.k[s - 1].0, &self.k[s - 1].1);
                let c = stages[s] * dt;
                for i in 0..n {
                    tu[i] = u[i] + c * pu[i];
                    tv[i] = v[i] + c * pv[i];
                }
            }
            let (ku, kv) = {
                let k = &mut self.k[s];
                (&mut k.0, &mut k.1)
            };
            self.op.apply(&self.tmp.0, &self.tmp.1, ku, kv);
        }
        for i in 0..n {
            let [a, b, c, d] = &self.k;
            u[i] += dt / 6.0 * (a.0[i] + 2.0 * b.0[i] + 2.0 * c.0[i] + d.0[i]);
            v[i] += dt / 6.0 * (a.1[i] + 2.0 * b.1[i] + 2.0 * c.1[i] + d.1[i]);
        }
        // u_t at the boundary node is whatever the outgoing condition says.
        v[n - 1] = self.k[3].0[n - 1];
    }
}

fn sample(field: &WaveField, work: f64, keep: bool) -> Result<Sample> {
    Ok(Sample {
        t: field.t,
        lambda: extract_lambda(field).ok(),
        energy: reduced_energy(field)?,
        boundary_work: work,
        field: keep.then(|| field.clone()),
    })
}

/// `2 r u_r u_t` at the outer node: `dE/dt` for the energy on `[0, r_max]`.
fn boundary_flux(field: &WaveField) -> f64 {
    let k = field.r.len() - 1;
    let ur = (3.0 * field.u[k] - 4.0 * field.u[k - 1] + field.u[k - 2]) / (2.0 * field.dr());
    2.0 * field.r[k] * ur * field.ut[k]
}

/// Evolve from `field.t` to `t_end` with `dt = cfl dr` (either direction).
///
/// Stops early when the profile is under-resolved or a value goes
/// non-finite; the result then carries the last finite field and the reason.
pub fn evolve(field: &WaveField, t_end: f64, opts: &EvolveOptions) -> Result<Evolution> {
    if !(opts.cfl > 0.0 && opts.cfl < 1.0) {
        return Err(Error::contract(format!("cfl must lie in (0, 1), got {}", opts.cfl)));
    }
    if t_end == field.t || !t_end.is_finite() {
        return Err(Error::contract("t_end must differ from the field time"));
    }
    if field.has_nan() {
        return Err(Error::contract("initial field is not finite"));
    }
    let dir = (t_end - field.t).signum();
    if dir < 0.0 && t_end < 0.0 {
        return Err(Error::contract("evolution toward the blow-up must stop at t >= 0"));
    }
    if !(opts.sample_ratio > 1.0) {
        return Err(Error::contract("sample_ratio must exceed 1"));
    }
    let dr = field.dr();
    let dt = opts.cfl * dr;
    let n = field.r.len();
    let mut rk = Rk4::new(
        Operator {
            r: field.r.clone(),
            dr,
            dir,
        },
        n,
    );
    let mut cur = field.clone();
    let mut next = field.clone();
    let mut stops: Vec<f64> = opts
        .snapshot_times
        .iter()
        .copied()
        .filter(|&s| (s - field.t) * dir > 0.0 && (t_end - s) * dir >= 0.0)
        .collect();
    stops.sort_by(|a, b| (a * dir).total_cmp(&(b * dir)));
    stops.reverse();
    let mut snapshots = Vec::new();
    if opts.snapshot_times.contains(&field.t) {
        snapshots.push(field.clone());
    }
    let mut work = 0.0;
    let mut samples = vec![sample(&cur, work, opts.keep_sample_fields)?];
    let log_gap = opts.sample_ratio.ln();
    let mut steps = 0;
    let stop = loop {
        let target = stops.last().copied().unwrap_or(t_end);
        // The slack absorbs the drift of summing dt many times.
        let landing = (target - cur.t).abs() <= dt * (1.0 + 1e-6);
        let h = dt.min((target - cur.t).abs());
        next.u.copy_from_slice(&cur.u);
        next.ut.copy_from_slice(&cur.ut);
        rk.step(&mut next.u, &mut next.ut, dir * h);
        next.t = if landing { target } else { cur.t + dir * h };
        steps += 1;
        if next.has_nan() {
            break StopReason::NonFinite;
        }
        work += 0.5 * (next.t - cur.t) * (boundary_flux(&cur) + boundary_flux(&next));
        std::mem::swap(&mut cur, &mut next);
        if landing && stops.last() == Some(&target) {
            stops.pop();
            snapshots.push(cur.clone());
        }
        let lambda = extract_lambda(&cur).ok();
        let last_t = samples.last().map_or(cur.t, |s| s.t);
        let reached = landing && target == t_end;
        let under = lambda.map(|l| l * dr).filter(|&x| x > opts.resolution_limit);
        if (cur.t / last_t).ln().abs() >= log_gap || reached || under.is_some() {
            samples.push(sample(&cur, work, opts.keep_sample_fields)?);
        }
        if let Some(lambda_dr) = under {
            break StopReason::UnderResolved { lambda_dr };
        }
        if reached {
            break StopReason::Reached;
        }
    };
    if stop == StopReason::NonFinite {
        log::warn!("non-finite field after t = {}; returning the partial run", cur.t);
    }
    Ok(Evolution {
        snapshots,
        samples,
        t_stop: cur.t,
        last: cur,
        stop,
        steps,
    })
}
