//! Radial wave-map solver and the rate measurements made on its output.

pub mod diagnostics;
pub mod evolve;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use diagnostics::{extract_lambda, local_error_energy, rate_fit, RateFit, RateSeries};
pub use evolve::{evolve, init_from_profile, smooth_step, EvolveOptions, Evolution, Sample, StopReason};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::io::write_columns;
use crate::model::{reduced_energy, BlowupParams, WaveField};
use crate::numerics::loglog_slope;
use crate::profile::{assemble, ApproxSolution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub nu: f64,
    /// Order of the approximate profile used as data, 0 to 2.
    pub order: usize,
    pub t0: f64,
    pub r_max: f64,
    pub dr: f64,
    pub cfl: f64,
    /// Stop once `lambda dr` exceeds this.
    pub resolution_limit: f64,
    /// Ratio between consecutive diagnostic times.
    pub sample_ratio: f64,
    pub snapshot_times: Vec<f64>,
    /// Final time if resolution lasts that long.
    pub t_end: f64,
    /// Fraction of the cone used for the local error energy.
    pub cone_radius_factor: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            nu: 1.0,
            order: 2,
            t0: 0.5,
            r_max: 1.5,
            dr: 2e-4,
            cfl: 0.5,
            resolution_limit: 0.05,
            sample_ratio: 1.02,
            snapshot_times: Vec::new(),
            t_end: 0.0,
            cone_radius_factor: 1.0,
        }
    }
}

impl SimulationConfig {
    /// Field-level messages for every violated precondition.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let mut need = |ok: bool, msg: String| {
            if !ok {
                errs.push(msg);
            }
        };
        need(self.nu > 0.0 && self.nu.is_finite(), format!("nu must be positive, got {}", self.nu));
        need(self.order <= 2, format!("order must be 0, 1 or 2, got {}", self.order));
        need(self.t0 > 0.0 && self.t0.is_finite(), format!("t0 must be positive, got {}", self.t0));
        need(self.dr > 0.0, format!("dr must be positive, got {}", self.dr));
        need(self.r_max >= 2.0 * self.t0, format!("r_max must be at least 2 t0, got {}", self.r_max));
        need(self.cfl > 0.0 && self.cfl < 1.0, format!("cfl must lie in (0, 1), got {}", self.cfl));
        need(self.resolution_limit > 0.0, format!("resolution_limit must be positive, got {}", self.resolution_limit));
        need(self.sample_ratio > 1.0, format!("sample_ratio must exceed 1, got {}", self.sample_ratio));
        need(
            self.t_end >= 0.0 && self.t_end < self.t0,
            format!("t_end must lie in [0, t0), got {}", self.t_end),
        );
        need(
            self.cone_radius_factor > 0.0 && self.cone_radius_factor <= 1.0,
            format!("cone_radius_factor must lie in (0, 1], got {}", self.cone_radius_factor),
        );
        errs
    }
}

/// `E_loc (t lambda) / log^2 t` at one diagnostic time.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LocalEnergySample {
    pub t: f64,
    pub lambda: f64,
    pub e_loc: f64,
    pub ratio: f64,
}

/// Whether the normalized local energy grows along the run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LocalEnergyTrend {
    /// Log-log slope of the ratio against `1/t`.
    pub slope: f64,
    /// Fraction of consecutive samples (toward `t = 0`) where the ratio grows.
    pub increasing_fraction: f64,
    pub max_over_min: f64,
    /// Positive slope with growth at 90% of steps or more.
    pub monotone_growth: bool,
}

impl LocalEnergyTrend {
    pub fn from_samples(samples: &[LocalEnergySample]) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::InsufficientData("local energy trend needs three samples".into()));
        }
        let inv_t: Vec<f64> = samples.iter().map(|s| 1.0 / s.t).collect();
        let ratio: Vec<f64> = samples.iter().map(|s| s.ratio).collect();
        let slope = loglog_slope(&inv_t, &ratio)?.0;
        let ups = ratio.windows(2).filter(|w| w[1] > w[0]).count();
        let increasing_fraction = ups as f64 / (ratio.len() - 1) as f64;
        let (lo, hi) = ratio.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
        Ok(Self {
            slope,
            increasing_fraction,
            max_over_min: hi / lo,
            monotone_growth: slope > 0.0 && increasing_fraction >= 0.9,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationRun {
    pub config: SimulationConfig,
    pub initial_energy: f64,
    pub evolution: Evolution,
    pub rate: RateSeries,
    pub fit: RateFit,
    /// Fit over the first factor `MIN_RATE_SPAN` below `t0` only.
    pub leading_fit: Option<RateFit>,
    pub energy_drift: f64,
    pub local_energy: Vec<LocalEnergySample>,
    pub local_trend: Option<LocalEnergyTrend>,
    pub wall_seconds: f64,
}

/// Data from `approx` at `t0`, evolved toward `t = 0` until under-resolved,
/// then the rate fit and the local error energy along the run.
pub fn simulate(approx: &ApproxSolution, cfg: &SimulationConfig) -> Result<SimulationRun> {
    let errs = cfg.validate();
    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    let start = std::time::Instant::now();
    let field = init_from_profile(approx, cfg.t0, cfg.r_max, cfg.dr)?;
    let initial_energy = reduced_energy(&field)?;
    let opts = EvolveOptions {
        cfl: cfg.cfl,
        snapshot_times: cfg.snapshot_times.clone(),
        resolution_limit: cfg.resolution_limit,
        sample_ratio: cfg.sample_ratio,
        keep_sample_fields: true,
    };
    let mut evolution = evolve(&field, cfg.t_end, &opts)?;
    log::info!(
        "nu = {}: stopped at t = {} after {} steps ({:?})",
        cfg.nu,
        evolution.t_stop,
        evolution.steps,
        evolution.stop
    );
    let mut rate = RateSeries::default();
    for s in &evolution.samples {
        match s.lambda {
            Some(l) if s.t > 0.0 => rate.push(s.t, l),
            _ => {}
        }
    }
    let fit = rate_fit(&rate)?;
    // Widened by two sample gaps so the window spans the minimum factor.
    let lo = cfg.t0 / (diagnostics::MIN_RATE_SPAN * cfg.sample_ratio.powi(2));
    let leading_fit = rate_fit(&rate.window(lo, cfg.t0)).ok();
    let mut local_energy = Vec::new();
    for s in &mut evolution.samples {
        let (Some(field), Some(lambda)) = (s.field.take(), s.lambda) else {
            continue;
        };
        if lambda * s.t <= 1.0 || s.t <= 0.0 {
            continue;
        }
        let e_loc = local_error_energy(&field, lambda, fit.p, cfg.cone_radius_factor)?;
        local_energy.push(LocalEnergySample {
            t: s.t,
            lambda,
            e_loc,
            ratio: e_loc * s.t * lambda / s.t.ln().powi(2),
        });
    }
    let local_trend = LocalEnergyTrend::from_samples(&local_energy).ok();
    Ok(SimulationRun {
        config: cfg.clone(),
        initial_energy,
        energy_drift: evolution.energy_drift(),
        evolution,
        rate,
        fit,
        leading_fit,
        local_energy,
        local_trend,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Independent runs in parallel, each with its own profile construction.
pub fn rate_sweep(cfgs: &[SimulationConfig], tol: &Tolerances) -> Vec<Result<SimulationRun>> {
    cfgs.par_iter()
        .map(|cfg| {
            let approx = assemble(BlowupParams::new(cfg.nu)?, cfg.order, tol)?;
            simulate(&approx, cfg)
        })
        .collect()
}

pub fn write_field(field: &WaveField, path: &Path) -> Result<()> {
    write_columns(path, &["r", "u", "ut"], &[&field.r, &field.u, &field.ut])
}

impl RateSeries {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_columns(path, &["t", "lambda"], &[&self.t, &self.lambda])
    }
}

impl SimulationRun {
    /// `t, lambda, e_loc, ratio` per diagnostic sample.
    pub fn write_local_energy(&self, path: &Path) -> Result<()> {
        let col = |f: fn(&LocalEnergySample) -> f64| self.local_energy.iter().map(f).collect::<Vec<_>>();
        let (t, l, e, q) = (col(|s| s.t), col(|s| s.lambda), col(|s| s.e_loc), col(|s| s.ratio));
        write_columns(path, &["t", "lambda", "e_loc", "ratio"], &[&t, &l, &e, &q])
    }

    /// `t, lambda, energy` per diagnostic sample (`lambda` empty before the
    /// first crossing is written as NaN).
    pub fn write_samples(&self, path: &Path) -> Result<()> {
        let s = &self.evolution.samples;
        let t: Vec<f64> = s.iter().map(|s| s.t).collect();
        let l: Vec<f64> = s.iter().map(|s| s.lambda.unwrap_or(f64::NAN)).collect();
        let e: Vec<f64> = s.iter().map(|s| s.energy).collect();
        write_columns(path, &["t", "lambda", "energy"], &[&t, &l, &e])
    }
}
