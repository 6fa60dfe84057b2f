//! Run configuration: one TOML (or JSON) file with a table per subcommand.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::parametrix::ZerothOptions;
use crate::simulator::SimulationConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Seed for every randomized sample (symbol bound checks).
    pub seed: u64,
    pub out: PathBuf,
    pub tolerances: Tolerances,
    pub profile: ProfileConfig,
    pub spectral: SpectralConfig,
    pub parametrix: ParametrixConfig,
    pub simulate: SimulationConfig,
    pub verify_rate: VerifyRateConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            out: PathBuf::from("wavemap-out"),
            tolerances: Tolerances::default(),
            profile: ProfileConfig::default(),
            spectral: SpectralConfig::default(),
            parametrix: ParametrixConfig::default(),
            simulate: SimulationConfig::default(),
            verify_rate: VerifyRateConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileConfig {
    pub nu: f64,
    pub order: usize,
    /// Time of the emitted slice.
    pub t0: f64,
    /// Radial nodes in the emitted slice, spread over the cone `r < t0`.
    pub points: usize,
    /// Nodes per self-similar solution table when `order = 2`.
    pub a_points: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            nu: 1.0,
            order: 2,
            t0: 0.5,
            points: 400,
            a_points: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralConfig {
    /// Window for the large-`xi` slope of `rho`.
    pub slope_window: (f64, f64),
    /// Window for the small-`xi` band of `|a| / (xi^(1/2) |log xi|)`.
    pub small_window: (f64, f64),
    /// Also build the transform basis and run the unitarity corpus.
    pub corpus: bool,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            slope_window: (1e2, 1e4),
            small_window: (1e-4, 1e-2),
            corpus: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParametrixConfig {
    pub nu: f64,
    /// Latin-hypercube size for the symbol bound check.
    pub bound_samples: usize,
    /// Build the zeroth iterate from the order-`order` residual.
    pub zeroth: bool,
    pub order: usize,
    pub zeroth_options: ZerothOptions,
}

impl Default for ParametrixConfig {
    fn default() -> Self {
        Self {
            nu: 0.5,
            bound_samples: 1000,
            zeroth: true,
            order: 2,
            zeroth_options: ZerothOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyRateConfig {
    /// One run per value; the other settings come from `[simulate]`.
    pub nus: Vec<f64>,
    /// Allowed relative error of the fitted exponent against `1 + nu`.
    pub tolerance: f64,
}

impl Default for VerifyRateConfig {
    fn default() -> Self {
        Self {
            nus: vec![0.25, 0.5, 1.0],
            tolerance: 0.1,
        }
    }
}

fn positive(errs: &mut Vec<String>, name: &str, v: f64) {
    if !(v.is_finite() && v > 0.0) {
        errs.push(format!("{name} must be positive, got {v}"));
    }
}

impl RunConfig {
    /// Parse TOML, or JSON when the file name ends in `.json`.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let msg = match e.span() {
                Some(span) => format!("line {}: {}", text[..span.start].matches('\n').count() + 1, e.message()),
                None => e.message().to_owned(),
            };
            Error::Config(vec![msg])
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))
    }

    /// Every violated precondition, prefixed with its table.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = self.tolerances.validate();
        let p = &self.profile;
        positive(&mut errs, "profile.nu", p.nu);
        positive(&mut errs, "profile.t0", p.t0);
        if p.order > 2 {
            errs.push(format!("profile.order must be 0, 1 or 2, got {}", p.order));
        }
        if p.points < 2 {
            errs.push(format!("profile.points must be at least 2, got {}", p.points));
        }
        if p.a_points < 2 {
            errs.push(format!("profile.a_points must be at least 2, got {}", p.a_points));
        }
        let s = &self.spectral;
        for (name, (lo, hi)) in [("slope_window", s.slope_window), ("small_window", s.small_window)] {
            if !(lo > 0.0 && hi > lo) {
                errs.push(format!("spectral.{name} must satisfy 0 < lo < hi, got ({lo}, {hi})"));
            }
        }
        let m = &self.parametrix;
        positive(&mut errs, "parametrix.nu", m.nu);
        if m.bound_samples < 2 {
            errs.push(format!("parametrix.bound_samples must be at least 2, got {}", m.bound_samples));
        }
        if m.order > 2 {
            errs.push(format!("parametrix.order must be 0, 1 or 2, got {}", m.order));
        }
        let z = &m.zeroth_options;
        positive(&mut errs, "parametrix.zeroth_options.t0", z.t0);
        positive(&mut errs, "parametrix.zeroth_options.h_rel", z.h_rel);
        positive(&mut errs, "parametrix.zeroth_options.tail_rel", z.tail_rel);
        if z.out_fraction <= 1.0 {
            errs.push(format!("parametrix.zeroth_options.out_fraction must exceed 1, got {}", z.out_fraction));
        }
        if z.source_points < 4 || z.out_points < 2 {
            errs.push("parametrix.zeroth_options needs source_points >= 4 and out_points >= 2".into());
        }
        if z.xi_stride == 0 {
            errs.push("parametrix.zeroth_options.xi_stride must be at least 1".into());
        }
        errs.extend(self.simulate.validate().into_iter().map(|e| format!("simulate.{e}")));
        let v = &self.verify_rate;
        if v.nus.is_empty() {
            errs.push("verify_rate.nus must not be empty".into());
        }
        for nu in &v.nus {
            positive(&mut errs, "verify_rate.nus[]", *nu);
        }
        positive(&mut errs, "verify_rate.tolerance", v.tolerance);
        errs
    }
}
