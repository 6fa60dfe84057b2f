//! `a(xi)` and `rho(xi)` on a log grid, with CSV export and an on-disk cache.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::eigen::{connection, rho_from_a, Connection};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::numerics::{log_grid, loglog_slope};

pub const CACHE_ENV: &str = "WAVEMAP_CACHE_DIR";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralTables {
    pub xi_grid: Vec<f64>,
    pub a_values: Vec<Complex64>,
    pub rho_values: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    xi: f64,
    re_a: f64,
    im_a: f64,
    rho: f64,
}

/// `a(xi)` and `rho(xi)` at every grid point, in parallel.
pub fn connection_and_measure(xi_grid: &[f64], tol: &Tolerances) -> Result<SpectralTables> {
    if xi_grid.is_empty() || xi_grid.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::contract("xi grid must be nonempty and positive"));
    }
    let rows: Vec<Connection> = xi_grid
        .par_iter()
        .map(|&xi| connection(xi, tol))
        .collect::<Result<_>>()?;
    Ok(SpectralTables {
        xi_grid: xi_grid.to_vec(),
        a_values: rows.iter().map(|c| c.a).collect(),
        rho_values: rows.iter().map(|c| c.rho).collect(),
    })
}

/// Tables on the configured grid, read from the cache when present.
pub fn default_tables(tol: &Tolerances) -> Result<SpectralTables> {
    let grid = log_grid(tol.xi_min, tol.xi_max, tol.xi_points);
    match cache_dir() {
        Some(dir) => cached_tables(&grid, tol, &dir),
        None => connection_and_measure(&grid, tol),
    }
}

pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).map(PathBuf::from)
}

/// Cache key from the grid bits and the tolerance record.
pub fn cache_key(xi_grid: &[f64], tol: &Tolerances) -> String {
    let mut h = Sha256::new();
    for x in xi_grid {
        h.update(x.to_le_bytes());
    }
    h.update(serde_json::to_vec(tol).expect("tolerances serialize"));
    h.finalize().iter().take(12).map(|b| format!("{b:02x}")).collect()
}

pub fn cached_tables(xi_grid: &[f64], tol: &Tolerances, dir: &Path) -> Result<SpectralTables> {
    let path = dir.join(format!("spectral-{}.csv", cache_key(xi_grid, tol)));
    if path.exists() {
        match SpectralTables::read_csv(&path) {
            Ok(t) if t.xi_grid.len() == xi_grid.len() => return Ok(t),
            _ => log::warn!("ignoring unreadable cache entry {}", path.display()),
        }
    }
    let t = connection_and_measure(xi_grid, tol)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    t.write_csv(&path)?;
    Ok(t)
}

impl SpectralTables {
    pub fn len(&self) -> usize {
        self.xi_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi_grid.is_empty()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for i in 0..self.len() {
            w.serialize(CsvRow {
                xi: self.xi_grid[i],
                re_a: self.a_values[i].re,
                im_a: self.a_values[i].im,
                rho: self.rho_values[i],
            })?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let mut t = SpectralTables {
            xi_grid: Vec::new(),
            a_values: Vec::new(),
            rho_values: Vec::new(),
        };
        for row in r.deserialize() {
            let row: CsvRow = row?;
            t.xi_grid.push(row.xi);
            t.a_values.push(Complex64::new(row.re_a, row.im_a));
            t.rho_values.push(row.rho);
        }
        Ok(t)
    }

    /// Indices with `lo <= xi <= hi`.
    pub fn window(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let s = self.xi_grid.partition_point(|&x| x < lo);
        let e = self.xi_grid.partition_point(|&x| x <= hi);
        s..e
    }

    /// Log-log slope of `rho` over `[lo, hi]`.
    pub fn rho_slope(&self, lo: f64, hi: f64) -> Result<f64> {
        let w = self.window(lo, hi);
        Ok(loglog_slope(&self.xi_grid[w.clone()], &self.rho_values[w])?.0)
    }

    /// Range of `|a| / (xi^(1/2) |log xi|)` over `[lo, hi]`.
    pub fn small_xi_band(&self, lo: f64, hi: f64) -> (f64, f64) {
        self.band(lo, hi, |xi, a| a.norm() / (xi.sqrt() * xi.ln().abs()))
    }

    /// Range of `|a| xi^(1/2)` over `[lo, hi]`.
    pub fn large_xi_band(&self, lo: f64, hi: f64) -> (f64, f64) {
        self.band(lo, hi, |xi, a| a.norm() * xi.sqrt())
    }

    fn band(&self, lo: f64, hi: f64, f: impl Fn(f64, Complex64) -> f64) -> (f64, f64) {
        self.window(lo, hi).fold((f64::INFINITY, 0.0f64), |(mn, mx), i| {
            let v = f(self.xi_grid[i], self.a_values[i]);
            (mn.min(v), mx.max(v))
        })
    }

    /// Largest `|xi d_xi a| / |a|` on the grid, by centered differences in
    /// `log xi`.
    pub fn symbol_constant(&self) -> f64 {
        let x: Vec<f64> = self.xi_grid.iter().map(|v| v.ln()).collect();
        (1..self.len().saturating_sub(1))
            .map(|i| {
                let d = (self.a_values[i + 1] - self.a_values[i - 1]) / (x[i + 1] - x[i - 1]);
                d.norm() / self.a_values[i].norm()
            })
            .fold(0.0, f64::max)
    }

    /// Largest relative gap between `rho` and the formula applied to `a`.
    pub fn rho_consistency(&self) -> f64 {
        self.a_values
            .iter()
            .zip(&self.rho_values)
            .map(|(a, r)| (rho_from_a(*a) - r).abs() / r)
            .fold(0.0, f64::max)
    }
}
