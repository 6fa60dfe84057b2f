//! CSV / JSON emission shared by every artifact writer.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Write equal-length columns as a CSV with a header row. Floats use Rust's
/// shortest round-trip formatting so identical inputs give identical bytes.
pub fn write_columns(path: &Path, headers: &[&str], columns: &[&[f64]]) -> Result<()> {
    if headers.len() != columns.len() {
        return Err(Error::contract("header count does not match column count"));
    }
    let n = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::contract("CSV columns have different lengths"));
    }
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(headers)?;
    let mut row = Vec::with_capacity(columns.len());
    for i in 0..n {
        row.clear();
        row.extend(columns.iter().map(|c| format!("{:e}", c[i])));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Read a CSV of floats with a header row, returning (headers, columns).
pub fn read_columns(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let headers: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    let mut cols = vec![Vec::new(); headers.len()];
    for rec in r.records() {
        let rec = rec?;
        for (c, field) in cols.iter_mut().zip(rec.iter()) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::contract(format!("non-numeric CSV field {field:?} in {}", path.display())))?;
            c.push(v);
        }
    }
    Ok((headers, cols))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    ensure_parent(path)?;
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    Ok(())
}

/// Hex SHA-256 of a byte slice.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of a float sequence by bit pattern.
pub fn hash_floats(values: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_bits().to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
