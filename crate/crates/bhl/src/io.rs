use std::fs;
use std::path::{Path, PathBuf};

use bhl_core::oscillation::MoProfile;
use bhl_core::weights::RadialWeight;
use bhl_core::Complex64;
use serde::Serialize;

use crate::error::{HarnessError, HarnessResult};

/// Directory holding moment-cache files, when configured.
pub const CACHE_ENV: &str = "BHL_CACHE_DIR";

fn csv_error(path: &Path, e: csv::Error) -> HarnessError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => HarnessError::io(path, source),
        other => HarnessError::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

pub fn ensure_dir(dir: &Path) -> HarnessResult<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> HarnessResult<()> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    fs::write(path, text + "\n").map_err(|e| HarnessError::io(path, e))
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> HarnessResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

#[derive(Serialize)]
struct PointRow {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct ValueRow {
    re: f64,
    im: f64,
    value: f64,
}

pub fn write_points(path: &Path, points: &[Complex64]) -> HarnessResult<()> {
    let rows: Vec<PointRow> = points.iter().map(|z| PointRow { re: z.re, im: z.im }).collect();
    write_rows(path, &rows)
}

/// `re,im,value` rows plus `<stem>.json` holding the p-norm summaries.
pub fn write_profile(path: &Path, profile: &MoProfile) -> HarnessResult<PathBuf> {
    let rows: Vec<ValueRow> = profile
        .sample_points
        .iter()
        .zip(&profile.values)
        .map(|(z, &value)| ValueRow {
            re: z.re,
            im: z.im,
            value,
        })
        .collect();
    write_rows(path, &rows)?;
    let sidecar = path.with_extension("json");
    write_json(
        &sidecar,
        &serde_json::json!({ "variant": profile.variant, "points": rows.len(), "p_norms": profile.p_norms }),
    )?;
    Ok(sidecar)
}

#[derive(Serialize, serde::Deserialize)]
struct MomentRow {
    exponent: f64,
    value: f64,
}

fn cache_path(dir: &Path, w: &RadialWeight) -> PathBuf {
    dir.join(format!("moments-{}.csv", w.cache_key()))
}

fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

/// Seeds the weight's moment table from `$BHL_CACHE_DIR`. Returns the number of entries added.
pub fn load_moment_cache(w: &RadialWeight) -> HarnessResult<usize> {
    let Some(dir) = cache_dir() else { return Ok(0) };
    let path = cache_path(&dir, w);
    if !path.exists() {
        return Ok(0);
    }
    let mut reader = csv::Reader::from_path(&path).map_err(|e| csv_error(&path, e))?;
    let mut entries = Vec::new();
    for row in reader.deserialize::<MomentRow>() {
        let row = row.map_err(|e| csv_error(&path, e))?;
        entries.push((row.exponent, row.value));
    }
    Ok(w.preload_moments(entries)?)
}

pub fn store_moment_cache(w: &RadialWeight) -> HarnessResult<()> {
    let Some(dir) = cache_dir() else { return Ok(()) };
    ensure_dir(&dir)?;
    let rows: Vec<MomentRow> = w
        .moment_cache_snapshot()
        .into_iter()
        .map(|(exponent, value)| MomentRow { exponent, value })
        .collect();
    let path = cache_path(&dir, w);
    let tmp = path.with_extension("csv.tmp");
    write_rows(&tmp, &rows)?;
    fs::rename(&tmp, &path).map_err(|e| HarnessError::io(&path, e))
}
