//! CSV inputs referenced from a run configuration.

use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;
use wigdeco::{PhaseGrid, TabulatedScattering};

use crate::CliError;

#[derive(Debug, Deserialize)]
struct ScatteringRow {
    k: f64,
    re_r: f64,
    im_r: f64,
    re_chi: f64,
    im_chi: f64,
    re_t: Option<f64>,
    im_t: Option<f64>,
}

fn reader(path: &Path, field: &str) -> Result<csv::Reader<std::fs::File>, CliError> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Config(format!("field `{field}`: cannot open {}: {e}", path.display())))
}

/// Columns `k,re_r,im_r,re_chi,im_chi` plus optional `re_t,im_t` (all rows or none).
pub fn read_scattering(path: &Path) -> Result<TabulatedScattering, CliError> {
    let bad = |msg: String| CliError::Config(format!("field `kernel.path`: {}: {msg}", path.display()));
    let mut rows = Vec::new();
    for row in reader(path, "kernel.path")?.deserialize::<ScatteringRow>() {
        rows.push(row.map_err(|e| bad(e.to_string()))?);
    }
    let with_t = rows.iter().filter(|r| r.re_t.is_some() && r.im_t.is_some()).count();
    if with_t != 0 && with_t != rows.len() {
        return Err(bad("transmission columns must be given on every row or none".into()));
    }
    let k = rows.iter().map(|r| r.k).collect();
    let r = rows.iter().map(|r| Complex64::new(r.re_r, r.im_r)).collect();
    let chi = rows.iter().map(|r| Complex64::new(r.re_chi, r.im_chi)).collect();
    let t = (with_t > 0).then(|| {
        rows.iter()
            .map(|r| Complex64::new(r.re_t.unwrap_or_default(), r.im_t.unwrap_or_default()))
            .collect()
    });
    TabulatedScattering::new(k, r, t, chi).map_err(|e| bad(e.to_string()))
}

#[derive(Debug, Deserialize)]
struct PotentialRow {
    x: f64,
    #[serde(rename = "V")]
    v: f64,
}

/// Columns `x,V`, one row per position node of `grid`.
pub fn read_potential(path: &Path, grid: &PhaseGrid) -> Result<Vec<f64>, CliError> {
    let bad = |msg: String| CliError::Config(format!("field `potential.path`: {}: {msg}", path.display()));
    let mut values = Vec::with_capacity(grid.n_x);
    for (i, row) in reader(path, "potential.path")?.deserialize::<PotentialRow>().enumerate() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        if i >= grid.n_x {
            return Err(bad(format!("more than n_x = {} rows", grid.n_x)));
        }
        if (row.x - grid.x(i)).abs() > 1e-9 * grid.dx() {
            return Err(bad(format!("row {i} has x = {}, expected grid node {}", row.x, grid.x(i))));
        }
        values.push(row.v);
    }
    if values.len() != grid.n_x {
        return Err(bad(format!("expected {} rows, found {}", grid.n_x, values.len())));
    }
    Ok(values)
}
