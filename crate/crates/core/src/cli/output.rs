//! Artifact writers: CSV, JSON and legacy ASCII VTK structured grids.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::eigensolver::{KleSpectrum, ModeTable};
use crate::error::Result;

/// Schema version stamped into every JSON artifact.
pub const SCHEMA_VERSION: u32 = 1;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// `mode,eigenvalue,residual`, modes numbered from 1.
pub fn eigenvalues_csv(spectrum: &KleSpectrum) -> String {
    let mut out = String::from("mode,eigenvalue,residual\n");
    for (i, (l, r)) in spectrum.eigenvalues.iter().zip(&spectrum.residuals).enumerate() {
        let _ = writeln!(out, "{},{},{}", i + 1, fmt17(*l), fmt17(*r));
    }
    out
}

/// Comma-separated table with a header row.
pub fn csv_table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

/// Legacy ASCII `STRUCTURED_GRID` on a `res^d` parameter lattice (first
/// direction fastest), padded to three dimensions.
pub fn structured_grid_vtk(
    title: &str,
    dim: usize,
    res: usize,
    points: &[Vec<f64>],
    fields: &[(String, Vec<f64>)],
) -> String {
    let mut dims = [1usize; 3];
    dims[..dim].iter_mut().for_each(|d| *d = res);
    let mut out = String::new();
    let _ = writeln!(out, "# vtk DataFile Version 3.0");
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "ASCII");
    let _ = writeln!(out, "DATASET STRUCTURED_GRID");
    let _ = writeln!(out, "DIMENSIONS {} {} {}", dims[0], dims[1], dims[2]);
    let _ = writeln!(out, "POINTS {} double", points.len());
    for p in points {
        let mut c = [0.0; 3];
        c[..p.len().min(3)].copy_from_slice(&p[..p.len().min(3)]);
        let _ = writeln!(out, "{} {} {}", fmt17(c[0]), fmt17(c[1]), fmt17(c[2]));
    }
    let _ = writeln!(out, "POINT_DATA {}", points.len());
    for (name, values) in fields {
        let _ = writeln!(out, "SCALARS {name} double 1");
        let _ = writeln!(out, "LOOKUP_TABLE default");
        for v in values {
            let _ = writeln!(out, "{}", fmt17(*v));
        }
    }
    out
}

/// `√λᵢ φᵢ` for every mode in the table.
pub fn weighted_modes(spectrum: &KleSpectrum, table: &ModeTable) -> Vec<(String, Vec<f64>)> {
    (0..table.num_modes())
        .map(|i| {
            let s = spectrum.eigenvalues[i].max(0.0).sqrt();
            let vals = (0..table.len()).map(|p| s * table.value(p, i)).collect();
            (format!("mode_{}", i + 1), vals)
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x` over the positive pairs;
/// `None` with fewer than two.
pub fn loglog_rate(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    linear_slope(&pts)
}

/// Least-squares slope of `log y` against `x`.
pub fn semilog_rate(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(_, b)| **b > 0.0 && b.is_finite())
        .map(|(a, b)| (*a, b.ln()))
        .collect();
    linear_slope(&pts)
}

fn linear_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Check the structure of a `spectrum.json` document.
pub fn validate_spectrum_json(doc: &Value) -> std::result::Result<(), String> {
    fn need<'a>(v: &'a Value, path: &str) -> std::result::Result<&'a Value, String> {
        path.split('.')
            .try_fold(v, |cur, key| cur.get(key))
            .ok_or_else(|| format!("missing `{path}`"))
    }
    let version = need(doc, "schema_version")?.as_u64();
    if version != Some(u64::from(SCHEMA_VERSION)) {
        return Err(format!("schema_version {version:?}, expected {SCHEMA_VERSION}"));
    }
    if need(doc, "kind")?.as_str() != Some("kle-spectrum") {
        return Err("kind must be kle-spectrum".into());
    }
    for key in [
        "kernel.sigma2",
        "kernel.corrlen",
        "kernel.gauss_denominator",
        "solver.tol",
        "trace",
        "timings.formation_and_assembly_s",
        "timings.solution_s",
        "timings.total_s",
    ] {
        if !need(doc, key)?.is_number() {
            return Err(format!("`{key}` must be a number"));
        }
    }
    for key in [
        "dimension",
        "solver.num_modes",
        "solver.krylov_dim",
        "solver.seed",
        "solver.threads",
        "solver.matvecs",
        "solver.restarts",
        "psd_violations",
        "floored_jacobians",
    ] {
        if !need(doc, key)?.is_u64() {
            return Err(format!("`{key}` must be a nonnegative integer"));
        }
    }
    for space in ["interpolation_space", "solution_space"] {
        for key in ["number_of_elements", "number_of_degrees_of_freedom"] {
            if !need(doc, &format!("{space}.{key}"))?.is_u64() {
                return Err(format!("`{space}.{key}` must be a nonnegative integer"));
            }
        }
        for key in ["mesh_size", "mesh_size_over_correlation_length"] {
            if !need(doc, &format!("{space}.{key}"))?.is_number() {
                return Err(format!("`{space}.{key}` must be a number"));
            }
        }
    }
    if !need(doc, "solver.converged")?.is_boolean() {
        return Err("`solver.converged` must be a boolean".into());
    }
    let numbers = |key: &str| -> std::result::Result<usize, String> {
        match need(doc, key)?.as_array() {
            Some(a) if a.iter().all(Value::is_number) => Ok(a.len()),
            _ => Err(format!("`{key}` must be an array of numbers")),
        }
    };
    let m = numbers("eigenvalues")?;
    if numbers("residuals")? != m {
        return Err("`residuals` and `eigenvalues` differ in length".into());
    }
    if numbers("timings.apply_stages_s")? != 9 {
        return Err("`timings.apply_stages_s` must have 9 entries".into());
    }
    Ok(())
}
