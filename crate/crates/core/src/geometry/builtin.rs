//! Built-in example geometries.
//!
//! Each constructor has a JSON twin under `data/geometries/`; the two are
//! kept in sync by a test.

use std::f64::consts::FRAC_1_SQRT_2;

use super::TensorPatch;
use crate::splines::BSplineBasis;

/// Inner radius, outer radius and height of the shipped half cylinder.
pub const HALF_CYLINDER_DIMENSIONS: (f64, f64, f64) = (8.0, 10.0, 20.0);

/// Characteristic length `L` used with the shipped half cylinder.
pub const HALF_CYLINDER_LENGTH: f64 = 10.0;

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 5] = [
    "unit-interval",
    "unit-square",
    "unit-cube",
    "quarter-annulus",
    "half-cylinder",
];

pub fn by_name(name: &str) -> Option<TensorPatch> {
    match name {
        "unit-interval" => Some(unit_box(1)),
        "unit-square" => Some(unit_box(2)),
        "unit-cube" => Some(unit_box(3)),
        "quarter-annulus" => Some(quarter_annulus(1.0, 2.0)),
        "half-cylinder" => Some(half_cylinder_default()),
        _ => None,
    }
}

fn linear() -> BSplineBasis {
    BSplineBasis::new(vec![0.0, 0.0, 1.0, 1.0], 1).expect("valid knots")
}

/// Identity map of `[0,1]^d`.
pub fn unit_box(d: usize) -> TensorPatch {
    scaled_box(&vec![1.0; d])
}

/// Axis-aligned box `[0, l₁] × … × [0, l_d]`.
pub fn scaled_box(lengths: &[f64]) -> TensorPatch {
    let d = lengths.len();
    let n = 1usize << d;
    let cps = (0..n)
        .map(|i| (0..d).map(|k| lengths[k] * ((i >> k) & 1) as f64).collect())
        .collect();
    TensorPatch::new(vec![linear(); d], cps, vec![1.0; n]).expect("valid box")
}

pub fn unit_interval() -> TensorPatch {
    unit_box(1)
}

pub fn interval(length: f64) -> TensorPatch {
    scaled_box(&[length])
}

/// Quarter annulus in the first quadrant. Direction 1 is radial, direction 2
/// is the exact quarter-circle arc from `(r, 0)` to `(0, r)`.
pub fn quarter_annulus(r_inner: f64, r_outer: f64) -> TensorPatch {
    let arc = BSplineBasis::new(vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0], 2).expect("valid knots");
    let unit = [(1.0, 0.0, 1.0), (1.0, 1.0, FRAC_1_SQRT_2), (0.0, 1.0, 1.0)];
    let mut cps = Vec::new();
    let mut weights = Vec::new();
    for &(x, y, w) in &unit {
        for r in [r_inner, r_outer] {
            cps.push(vec![r * x, r * y]);
            weights.push(w);
        }
    }
    TensorPatch::new(vec![linear(), arc], cps, weights).expect("valid annulus")
}

/// Half-open thick cylinder shell `{y ≥ 0, r_in ≤ r ≤ r_out, 0 ≤ z ≤ h}`.
///
/// Direction 1 runs along the half circle (two rational quadratic arcs
/// joined with C⁰ continuity at `ξ = 0.5`), direction 2 is radial and
/// direction 3 axial.
pub fn half_cylinder(r_inner: f64, r_outer: f64, height: f64) -> TensorPatch {
    let arc = BSplineBasis::new(vec![0.0, 0.0, 0.0, 0.5, 0.5, 1.0, 1.0, 1.0], 2)
        .expect("valid knots");
    let unit = [
        (-1.0, 0.0, 1.0),
        (-1.0, 1.0, FRAC_1_SQRT_2),
        (0.0, 1.0, 1.0),
        (1.0, 1.0, FRAC_1_SQRT_2),
        (1.0, 0.0, 1.0),
    ];
    let mut cps = Vec::new();
    let mut weights = Vec::new();
    for z in [0.0, height] {
        for r in [r_inner, r_outer] {
            for &(x, y, w) in &unit {
                cps.push(vec![r * x, r * y, z]);
                weights.push(w);
            }
        }
    }
    TensorPatch::new(vec![arc, linear(), linear()], cps, weights).expect("valid cylinder")
}

pub fn half_cylinder_default() -> TensorPatch {
    let (a, b, h) = HALF_CYLINDER_DIMENSIONS;
    half_cylinder(a, b, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GeometryFile;

    fn data_dir() -> std::path::PathBuf {
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/geometries")
    }

    #[test]
    fn shipped_files_match_constructors() {
        for name in NAMES {
            let file = data_dir().join(format!("{}.json", name.replace('-', "_")));
            let text = std::fs::read_to_string(&file).unwrap();
            let from_file = GeometryFile::from_json(&text).unwrap().into_patch().unwrap();
            assert_eq!(from_file, by_name(name).unwrap(), "{name}");
        }
        assert!(by_name("moebius").is_none());
    }

    #[test]
    fn cylinder_points_on_shell() {
        let patch = half_cylinder_default();
        for &(u, v, w) in &[(0.1, 0.0, 0.3), (0.5, 1.0, 0.9), (0.77, 0.5, 0.0)] {
            let x = patch.map_point(&[u, v, w]).unwrap();
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            assert!((r - (8.0 + 2.0 * v)).abs() < 1e-12);
            assert!(x[1] >= -1e-12);
            assert!((x[2] - 20.0 * w).abs() < 1e-12);
        }
        let top = patch.map_point(&[0.5, 0.0, 0.0]).unwrap();
        assert!(top[0].abs() < 1e-14 && (top[1] - 8.0).abs() < 1e-14);
    }
}
