//! End-to-end runs of the `kle` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kle::cli::output::validate_spectrum_json;
use serde_json::Value;

fn kle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kle"))
        .args(args)
        .env_remove("KLE_THREADS")
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) {
    let out = kle(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("an error line");
    serde_json::from_str(line).expect("error output is JSON")
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn dir_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn golden() -> Vec<f64> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../goldens/analytic_exp_b1_L1.csv");
    read_csv(&path).iter().map(|r| r[1].parse().unwrap()).collect()
}

#[test]
fn solve_matches_analytic_golden() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "solve",
        "--geometry", "unit-interval",
        "--kernel", "exponential",
        "--sigma2", "1",
        "--corrlen", "1",
        "--trial-degree", "2",
        "--trial-elements", "64",
        "--modes", "20",
        "--output", dir_str(dir.path()),
    ]);
    let rows = read_csv(&dir.path().join("eigenvalues.csv"));
    assert_eq!(rows.len(), 20);
    let exact = golden();
    let errs: Vec<f64> = rows
        .iter()
        .zip(&exact)
        .map(|(r, e)| (r[1].parse::<f64>().unwrap() - e).abs() / e)
        .collect();
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    let shown: Vec<String> = errs.iter().map(|e| format!("{e:.2e}")).collect();
    assert!(worst <= 1e-6, "relative errors per mode: {}", shown.join(" "));
}

#[test]
fn constant_kernel_single_mode_is_variance_times_volume() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "solve",
        "--geometry", "unit-square",
        "--kernel", "constant",
        "--sigma2", "2.5",
        "--trial-elements", "4",
        "--modes", "1",
        "--output", dir_str(dir.path()),
    ]);
    let rows = read_csv(&dir.path().join("eigenvalues.csv"));
    let lambda: f64 = rows[0][1].parse().unwrap();
    assert!((lambda - 2.5).abs() < 1e-12, "{lambda}");
}

#[test]
fn rerun_and_thread_count_give_identical_artifacts() {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (d, threads) in dirs.iter().zip(["1", "1", "3"]) {
        run_ok(&[
            "solve",
            "--geometry", "quarter-annulus",
            "--kernel", "gaussian",
            "--corrlen", "0.7",
            "--trial-elements", "6",
            "--interp-elements", "8",
            "--modes", "6",
            "--seed", "11",
            "--threads", threads,
            "--vtk",
            "--plot-res", "5",
            "--output", dir_str(d.path()),
        ]);
    }
    for name in ["eigenvalues.csv", "modes.vtk"] {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        for d in &dirs[1..] {
            assert_eq!(a, std::fs::read(d.path().join(name)).unwrap(), "{name} differs");
        }
    }
    let vtk = std::fs::read_to_string(dirs[0].path().join("modes.vtk")).unwrap();
    assert!(vtk.contains("DIMENSIONS 5 5 1"));
    assert!(vtk.contains("SCALARS mode_6 double 1"));
}

#[test]
fn spectrum_json_follows_schema() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "solve",
        "--geometry", "half-cylinder",
        "--kernel", "exponential",
        "--corrlen", "5",
        "--trial-elements", "4,1,2",
        "--interp-elements", "4,1,2",
        "--modes", "3",
        "--output", dir_str(dir.path()),
    ]);
    let text = std::fs::read_to_string(dir.path().join("spectrum.json")).unwrap();
    let mut doc: Value = serde_json::from_str(&text).unwrap();
    validate_spectrum_json(&doc).unwrap();
    assert_eq!(doc["solution_space"]["number_of_elements"], 8);
    // The trial space keeps the C⁰ arc joint; the C⁰ interpolation space
    // (2·4 + 1 functions along the arc) gains one more by breaking it.
    assert_eq!(doc["solution_space"]["number_of_degrees_of_freedom"], 7 * 3 * 4);
    assert_eq!(doc["interpolation_space"]["dofs_per_direction"][0], 10);
    doc["schema_version"] = Value::from(99);
    assert!(validate_spectrum_json(&doc).is_err());
    doc["schema_version"] = Value::from(1);
    doc["timings"]["apply_stages_s"] = Value::from(vec![0.0; 8]);
    assert!(validate_spectrum_json(&doc).is_err());
}

#[test]
fn config_errors_exit_2_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "corrlen = -3\n").unwrap();
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["solve", "--modes", "0"], "modes"),
        (vec!["solve", "--kernel", "matern"], "kernel"),
        (vec!["solve", "--geometry", "/no/such/file.json"], "geometry"),
        (vec!["solve", "--config", cfg.to_str().unwrap()], "corrlen"),
        (vec!["convergence", "--levels", "1"], "levels"),
        (vec!["bench", "--thread-list", ""], "thread_list"),
        (vec!["solve", "--unknown-flag"], "arguments"),
    ];
    for (mut args, field) in cases {
        args.extend(["--output", out_dir.to_str().unwrap()]);
        let out = kle(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = stderr_json(&out);
        assert_eq!(err["error"]["kind"], "config");
        assert_eq!(err["error"]["field"], field, "{args:?}");
    }
}

#[test]
fn non_convergence_exits_3_and_keeps_best_results() {
    let dir = tempfile::tempdir().unwrap();
    let out = kle(&[
        "solve",
        "--trial-elements", "64",
        "--modes", "20",
        "--tol", "1e-15",
        "--max-restarts", "0",
        "--output", dir_str(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"]["kind"], "numerical");
    let doc: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("spectrum.json")).unwrap())
            .unwrap();
    assert_eq!(doc["solver"]["converged"], false);
    assert_eq!(read_csv(&dir.path().join("eigenvalues.csv")).len(), 20);
}

fn rates(dir: &Path) -> Value {
    let text = std::fs::read_to_string(dir.join("convergence.json")).unwrap();
    serde_json::from_str::<Value>(&text).unwrap()
}

#[test]
fn convergence_rates_match_theory() {
    let gauss = tempfile::tempdir().unwrap();
    run_ok(&[
        "convergence",
        "--kernel", "gaussian",
        "--corrlen", "0.1",
        "--trial-elements", "64",
        "--interp-elements", "64",
        "--interp-continuity", "1",
        "--levels", "4",
        "--compare-modes", "3",
        "--output", dir_str(gauss.path()),
    ]);
    let g = rates(gauss.path());
    let slope = g["rates"]["kernel_interp_l2_error"].as_f64().unwrap();
    assert!((slope - 3.0).abs() <= 0.3, "gaussian slope {slope}");
    assert_eq!(read_csv(&gauss.path().join("convergence.csv")).len(), 4);

    let exp = tempfile::tempdir().unwrap();
    run_ok(&[
        "convergence",
        "--kernel", "exponential",
        "--corrlen", "0.1",
        "--trial-elements", "64",
        "--interp-elements", "64",
        "--levels", "4",
        "--compare-modes", "2",
        "--dense-cap", "200",
        "--output", dir_str(exp.path()),
    ]);
    let e = rates(exp.path());
    let slope = e["rates"]["kernel_interp_l2_error"].as_f64().unwrap();
    assert!((slope - 1.5).abs() <= 0.2, "exponential slope {slope}");
    assert!(!e["warnings"].as_array().unwrap().is_empty());
    let rows = read_csv(&exp.path().join("convergence.csv"));
    // Level 0 (66 interpolation points) fits under the cap, the rest do not.
    assert!(!rows[0][5].is_empty());
    assert!(rows[1..].iter().all(|r| r[5].is_empty()));
}

#[test]
fn bench_reports_stages_and_speedups() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "bench",
        "--geometry", "unit-square",
        "--trial-elements", "8",
        "--modes", "3",
        "--thread-list", "1,2",
        "--applies", "2",
        "--output", dir_str(dir.path()),
    ]);
    let doc: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("bench.json")).unwrap())
            .unwrap();
    let runs = doc["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 2);
    assert_eq!(runs[0]["apply_stages_s"].as_array().unwrap().len(), 9);
    assert_eq!(doc["speedup"][0]["apply"].as_f64().unwrap(), 1.0);
}

#[test]
fn sample_count_zero_writes_manifest_only() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["sample", "--count", "0", "--output", dir_str(dir.path())]);
    let names: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(names, vec!["manifest.json".to_string()]);
}

#[test]
fn samples_are_reproducible_and_centered() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let n = 10_000usize;
    for d in [&a, &b] {
        run_ok(&[
            "sample",
            "--trial-elements", "8",
            "--modes", "5",
            "--count", "10000",
            "--sample-seed", "42",
            "--mean", "1.5",
            "--plot-res", "5",
            "--output", dir_str(d.path()),
        ]);
    }
    let ca = std::fs::read(a.path().join("realizations.csv")).unwrap();
    assert_eq!(ca, std::fs::read(b.path().join("realizations.csv")).unwrap());
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["sample_seed"], 42);
    for row in read_csv(&a.path().join("realizations.csv")) {
        // point, xi_1, x_1, then the samples
        let s: Vec<f64> = row[3..].iter().map(|v| v.parse().unwrap()).collect();
        assert_eq!(s.len(), n);
        let mean = s.iter().sum::<f64>() / n as f64;
        let var = s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - 1.5).abs() <= 3.0 * se, "mean {mean}, se {se}");
    }
}
