//! The four subcommands. Each one is a function of the validated config
//! and writes its artifacts into `config.output`.

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::config::{RunConfig, Sweep};
use super::output::{
    csv_table, eigenvalues_csv, fmt17, loglog_rate, semilog_rate, structured_grid_vtk,
    weighted_modes, write_json, SCHEMA_VERSION,
};
use super::CliError;
use crate::eigensolver::{
    parameter_lattice, sample_realizations, solve_spectrum, solve_spectrum_timed, KleSpectrum,
    ModeTable,
};
use crate::error::KleError;
use crate::geometry::TensorPatch;
use crate::kernels::Kernel;
use crate::operator::{KleOperator, SpaceSpec, StageTimes};
use crate::reference::{assemble_dense_galerkin, kernel_interpolation_error, operator_error_norms};
use crate::splines::BSplineBasis;

/// Paths written by a subcommand plus non-fatal warnings.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

fn build_operator(
    cfg: &RunConfig,
    trial: &[SpaceSpec],
    interp: &[SpaceSpec],
) -> Result<KleOperator, CliError> {
    let kernel: Arc<dyn Kernel> = Arc::new(cfg.kernel);
    Ok(KleOperator::from_specs(&cfg.patch, trial, interp, kernel, cfg.threads)?)
}

fn prepare_output(cfg: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.output).map_err(|e| {
        CliError::config("output", format!("cannot create {}: {e}", cfg.output.display()))
    })
}

fn write_file(out: &mut Outcome, path: PathBuf, text: &str) -> Result<(), CliError> {
    fs::write(&path, text).map_err(KleError::from)?;
    out.files.push(path);
    Ok(())
}

fn write_json_file(out: &mut Outcome, path: PathBuf, value: &Value) -> Result<(), CliError> {
    write_json(&path, value)?;
    out.files.push(path);
    Ok(())
}

/// Largest physical element diagonal, taken between mapped element corners.
pub fn mesh_size(patch: &TensorPatch, bases: &[BSplineBasis]) -> crate::error::Result<f64> {
    let spans: Vec<Vec<(f64, f64)>> = bases.iter().map(BSplineBasis::spans).collect();
    let counts: Vec<usize> = spans.iter().map(Vec::len).collect();
    let total: usize = counts.iter().product();
    let mut h = 0.0f64;
    for e in 0..total {
        let mut rem = e;
        let mut lo = Vec::with_capacity(bases.len());
        let mut hi = Vec::with_capacity(bases.len());
        for (k, s) in spans.iter().enumerate() {
            let (a, b) = s[rem % counts[k]];
            rem /= counts[k];
            lo.push(a);
            hi.push(b);
        }
        let x = patch.map_point(&lo)?;
        let y = patch.map_point(&hi)?;
        h = h.max(crate::kernels::distance(&x, &y));
    }
    Ok(h)
}

fn space_json(
    patch: &TensorPatch,
    specs: &[SpaceSpec],
    bases: &[BSplineBasis],
    corr_length: f64,
) -> Result<Value, CliError> {
    let elements: Vec<usize> = bases.iter().map(BSplineBasis::num_elements).collect();
    let h = mesh_size(patch, bases)?;
    Ok(json!({
        "degrees": specs.iter().map(|s| s.degree).collect::<Vec<_>>(),
        "continuity": specs.iter().map(|s| s.continuity).collect::<Vec<_>>(),
        "discontinuous_at_c0": specs.iter().map(|s| s.discontinuous_at_c0).collect::<Vec<_>>(),
        "elements_per_direction": elements,
        "number_of_elements": elements.iter().product::<usize>(),
        "dofs_per_direction": bases.iter().map(BSplineBasis::dim).collect::<Vec<_>>(),
        "number_of_degrees_of_freedom": bases.iter().map(BSplineBasis::dim).product::<usize>(),
        "mesh_size": h,
        "mesh_size_over_correlation_length": h / corr_length,
    }))
}

fn kernel_json(cfg: &RunConfig) -> Value {
    json!({
        "family": cfg.kernel.family.to_string(),
        "sigma2": cfg.kernel.variance,
        "corrlen": cfg.kernel.corr_length,
        "gauss_denominator": cfg.kernel.gauss_denominator.factor(),
    })
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// Run Lanczos; a non-converged run yields its best spectrum and `false`.
fn solve_or_best(
    op: &KleOperator,
    cfg: &RunConfig,
    times: &mut StageTimes,
) -> Result<(KleSpectrum, bool), CliError> {
    match solve_spectrum_timed(op, &cfg.lanczos(), times) {
        Ok(s) => Ok((s, true)),
        Err(KleError::NoConvergence { best, .. }) => Ok((*best, false)),
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    prepare_output(cfg)?;
    let mut out = Outcome::default();
    let t0 = Instant::now();
    let op = build_operator(cfg, &cfg.trial, &cfg.interp)?;
    let setup = t0.elapsed();
    let mut stages = StageTimes::default();
    let t1 = Instant::now();
    let (spectrum, converged) = solve_or_best(&op, cfg, &mut stages)?;
    let solve = t1.elapsed();

    write_file(&mut out, cfg.output.join("eigenvalues.csv"), &eigenvalues_csv(&spectrum))?;
    let lanczos = cfg.lanczos();
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "kind": "kle-spectrum",
        "geometry": cfg.geometry,
        "dimension": cfg.patch.dim(),
        "kernel": kernel_json(cfg),
        "interpolation_space": space_json(&cfg.patch, &cfg.interp, op.interp_bases(), cfg.kernel.corr_length)?,
        "solution_space": space_json(&cfg.patch, &cfg.trial, op.trial_bases(), cfg.kernel.corr_length)?,
        "solver": {
            "num_modes": lanczos.num_modes,
            "krylov_dim": lanczos.krylov_dim_for(op.size()),
            "tol": lanczos.tol,
            "seed": lanczos.seed,
            "max_restarts": lanczos.max_restarts,
            "threads": cfg.threads,
            "converged": converged,
            "matvecs": spectrum.matvecs,
            "restarts": spectrum.restarts,
        },
        "eigenvalues": spectrum.eigenvalues,
        "residuals": spectrum.residuals,
        "trace": spectrum.trace(),
        "psd_violations": spectrum.psd_violations,
        "floored_jacobians": op.floored_jacobians(),
        "timings": {
            "formation_and_assembly_s": secs(setup),
            "solution_s": secs(solve),
            "total_s": secs(setup + solve),
            "apply_stages_s": stages.0.iter().map(|d| secs(*d)).collect::<Vec<_>>(),
        },
    });
    write_json_file(&mut out, cfg.output.join("spectrum.json"), &doc)?;

    if cfg.vtk {
        let params = parameter_lattice(cfg.patch.dim(), cfg.plot_res);
        let table = ModeTable::new(&spectrum, &cfg.patch, op.trial_bases(), params)?;
        let vtk = structured_grid_vtk(
            "sqrt(lambda_i) phi_i",
            cfg.patch.dim(),
            cfg.plot_res,
            table.physical(),
            &weighted_modes(&spectrum, &table),
        );
        write_file(&mut out, cfg.output.join("modes.vtk"), &vtk)?;
    }
    if spectrum.psd_violations > 0 {
        out.warnings.push(format!(
            "{} eigenvalues below -tol*lambda_1 were clipped to zero",
            spectrum.psd_violations
        ));
    }
    if !converged {
        return Err(CliError::Numerical {
            message: format!(
                "Lanczos did not converge within {} restarts; best estimates written to {}",
                cfg.max_restarts,
                cfg.output.display()
            ),
            outcome: Some(out),
        });
    }
    Ok(out)
}

pub fn cmd_convergence(cfg: &RunConfig) -> Result<Outcome, CliError> {
    prepare_output(cfg)?;
    let mut out = Outcome::default();
    let k = cfg.compare_modes;
    let mut rows: Vec<(f64, usize, usize, f64, Option<(f64, f64)>, Vec<f64>)> = Vec::new();
    for level in 0..cfg.levels {
        let (trial, interp) = cfg.level_spaces(level);
        let op = build_operator(cfg, &trial, &interp)?;
        let x = match cfg.sweep {
            Sweep::H => interp.iter().map(|s| 1.0 / s.elements as f64).fold(0.0, f64::max),
            Sweep::P => interp.iter().map(|s| s.degree).max().unwrap_or(0) as f64,
        };
        let qo = interp.iter().map(|s| s.degree).max().unwrap_or(0) + 3;
        let interp_err = kernel_interpolation_error(&cfg.patch, op.interp_bases(), &cfg.kernel, qo)?;
        let size = op.size().max(op.interp_size());
        let norms = if size <= cfg.dense_cap {
            let dense = assemble_dense_galerkin(&cfg.patch, op.trial_bases(), &cfg.kernel, None, cfg.dense_cap)?;
            let approx = op.assemble_dense_ibq_galerkin(cfg.dense_cap)?;
            Some(operator_error_norms(&dense.a, &approx)?)
        } else {
            out.warnings.push(format!(
                "level {level}: size {size} exceeds dense cap {}; operator error columns left empty",
                cfg.dense_cap
            ));
            None
        };
        let lanczos = crate::eigensolver::LanczosConfig {
            num_modes: k.min(op.size()),
            ..cfg.lanczos()
        };
        let spectrum = solve_spectrum(&op, &lanczos)?;
        rows.push((x, op.size(), op.interp_size(), interp_err, norms, spectrum.eigenvalues));
    }

    let finest = rows.last().map(|r| r.5.clone()).unwrap_or_default();
    let eig_err: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            (0..k)
                .map(|i| match (r.5.get(i), finest.get(i)) {
                    (Some(a), Some(b)) if *b != 0.0 => ((a - b) / b).abs(),
                    _ => f64::NAN,
                })
                .collect()
        })
        .collect();

    let xname = match cfg.sweep {
        Sweep::H => "mesh_size",
        Sweep::P => "interp_degree",
    };
    let mut header: Vec<String> = [
        "level",
        xname,
        "trial_dofs",
        "interp_dofs",
        "kernel_interp_l2_error",
        "operator_2norm_error",
        "operator_frobenius_error",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=k).map(|i| format!("eig_err_{i}")));
    let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
    let table: Vec<Vec<String>> = rows
        .iter()
        .zip(&eig_err)
        .enumerate()
        .map(|(l, (r, e))| {
            let mut row = vec![
                l.to_string(),
                fmt17(r.0),
                r.1.to_string(),
                r.2.to_string(),
                fmt17(r.3),
                opt(r.4.map(|n| n.0)),
                opt(r.4.map(|n| n.1)),
            ];
            row.extend(e.iter().map(|v| if v.is_nan() { String::new() } else { fmt17(*v) }));
            row
        })
        .collect();
    write_file(&mut out, cfg.output.join("convergence.csv"), &csv_table(&header, &table))?;

    let xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let rate = |ys: &[f64]| match cfg.sweep {
        Sweep::H => loglog_rate(&xs, ys),
        Sweep::P => semilog_rate(&xs, ys),
    };
    let mut rates = serde_json::Map::new();
    rates.insert(
        "kernel_interp_l2_error".into(),
        json!(rate(&rows.iter().map(|r| r.3).collect::<Vec<_>>())),
    );
    let two: Vec<f64> = rows.iter().map(|r| r.4.map_or(f64::NAN, |n| n.0)).collect();
    let fro: Vec<f64> = rows.iter().map(|r| r.4.map_or(f64::NAN, |n| n.1)).collect();
    rates.insert("operator_2norm_error".into(), json!(rate(&two)));
    rates.insert("operator_frobenius_error".into(), json!(rate(&fro)));
    for i in 0..k {
        let col: Vec<f64> = eig_err.iter().map(|e| e[i]).collect();
        rates.insert(format!("eig_err_{}", i + 1), json!(rate(&col)));
    }
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "kind": "kle-convergence",
        "sweep": match cfg.sweep { Sweep::H => "h", Sweep::P => "p" },
        "rate_definition": match cfg.sweep {
            Sweep::H => "least-squares slope of log(error) against log(mesh_size)",
            Sweep::P => "least-squares slope of log(error) against interp_degree",
        },
        "levels": cfg.levels,
        "kernel": kernel_json(cfg),
        "rates": rates,
        "warnings": out.warnings,
    });
    write_json_file(&mut out, cfg.output.join("convergence.json"), &doc)?;
    Ok(out)
}

pub fn cmd_bench(cfg: &RunConfig) -> Result<Outcome, CliError> {
    prepare_output(cfg)?;
    let mut out = Outcome::default();
    let t0 = Instant::now();
    let mut op = build_operator(cfg, &cfg.trial, &cfg.interp)?;
    let setup = t0.elapsed();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let v: Vec<f64> = (0..op.size()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut runs = Vec::new();
    for &threads in &cfg.thread_list {
        op.set_threads(threads);
        op.apply(&v)?;
        let mut stages = StageTimes::default();
        let t = Instant::now();
        for _ in 0..cfg.applies {
            op.apply_timed(&v, &mut stages)?;
        }
        let per_apply = secs(t.elapsed()) / cfg.applies as f64;
        let stage_means: Vec<f64> =
            stages.0.iter().map(|d| secs(*d) / cfg.applies as f64).collect();
        let stage_total: f64 = stage_means.iter().sum();
        let t = Instant::now();
        let (spectrum, converged) = solve_or_best(&op, cfg, &mut StageTimes::default())?;
        let solve = secs(t.elapsed());
        runs.push(json!({
            "threads": threads,
            "apply_s": per_apply,
            "apply_stages_s": stage_means,
            "stage5_share": if stage_total > 0.0 { stage_means[4] / stage_total } else { 0.0 },
            "solve_s": solve,
            "matvecs": spectrum.matvecs,
            "converged": converged,
        }));
    }
    let base = runs
        .iter()
        .find(|r| r["threads"] == 1)
        .unwrap_or(&runs[0])
        .clone();
    let speedup: Vec<Value> = runs
        .iter()
        .map(|r| {
            json!({
                "threads": r["threads"],
                "apply": base["apply_s"].as_f64().unwrap() / r["apply_s"].as_f64().unwrap(),
                "solve": base["solve_s"].as_f64().unwrap() / r["solve_s"].as_f64().unwrap(),
            })
        })
        .collect();
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "kind": "kle-bench",
        "geometry": cfg.geometry,
        "trial_dofs": op.size(),
        "interp_dofs": op.interp_size(),
        "num_modes": cfg.modes,
        "applies_per_run": cfg.applies,
        "available_parallelism": std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        "setup_s": secs(setup),
        "runs": runs,
        "speedup": speedup,
    });
    write_json_file(&mut out, cfg.output.join("bench.json"), &doc)?;
    Ok(out)
}

pub fn cmd_sample(cfg: &RunConfig) -> Result<Outcome, CliError> {
    prepare_output(cfg)?;
    let mut out = Outcome::default();
    let d = cfg.patch.dim();
    let mut manifest = json!({
        "schema_version": SCHEMA_VERSION,
        "kind": "kle-samples",
        "geometry": cfg.geometry,
        "kernel": kernel_json(cfg),
        "count": cfg.count,
        "sample_seed": cfg.sample_seed,
        "lanczos_seed": cfg.seed,
        "germs": "independent standard normal",
        "mean": cfg.mean,
        "lattice": { "resolution": cfg.plot_res, "points": cfg.plot_res.pow(d as u32) },
    });
    if cfg.count > 0 {
        let op = build_operator(cfg, &cfg.trial, &cfg.interp)?;
        let (spectrum, converged) = solve_or_best(&op, cfg, &mut StageTimes::default())?;
        if !converged {
            return Err(CliError::Numerical {
                message: "Lanczos did not converge; no realizations written".into(),
                outcome: Some(out),
            });
        }
        let params = parameter_lattice(d, cfg.plot_res);
        let table = ModeTable::new(&spectrum, &cfg.patch, op.trial_bases(), params)?;
        let mean = vec![cfg.mean; table.len()];
        let fields = sample_realizations(&spectrum, &table, &mean, cfg.count, cfg.sample_seed)?;

        let mut header = vec!["point".to_string()];
        header.extend((1..=d).map(|k| format!("xi_{k}")));
        header.extend((1..=table.physical().first().map_or(d, Vec::len)).map(|k| format!("x_{k}")));
        header.extend((1..=cfg.count).map(|s| format!("sample_{s}")));
        let rows: Vec<Vec<String>> = (0..table.len())
            .map(|p| {
                let mut row = vec![p.to_string()];
                row.extend(table.params()[p].iter().map(|v| fmt17(*v)));
                row.extend(table.physical()[p].iter().map(|v| fmt17(*v)));
                row.extend(fields.iter().map(|f| fmt17(f[p])));
                row
            })
            .collect();
        write_file(&mut out, cfg.output.join("realizations.csv"), &csv_table(&header, &rows))?;
        if cfg.vtk {
            let named: Vec<(String, Vec<f64>)> = fields
                .into_iter()
                .enumerate()
                .map(|(s, f)| (format!("sample_{}", s + 1), f))
                .collect();
            let vtk = structured_grid_vtk("realizations", d, cfg.plot_res, table.physical(), &named);
            write_file(&mut out, cfg.output.join("realizations.vtk"), &vtk)?;
        }
        manifest["num_modes"] = json!(spectrum.num_modes());
        manifest["eigenvalues"] = json!(spectrum.eigenvalues);
    }
    let names: Vec<String> = out
        .files
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    manifest["files"] = json!(names);
    write_json_file(&mut out, cfg.output.join("manifest.json"), &manifest)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::builtin;

    #[test]
    fn mesh_size_of_boxes() {
        let patch = builtin::scaled_box(&[3.0, 4.0]);
        let bases = crate::operator::build_spaces(
            &patch,
            &[SpaceSpec::smooth(2, 2), SpaceSpec::smooth(2, 4)],
        )
        .unwrap();
        assert!((mesh_size(&patch, &bases).unwrap() - (1.5f64.powi(2) + 1.0).sqrt()).abs() < 1e-14);
    }
}
