//! Command-line front end.
//!
//! Every subcommand reads an optional flat `key = value` file (`--config`)
//! and overlays its flags. Exit codes: 0 ok, 2 configuration error, 3
//! numerical failure. Errors go to stderr as one JSON object.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

pub use commands::{cmd_bench, cmd_convergence, cmd_sample, cmd_solve, Outcome};
pub use config::{ConfigError, RawSettings, RunConfig, Sweep};

use crate::error::KleError;

#[derive(Debug, Parser)]
#[command(name = "kle", version, about = "Truncated Karhunen-Loeve expansions on spline domains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the leading eigenpairs and write eigenvalues.csv, spectrum.json
    /// and optionally modes.vtk.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        plot: PlotArgs,
    },
    /// Refinement sweep: interpolation, operator and eigenvalue errors with
    /// observed rates.
    Convergence {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of levels (at least 3).
        #[arg(long)]
        levels: Option<String>,
        /// `h` halves elements per level, `p` raises the interpolation degree.
        #[arg(long)]
        sweep: Option<String>,
        /// Eigenvalues compared against the finest level.
        #[arg(long)]
        compare_modes: Option<String>,
        /// Largest size for which dense operator errors are computed.
        #[arg(long)]
        dense_cap: Option<String>,
    },
    /// Time apply() per stage and the full solve for several thread counts.
    Bench {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated thread counts, e.g. `1,2,4`.
        #[arg(long)]
        thread_list: Option<String>,
        /// apply() calls averaged per thread count.
        #[arg(long)]
        applies: Option<String>,
    },
    /// Draw realizations of the truncated expansion on a parameter lattice.
    Sample {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        plot: PlotArgs,
        #[arg(long)]
        count: Option<String>,
        #[arg(long)]
        sample_seed: Option<String>,
        /// Constant mean field.
        #[arg(long)]
        mean: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Flat `key = value` file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in name (unit-interval, unit-square, unit-cube, quarter-annulus,
    /// half-cylinder) or a geometry JSON file.
    #[arg(long)]
    pub geometry: Option<String>,
    /// exponential, gaussian or constant.
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub sigma2: Option<String>,
    #[arg(long)]
    pub corrlen: Option<String>,
    /// Gaussian exponent denominator factor, 1 or 2.
    #[arg(long)]
    pub gauss_denom: Option<String>,
    /// Per-direction lists accept one value for all directions.
    #[arg(long)]
    pub trial_degree: Option<String>,
    #[arg(long)]
    pub trial_elements: Option<String>,
    #[arg(long)]
    pub trial_continuity: Option<String>,
    #[arg(long)]
    pub interp_degree: Option<String>,
    #[arg(long)]
    pub interp_elements: Option<String>,
    #[arg(long)]
    pub interp_continuity: Option<String>,
    /// Make the interpolation space discontinuous at C⁰ geometry lines.
    #[arg(long)]
    pub interp_c0_break: Option<String>,
    #[arg(long)]
    pub modes: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub max_restarts: Option<String>,
    #[arg(long)]
    pub krylov_dim: Option<String>,
    /// Defaults to `KLE_THREADS`, then 1.
    #[arg(long)]
    pub threads: Option<String>,
    #[arg(long, short)]
    pub output: Option<String>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Lattice points per direction.
    #[arg(long)]
    pub plot_res: Option<String>,
    /// Also write a legacy VTK structured grid.
    #[arg(long)]
    pub vtk: bool,
}

/// Failure of a subcommand.
#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    /// Numerical failure; artifacts written before it are kept in `outcome`.
    Numerical {
        message: String,
        outcome: Option<Outcome>,
    },
}

impl CliError {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        Self::Config(ConfigError::new(field, message))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical { .. } => 3,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Self::Config(e) => json!({
                "error": { "kind": "config", "field": e.field, "message": e.message },
                "exit_code": 2,
            }),
            Self::Numerical { message, outcome } => json!({
                "error": {
                    "kind": "numerical",
                    "message": message,
                    "files": outcome.as_ref().map(|o| o.files.clone()).unwrap_or_default(),
                },
                "exit_code": 3,
            }),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

impl From<KleError> for CliError {
    fn from(e: KleError) -> Self {
        match e {
            KleError::Io(io) => Self::config("output", io.to_string()),
            other => Self::Numerical {
                message: other.to_string(),
                outcome: None,
            },
        }
    }
}

fn overlay_common(raw: &mut RawSettings, c: CommonArgs) {
    raw.set_opt("geometry", c.geometry);
    raw.set_opt("kernel", c.kernel);
    raw.set_opt("sigma2", c.sigma2);
    raw.set_opt("corrlen", c.corrlen);
    raw.set_opt("gauss_denom", c.gauss_denom);
    raw.set_opt("trial_degree", c.trial_degree);
    raw.set_opt("trial_elements", c.trial_elements);
    raw.set_opt("trial_continuity", c.trial_continuity);
    raw.set_opt("interp_degree", c.interp_degree);
    raw.set_opt("interp_elements", c.interp_elements);
    raw.set_opt("interp_continuity", c.interp_continuity);
    raw.set_opt("interp_c0_break", c.interp_c0_break);
    raw.set_opt("modes", c.modes);
    raw.set_opt("tol", c.tol);
    raw.set_opt("seed", c.seed);
    raw.set_opt("max_restarts", c.max_restarts);
    raw.set_opt("krylov_dim", c.krylov_dim);
    raw.set_opt("threads", c.threads);
    raw.set_opt("output", c.output);
}

fn overlay_plot(raw: &mut RawSettings, p: PlotArgs) {
    raw.set_opt("plot_res", p.plot_res);
    if p.vtk {
        raw.set_opt("vtk", Some(true));
    }
}

/// Merge defaults, the config file, `KLE_THREADS` and flags, then validate.
pub fn resolve(
    common: CommonArgs,
    extra: impl FnOnce(&mut RawSettings),
    env_threads: Option<String>,
) -> Result<RunConfig, ConfigError> {
    let mut raw = RawSettings::default();
    if let Some(path) = &common.config {
        raw.values = config::read_config_file(path)?;
    }
    if !raw.values.contains_key("threads") {
        raw.set_opt("threads", env_threads);
    }
    overlay_common(&mut raw, common);
    extra(&mut raw);
    RunConfig::from_raw(&raw)
}

/// Parse arguments, run the subcommand and report. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let err = CliError::config("arguments", e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    let env_threads = std::env::var("KLE_THREADS").ok();
    let result = match cli.command {
        Command::Solve { common, plot } => {
            resolve(common, |r| overlay_plot(r, plot), env_threads)
                .map_err(CliError::from)
                .and_then(|c| cmd_solve(&c))
        }
        Command::Convergence {
            common,
            levels,
            sweep,
            compare_modes,
            dense_cap,
        } => resolve(
            common,
            |r| {
                r.set_opt("levels", levels);
                r.set_opt("sweep", sweep);
                r.set_opt("compare_modes", compare_modes);
                r.set_opt("dense_cap", dense_cap);
            },
            env_threads,
        )
        .map_err(CliError::from)
        .and_then(|c| cmd_convergence(&c)),
        Command::Bench {
            common,
            thread_list,
            applies,
        } => resolve(
            common,
            |r| {
                r.set_opt("thread_list", thread_list);
                r.set_opt("applies", applies);
            },
            env_threads,
        )
        .map_err(CliError::from)
        .and_then(|c| cmd_bench(&c)),
        Command::Sample {
            common,
            plot,
            count,
            sample_seed,
            mean,
        } => resolve(
            common,
            |r| {
                overlay_plot(r, plot);
                r.set_opt("count", count);
                r.set_opt("sample_seed", sample_seed);
                r.set_opt("mean", mean);
            },
            env_threads,
        )
        .map_err(CliError::from)
        .and_then(|c| cmd_sample(&c)),
    };
    match result {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("{}", json!({ "warning": w }));
            }
            for f in &outcome.files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
