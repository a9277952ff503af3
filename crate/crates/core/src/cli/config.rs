//! Run configuration: flat `key = value` files merged with command-line
//! flags. Flags win over the file, the file wins over defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::eigensolver::LanczosConfig;
use crate::geometry::{builtin, load_patch, TensorPatch};
use crate::kernels::{CovarianceKernel, GaussDenominator, KernelFamily};
use crate::operator::SpaceSpec;

/// A rejected configuration value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Parse a flat `key = value` file. `#` starts a comment; keys may use `-`
/// or `_`.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            ConfigError::new("config", format!("line {}: expected key = value", lineno + 1))
        })?;
        let key = k.trim().replace('-', "_");
        let val = v.trim().trim_matches('"').to_string();
        if key.is_empty() {
            return Err(ConfigError::new("config", format!("line {}: empty key", lineno + 1)));
        }
        out.insert(key, val);
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// Raw settings before validation; every field may come from a flag or the
/// config file.
#[derive(Debug, Clone, Default)]
pub struct RawSettings {
    pub values: BTreeMap<String, String>,
}

impl RawSettings {
    /// Overlay `key` with a flag value when present.
    pub fn set_opt<T: ToString>(&mut self, key: &str, v: Option<T>) {
        if let Some(v) = v {
            self.values.insert(key.to_string(), v.to_string());
        }
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|e| ConfigError::new(key, format!("cannot parse {s:?}: {e}"))),
        }
    }

    fn parse_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(s) => s
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|e| ConfigError::new(key, format!("cannot parse {t:?}: {e}")))
                })
                .collect::<Result<Vec<T>, _>>()
                .map(Some),
        }
    }

    fn parse_bool(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some("true" | "1" | "yes" | "on") => Ok(true),
            Some("false" | "0" | "no" | "off") => Ok(false),
            Some(s) => Err(ConfigError::new(key, format!("expected a boolean, got {s:?}"))),
        }
    }
}

/// Broadcast a one-element list to `d` directions.
fn per_direction<T: Clone>(key: &str, v: Vec<T>, d: usize) -> Result<Vec<T>, ConfigError> {
    match v.len() {
        1 => Ok(vec![v[0].clone(); d]),
        n if n == d => Ok(v),
        n => Err(ConfigError::new(
            key,
            format!("expected 1 or {d} comma-separated values, got {n}"),
        )),
    }
}

/// Refinement kind for the convergence sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    /// Halve every element size per level.
    H,
    /// Raise the interpolation degree by one per level on a fixed mesh.
    P,
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "h" => Ok(Self::H),
            "p" => Ok(Self::P),
            _ => Err("expected h or p".into()),
        }
    }
}

/// Validated settings shared by all subcommands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub geometry: String,
    pub patch: TensorPatch,
    pub kernel: CovarianceKernel,
    pub trial: Vec<SpaceSpec>,
    pub interp: Vec<SpaceSpec>,
    pub modes: usize,
    pub tol: f64,
    pub seed: u64,
    pub max_restarts: usize,
    pub krylov_dim: Option<usize>,
    pub threads: usize,
    pub output: PathBuf,
    pub plot_res: usize,
    pub vtk: bool,
    pub levels: usize,
    pub sweep: Sweep,
    pub compare_modes: usize,
    pub dense_cap: usize,
    pub thread_list: Vec<usize>,
    pub applies: usize,
    pub count: usize,
    pub sample_seed: u64,
    pub mean: f64,
}

fn resolve_geometry(name: &str) -> Result<TensorPatch, ConfigError> {
    if let Some(p) = builtin::by_name(name) {
        return Ok(p);
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(ConfigError::new(
            "geometry",
            format!(
                "{name:?} is neither a built-in ({}) nor an existing file",
                builtin::NAMES.join(", ")
            ),
        ));
    }
    load_patch(path).map_err(|e| ConfigError::new("geometry", e.to_string()))
}

fn space_specs(
    raw: &RawSettings,
    prefix: &str,
    spans: &[usize],
    default_elements: &[usize],
    default_degree: usize,
    default_continuity: Option<i32>,
    default_break: bool,
) -> Result<Vec<SpaceSpec>, ConfigError> {
    let kd = format!("{prefix}_degree");
    let ke = format!("{prefix}_elements");
    let kc = format!("{prefix}_continuity");
    let kb = format!("{prefix}_c0_break");
    let d = spans.len();
    let degrees = per_direction(&kd, raw.parse_list(&kd)?.unwrap_or(vec![default_degree]), d)?;
    let elements = match raw.parse_list::<usize>(&ke)? {
        Some(v) => per_direction(&ke, v, d)?,
        None => default_elements.to_vec(),
    };
    let continuity = match raw.parse_list::<i32>(&kc)? {
        Some(v) => per_direction(&kc, v, d)?,
        None => degrees
            .iter()
            .map(|&p| default_continuity.unwrap_or(p as i32 - 1).min(p as i32 - 1))
            .collect(),
    };
    let brk = raw.parse_bool(&kb, default_break)?;
    let mut specs = Vec::with_capacity(d);
    for k in 0..d {
        let (p, e, c) = (degrees[k], elements[k], continuity[k]);
        if p == 0 && prefix == "trial" {
            return Err(ConfigError::new(&kd, "trial degree must be at least 1"));
        }
        if e == 0 || e % spans[k] != 0 {
            return Err(ConfigError::new(
                &ke,
                format!(
                    "direction {}: {e} elements is not a positive multiple of the {} geometry spans",
                    k + 1,
                    spans[k]
                ),
            ));
        }
        if c < -1 || c >= p as i32 {
            return Err(ConfigError::new(
                &kc,
                format!("continuity {c} not in [-1, {}] for degree {p}", p as i32 - 1),
            ));
        }
        specs.push(SpaceSpec::new(p, e, c).discontinuous_at_c0(brk));
    }
    Ok(specs)
}

impl RunConfig {
    pub fn from_raw(raw: &RawSettings) -> Result<Self, ConfigError> {
        let geometry = raw.get("geometry").unwrap_or("unit-interval").to_string();
        let patch = resolve_geometry(&geometry)?;

        let family: KernelFamily = raw.parse("kernel", KernelFamily::Exponential)?;
        let variance: f64 = raw.parse("sigma2", 1.0)?;
        let corr_length: f64 = raw.parse("corrlen", 1.0)?;
        let denom: u32 = raw.parse("gauss_denom", 1)?;
        let denom = GaussDenominator::from_factor(denom)
            .map_err(|e| ConfigError::new("gauss_denom", e.to_string()))?;
        let kernel = CovarianceKernel::new(family, variance, corr_length)
            .map_err(|e| {
                let field = if variance > 0.0 && variance.is_finite() { "corrlen" } else { "sigma2" };
                ConfigError::new(field, e.to_string())
            })?
            .with_gauss_denominator(denom);

        let spans: Vec<usize> = patch.bases().iter().map(|b| b.num_elements()).collect();
        let default_el: Vec<usize> = spans.iter().map(|s| s * 16usize.div_ceil(*s)).collect();
        let trial = space_specs(raw, "trial", &spans, &default_el, 2, None, false)?;
        let trial_el: Vec<usize> = trial.iter().map(|s| s.elements).collect();
        let interp = space_specs(raw, "interp", &spans, &trial_el, 2, Some(0), true)?;

        let modes: usize = raw.parse("modes", 10)?;
        if modes == 0 {
            return Err(ConfigError::new("modes", "must be at least 1"));
        }
        let tol: f64 = raw.parse("tol", 1e-10)?;
        if !(tol > 0.0 && tol < 1.0) {
            return Err(ConfigError::new("tol", "must lie in (0, 1)"));
        }
        let threads: usize = raw.parse("threads", 1)?;
        if threads == 0 {
            return Err(ConfigError::new("threads", "must be at least 1"));
        }
        let krylov_dim = match raw.get("krylov_dim") {
            None => None,
            Some(_) => Some(raw.parse("krylov_dim", 0usize)?),
        };
        let plot_res: usize = raw.parse("plot_res", 33)?;
        if plot_res < 2 {
            return Err(ConfigError::new("plot_res", "must be at least 2"));
        }
        let thread_list = raw.parse_list::<usize>("thread_list")?.unwrap_or_else(|| vec![1, 2, 4]);
        if thread_list.is_empty() || thread_list.contains(&0) {
            return Err(ConfigError::new("thread_list", "needs at least one positive thread count"));
        }
        let levels: usize = raw.parse("levels", 4)?;
        if levels < 3 {
            return Err(ConfigError::new("levels", "a sweep needs at least 3 levels"));
        }
        let applies: usize = raw.parse("applies", 5)?;
        if applies == 0 {
            return Err(ConfigError::new("applies", "must be at least 1"));
        }
        Ok(Self {
            geometry,
            patch,
            kernel,
            trial,
            interp,
            modes,
            tol,
            seed: raw.parse("seed", 0)?,
            max_restarts: raw.parse("max_restarts", 300)?,
            krylov_dim,
            threads,
            output: PathBuf::from(raw.get("output").unwrap_or("kle-out")),
            plot_res,
            vtk: raw.parse_bool("vtk", false)?,
            levels,
            sweep: raw.parse("sweep", Sweep::H)?,
            compare_modes: raw.parse("compare_modes", 5)?,
            dense_cap: raw.parse("dense_cap", crate::operator::DENSE_CAP)?,
            thread_list,
            applies,
            count: raw.parse("count", 10)?,
            sample_seed: raw.parse("sample_seed", 0)?,
            mean: raw.parse("mean", 0.0)?,
        })
    }

    pub fn lanczos(&self) -> LanczosConfig {
        LanczosConfig {
            num_modes: self.modes,
            krylov_dim: self.krylov_dim,
            tol: self.tol,
            max_restarts: self.max_restarts,
            seed: self.seed,
        }
    }

    /// Trial and interpolation spaces of sweep level `level`.
    pub fn level_spaces(&self, level: usize) -> (Vec<SpaceSpec>, Vec<SpaceSpec>) {
        match self.sweep {
            Sweep::H => {
                let scale = |v: &[SpaceSpec]| {
                    v.iter()
                        .map(|s| SpaceSpec {
                            elements: s.elements << level,
                            ..*s
                        })
                        .collect()
                };
                (scale(&self.trial), scale(&self.interp))
            }
            Sweep::P => {
                let interp = self
                    .interp
                    .iter()
                    .map(|s| {
                        let smooth = s.continuity == s.degree as i32 - 1;
                        let degree = s.degree + level;
                        SpaceSpec {
                            degree,
                            continuity: if smooth { degree as i32 - 1 } else { s.continuity },
                            ..*s
                        }
                    })
                    .collect();
                (self.trial.clone(), interp)
            }
        }
    }
}
