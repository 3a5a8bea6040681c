//! TOML run configuration.
//!
//! ```toml
//! problem = "linear"            # linear | semilinear | sir
//! seed = 7
//!
//! [grid]
//! points = 200                  # uniform grid on [left, right), nodes at left cell ends
//! left = 0.0
//! right = 1.0
//!
//! [time]
//! horizon = 1.0
//! steps = 4096
//!
//! [order]                       # any profile, see below
//! kind = "piecewise"
//! pieces = [[0.5, 0.5], [1.0, 0.8]]
//!
//! [operator]
//! kind = "volterra"             # zero | multiplication | volterra | dense
//!
//! [initial]
//! kind = "constant"
//! value = 1.0
//!
//! [solver]
//! norm = 2.0                    # or "inf"
//! scheme = "l1-linear"          # or "rectangle"
//!
//! [output]
//! csv = "out/volterra.csv"
//! ```
//!
//! A profile is one of
//! `{ kind = "constant", value }`, `{ kind = "linear", left, right }` (values at the
//! interval ends), `{ kind = "piecewise", pieces = [[upper, value], ...] }` or
//! `{ kind = "table", file }`, a two-column CSV `(x, value)` with a header row,
//! linearly interpolated onto the grid. Table paths are relative to the config file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Linear,
    Semilinear,
    Sir,
}

impl ProblemKind {
    pub fn subcommand(self) -> &'static str {
        match self {
            Self::Linear => "solve-linear",
            Self::Semilinear => "solve-semilinear",
            Self::Sir => "simulate-sir",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemKind,
    #[serde(default)]
    pub seed: u64,
    pub grid: GridConfig,
    pub time: TimeConfig,
    pub order: Profile,
    #[serde(default)]
    pub operator: OperatorConfig,
    /// Initial datum; required except for `sir`, which uses `[sir]`.
    pub initial: Option<Profile>,
    #[serde(default)]
    pub solver: SolverConfig,
    pub rhs: Option<RhsConfig>,
    pub sir: Option<SirConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub points: usize,
    #[serde(default)]
    pub left: f64,
    #[serde(default = "one")]
    pub right: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub horizon: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    Constant { value: f64 },
    Linear { left: f64, right: f64 },
    Piecewise { pieces: Vec<[f64; 2]> },
    Table { file: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorConfig {
    #[default]
    Zero,
    /// `(A u)(x) = ψ(x) u(x)`.
    Multiplication { psi: Profile },
    /// `(A u)(x) = ∫_left^x u`.
    Volterra,
    /// Row-major matrix acting on nodal values, read from a headerless CSV.
    Dense { file: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    #[default]
    L1Linear,
    Rectangle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartName {
    #[default]
    Hold,
    Zero,
}

/// `p` as a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum NormSpec {
    Finite(f64),
    Named(NormName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormName {
    Inf,
}

impl Default for NormSpec {
    fn default() -> Self {
        Self::Finite(2.0)
    }
}

impl NormSpec {
    pub fn value(self) -> f64 {
        match self {
            Self::Finite(p) => p,
            Self::Named(NormName::Inf) => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub norm: NormSpec,
    #[serde(default)]
    pub scheme: SchemeName,
    #[serde(default = "default_tol")]
    pub fixed_point_tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Window length overriding the contraction estimate.
    pub window: Option<f64>,
    #[serde(default)]
    pub start: StartName,
    #[serde(default = "default_threshold")]
    pub blowup_threshold: f64,
    #[serde(default = "default_retries")]
    pub max_retries: usize,
    #[serde(default = "default_lipschitz_samples")]
    pub lipschitz_samples: usize,
    /// Initial ball radius of the semilinear step.
    pub r0: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            norm: NormSpec::default(),
            scheme: SchemeName::default(),
            fixed_point_tol: default_tol(),
            max_iter: default_max_iter(),
            window: None,
            start: StartName::default(),
            blowup_threshold: default_threshold(),
            max_retries: default_retries(),
            lipschitz_samples: default_lipschitz_samples(),
            r0: None,
        }
    }
}

/// Built-in nonlinearities for `solve-semilinear`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RhsConfig {
    /// `f(u) = c u²`.
    Quadratic {
        #[serde(default = "one")]
        coefficient: f64,
    },
    /// `f(u) = −c u`.
    Decay {
        #[serde(default = "one")]
        rate: f64,
    },
    /// `f(u)` interpolated from a two-column CSV `(u, f)` with a header row,
    /// extended linearly beyond its ends.
    Table { file: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SirConfig {
    #[serde(default = "default_sir_beta")]
    pub beta: f64,
    #[serde(default = "default_sir_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub coupling: CouplingName,
    pub s0: Profile,
    pub i0: Profile,
    pub r0: Profile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingName {
    #[default]
    Nonlocal,
    Local,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: Option<PathBuf>,
    /// `simulate-sir` only: per-node diagnostics.
    pub diagnostics: Option<PathBuf>,
    /// Write every `stride`-th time node (the last node is always written).
    #[serde(default = "one_usize")]
    pub stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { csv: None, diagnostics: None, stride: 1 }
    }
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_iter() -> usize {
    200
}

fn default_threshold() -> f64 {
    1e8
}

fn default_retries() -> usize {
    30
}

fn default_lipschitz_samples() -> usize {
    16
}

fn default_sir_beta() -> f64 {
    0.5
}

fn default_sir_gamma() -> f64 {
    0.2
}

/// A parsed config with the directory its relative table paths refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
}

impl LoadedConfig {
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    validate(&config)?;
    Ok(config)
}

pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let config = parse(&text)?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(LoadedConfig { config, base_dir })
}

fn require(ok: bool, key: &'static str, reason: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::config(key, reason))
    }
}

/// Schema checks that do not need the grid; value ranges are checked again when built.
fn validate(c: &RunConfig) -> Result<(), CliError> {
    require(c.grid.points >= 1, "grid.points", "must be at least 1")?;
    require(c.grid.left < c.grid.right, "grid.left", "must be below grid.right")?;
    require(c.time.horizon > 0.0 && c.time.horizon.is_finite(), "time.horizon", "must be positive")?;
    require(c.time.steps >= 1, "time.steps", "must be at least 1")?;
    require(c.output.stride >= 1, "output.stride", "must be at least 1")?;
    require(c.solver.fixed_point_tol > 0.0, "solver.fixed_point_tol", "must be positive")?;
    require(c.solver.max_iter >= 1, "solver.max_iter", "must be at least 1")?;
    require(c.solver.norm.value() >= 1.0, "solver.norm", "must be at least 1 or \"inf\"")?;
    require(c.solver.blowup_threshold > 0.0, "solver.blowup_threshold", "must be positive")?;
    if let Some(w) = c.solver.window {
        require(w > 0.0, "solver.window", "must be positive")?;
    }
    match c.problem {
        ProblemKind::Linear => {
            require(c.initial.is_some(), "initial", "is required for linear problems")?;
            require(c.rhs.is_none(), "rhs", "only applies to semilinear problems")?;
            require(c.sir.is_none(), "sir", "only applies to sir problems")?;
        }
        ProblemKind::Semilinear => {
            require(c.initial.is_some(), "initial", "is required for semilinear problems")?;
            require(c.rhs.is_some(), "rhs", "is required for semilinear problems")?;
            require(c.sir.is_none(), "sir", "only applies to sir problems")?;
        }
        ProblemKind::Sir => {
            require(c.sir.is_some(), "sir", "is required for sir problems")?;
            require(c.initial.is_none(), "initial", "sir problems take s0, i0 and r0 under [sir]")?;
            require(c.rhs.is_none(), "rhs", "only applies to semilinear problems")?;
            require(c.operator == OperatorConfig::Zero, "operator", "sir problems run with A = 0")?;
        }
    }
    require(
        c.output.diagnostics.is_none() || c.problem == ProblemKind::Sir,
        "output.diagnostics",
        "only applies to sir problems",
    )
}
