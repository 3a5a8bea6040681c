//! Turns a [`LoadedConfig`] into core inputs and runs the matching solver.

use std::path::Path;
use std::sync::Arc;

use varfrac::sir::{simulate_sir, CouplingMode, SirParams, SirReport, SirState};
use varfrac::solver::{
    solve_linear, solve_semilinear, PicardConfig, SemilinearConfig, SemilinearRhs, SolveReport, StartIterate,
};
use varfrac::{BoundedOperator, Field, NormExponent, OrderField, Scheme, SpatialGrid, TimeGrid};

use crate::config::{
    CouplingName, LoadedConfig, OperatorConfig, ProblemKind, Profile, RhsConfig, SchemeName, StartName,
};
use crate::error::{at_key, CliError};

/// Result of one configured run.
#[derive(Debug, Clone, PartialEq)]
pub enum RunOutput {
    Solve(SolveReport),
    Sir(SirReport),
}

impl RunOutput {
    pub fn report(&self) -> &SolveReport {
        match self {
            Self::Solve(r) => r,
            Self::Sir(r) => &r.report,
        }
    }
}

/// Reads a CSV with a header row and two numeric columns.
fn read_pairs(path: &Path, key: &'static str) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| csv_error(path, e))?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let field = |i: usize| -> Result<f64, CliError> {
            record
                .get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| CliError::config(key, format!("{}: row {} needs two numbers", path.display(), line + 1)))
        };
        xs.push(field(0)?);
        ys.push(field(1)?);
    }
    if xs.is_empty() {
        return Err(CliError::config(key, format!("{} has no rows", path.display())));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::config(key, format!("{}: first column must be strictly increasing", path.display())));
    }
    Ok((xs, ys))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Parse(format!("{}: {other:?}", path.display())),
    }
}

/// Piecewise-linear interpolant through `(xs, ys)`, extended linearly past both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolant {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Interpolant {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        debug_assert_eq!(xs.len(), ys.len());
        Self { xs, ys }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if n == 1 {
            return self.ys[0];
        }
        let i = self.xs.partition_point(|&v| v <= x).clamp(1, n - 1);
        let (x0, x1, y0, y1) = (self.xs[i - 1], self.xs[i], self.ys[i - 1], self.ys[i]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

fn profile_values(
    profile: &Profile,
    grid: &SpatialGrid,
    loaded: &LoadedConfig,
    key: &'static str,
) -> Result<Vec<f64>, CliError> {
    let xs = grid.points();
    Ok(match profile {
        Profile::Constant { value } => vec![*value; xs.len()],
        Profile::Linear { left, right } => {
            let (a, len) = (grid.left(), grid.length());
            xs.iter().map(|x| left + (right - left) * (x - a) / len).collect()
        }
        Profile::Piecewise { pieces } => {
            if pieces.is_empty() {
                return Err(CliError::config(key, "needs at least one piece"));
            }
            if pieces.windows(2).any(|w| w[1][0] <= w[0][0]) {
                return Err(CliError::config(key, "piece breakpoints must be increasing"));
            }
            xs.iter().map(|&x| pieces.iter().find(|p| x <= p[0]).unwrap_or(&pieces[pieces.len() - 1])[1]).collect()
        }
        Profile::Table { file } => {
            let path = loaded.resolve(file);
            let (tx, ty) = read_pairs(&path, key)?;
            let slack = 1e-12 * grid.length();
            if xs.iter().any(|&x| x < tx[0] - slack || x > tx[tx.len() - 1] + slack) {
                return Err(CliError::config(key, format!("{} does not cover the grid", path.display())));
            }
            let f = Interpolant::new(tx, ty);
            xs.iter().map(|&x| f.eval(x)).collect()
        }
    })
}

fn field(
    profile: &Profile,
    grid: &Arc<SpatialGrid>,
    loaded: &LoadedConfig,
    key: &'static str,
) -> Result<Field, CliError> {
    let values = profile_values(profile, grid, loaded, key)?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::config(key, "values must be finite"));
    }
    Field::new(grid.clone(), values).map_err(at_key(key))
}

pub fn order_field(loaded: &LoadedConfig, grid: &Arc<SpatialGrid>) -> Result<OrderField, CliError> {
    let key = "order";
    match &loaded.config.order {
        Profile::Constant { value } => OrderField::constant(grid.clone(), *value),
        Profile::Piecewise { pieces } => {
            let pieces: Vec<(f64, f64)> = pieces.iter().map(|p| (p[0], p[1])).collect();
            OrderField::piecewise(grid.clone(), &pieces)
        }
        other => OrderField::new(grid.clone(), profile_values(other, grid, loaded, key)?),
    }
    .map_err(at_key(key))
}

fn operator(loaded: &LoadedConfig, grid: &Arc<SpatialGrid>) -> Result<BoundedOperator, CliError> {
    Ok(match &loaded.config.operator {
        OperatorConfig::Zero => BoundedOperator::zero(grid.clone()),
        OperatorConfig::Volterra => BoundedOperator::volterra(grid.clone()),
        OperatorConfig::Multiplication { psi } => {
            BoundedOperator::multiplication(&field(psi, grid, loaded, "operator.psi")?)
        }
        OperatorConfig::Dense { file } => {
            let path = loaded.resolve(file);
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(false)
                .trim(csv::Trim::All)
                .from_path(&path)
                .map_err(|e| csv_error(&path, e))?;
            let mut matrix = Vec::with_capacity(grid.len() * grid.len());
            for record in reader.records() {
                let record = record.map_err(|e| csv_error(&path, e))?;
                for v in record.iter() {
                    matrix.push(v.parse::<f64>().map_err(|e| CliError::config("operator.file", e))?);
                }
            }
            BoundedOperator::dense(grid.clone(), matrix).map_err(at_key("operator.file"))?
        }
    })
}

fn picard(loaded: &LoadedConfig) -> Result<PicardConfig, CliError> {
    let s = &loaded.config.solver;
    Ok(PicardConfig {
        fixed_point_tol: s.fixed_point_tol,
        max_iter: s.max_iter,
        window_override: s.window,
        scheme: match s.scheme {
            SchemeName::L1Linear => Scheme::L1Linear,
            SchemeName::Rectangle => Scheme::Rectangle,
        },
        norm: NormExponent::new(s.norm.value()).map_err(at_key("solver.norm"))?,
        start: match s.start {
            StartName::Hold => StartIterate::Hold,
            StartName::Zero => StartIterate::Zero,
        },
    })
}

fn semilinear(loaded: &LoadedConfig) -> Result<SemilinearConfig, CliError> {
    let s = &loaded.config.solver;
    if let Some(r0) = s.r0 {
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(CliError::config("solver.r0", "must be positive"));
        }
    }
    Ok(SemilinearConfig {
        picard: picard(loaded)?,
        blowup_threshold: s.blowup_threshold,
        max_retries: s.max_retries,
        lipschitz_samples: s.lipschitz_samples,
        r0: s.r0,
        seed: loaded.config.seed,
    })
}

/// Built-in nonlinearities; all act pointwise and ignore `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum BuiltinRhs {
    Quadratic(f64),
    Decay(f64),
    Table(Interpolant),
}

impl SemilinearRhs for BuiltinRhs {
    fn eval(&self, _t: f64, u: &[f64], out: &mut [f64]) {
        for (o, &v) in out.iter_mut().zip(u) {
            *o = match self {
                Self::Quadratic(c) => c * v * v,
                Self::Decay(c) => -c * v,
                Self::Table(f) => f.eval(v),
            };
        }
    }
}

fn rhs(loaded: &LoadedConfig) -> Result<BuiltinRhs, CliError> {
    match loaded.config.rhs.as_ref().ok_or_else(|| CliError::config("rhs", "is required"))? {
        RhsConfig::Quadratic { coefficient } => Ok(BuiltinRhs::Quadratic(*coefficient)),
        RhsConfig::Decay { rate } => Ok(BuiltinRhs::Decay(*rate)),
        RhsConfig::Table { file } => {
            let (u, f) = read_pairs(&loaded.resolve(file), "rhs.file")?;
            Ok(BuiltinRhs::Table(Interpolant::new(u, f)))
        }
    }
}

/// Builds every input, then runs the configured problem.
pub fn execute(loaded: &LoadedConfig) -> Result<RunOutput, CliError> {
    let c = &loaded.config;
    let grid = SpatialGrid::uniform(c.grid.left, c.grid.right, c.grid.points).map_err(at_key("grid"))?;
    let time = TimeGrid::new(c.time.horizon, c.time.steps).map_err(at_key("time"))?;
    let alpha = order_field(loaded, &grid)?;
    match c.problem {
        ProblemKind::Linear => {
            let a = operator(loaded, &grid)?;
            let u0 = field(c.initial.as_ref().expect("validated"), &grid, loaded, "initial")?;
            let cfg = picard(loaded)?;
            Ok(RunOutput::Solve(solve_linear(&a, &alpha, &u0, time, &cfg)?))
        }
        ProblemKind::Semilinear => {
            let a = operator(loaded, &grid)?;
            let u0 = field(c.initial.as_ref().expect("validated"), &grid, loaded, "initial")?;
            let f = rhs(loaded)?;
            let cfg = semilinear(loaded)?;
            Ok(RunOutput::Solve(solve_semilinear(&a, &f, &alpha, &u0, time, &cfg)?))
        }
        ProblemKind::Sir => {
            let sir = c.sir.as_ref().expect("validated");
            let initial = SirState::new(
                field(&sir.s0, &grid, loaded, "sir.s0")?,
                field(&sir.i0, &grid, loaded, "sir.i0")?,
                field(&sir.r0, &grid, loaded, "sir.r0")?,
            )
            .map_err(at_key("sir"))?;
            let params = SirParams {
                beta: sir.beta,
                gamma: sir.gamma,
                coupling: match sir.coupling {
                    CouplingName::Nonlocal => CouplingMode::NonlocalPaper,
                    CouplingName::Local => CouplingMode::LocalClassical,
                },
            };
            if !(params.beta >= 0.0 && params.gamma >= 0.0) {
                return Err(CliError::config("sir", "beta and gamma must be nonnegative"));
            }
            if initial.s.values().iter().chain(initial.i.values()).chain(initial.r.values()).any(|v| *v < 0.0) {
                return Err(CliError::config("sir", "initial compartments must be nonnegative"));
            }
            let cfg = semilinear(loaded)?;
            Ok(RunOutput::Sir(simulate_sir(&initial, &params, &alpha, time, &cfg)?))
        }
    }
}
