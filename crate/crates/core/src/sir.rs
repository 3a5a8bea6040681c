//! Space-structured SIR model with a fractional order in time.
//!
//! ```text
//! cD^{α(x)} S = −β S I
//! cD^{α(x)} I =  β S K[I] − γ I
//! cD^{α(x)} R =  γ I
//! ```
//!
//! with `K[I](x) = ∫₀^x I(y) dy` ([`CouplingMode::NonlocalPaper`]) or `K[I] = I`
//! ([`CouplingMode::LocalClassical`], which conserves `S + I + R` pointwise).
//! The three compartments are stacked on three tiles of the spatial grid and
//! solved as one semilinear problem with `A = 0`.

use std::sync::Arc;

use log::warn;

use crate::domain::{lp_norm_slice, BoundedOperator, Field, OrderField, SpatialGrid, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::solver::{solve_semilinear, SemilinearConfig, SemilinearRhs, SolveReport};

/// Compartments below this value trigger a resolution warning.
const NEGATIVITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CouplingMode {
    /// Infection driven by the cumulative infected mass `∫₀^x I`.
    #[default]
    NonlocalPaper,
    /// Classical mass action `β S I`.
    LocalClassical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirParams {
    pub beta: f64,
    pub gamma: f64,
    pub coupling: CouplingMode,
}

impl Default for SirParams {
    fn default() -> Self {
        Self { beta: 0.5, gamma: 0.2, coupling: CouplingMode::NonlocalPaper }
    }
}

impl SirParams {
    fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid("sir.beta", "must be a nonnegative number"));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid("sir.gamma", "must be a nonnegative number"));
        }
        Ok(())
    }
}

/// Susceptible, infected and recovered fractions on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SirState {
    pub s: Field,
    pub i: Field,
    pub r: Field,
}

impl SirState {
    pub fn new(s: Field, i: Field, r: Field) -> Result<Self> {
        if s.grid() != i.grid() || s.grid() != r.grid() {
            return Err(Error::invalid("sir", "compartments must share one grid"));
        }
        Ok(Self { s, i, r })
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        self.s.grid()
    }

    fn stacked(&self) -> Vec<f64> {
        [self.s.values(), self.i.values(), self.r.values()].concat()
    }
}

/// Right-hand side on the stacked state `[S | I | R]`.
#[derive(Debug, Clone)]
pub struct SirRhs {
    params: SirParams,
    volterra: BoundedOperator,
}

impl SirRhs {
    pub fn new(grid: Arc<SpatialGrid>, params: SirParams) -> Self {
        Self { params, volterra: BoundedOperator::volterra(grid) }
    }

    fn coupling(&self, i: &[f64], out: &mut [f64]) {
        match self.params.coupling {
            CouplingMode::NonlocalPaper => self.volterra.apply_slice(i, out),
            CouplingMode::LocalClassical => out.copy_from_slice(i),
        }
    }
}

impl SemilinearRhs for SirRhs {
    fn eval(&self, _t: f64, u: &[f64], out: &mut [f64]) {
        let n = u.len() / 3;
        let (s, rest) = u.split_at(n);
        let (i, _) = rest.split_at(n);
        let (ds, rest) = out.split_at_mut(n);
        let (di, dr) = rest.split_at_mut(n);
        self.coupling(i, di);
        let (b, g) = (self.params.beta, self.params.gamma);
        for j in 0..n {
            ds[j] = -b * s[j] * i[j];
            di[j] = b * s[j] * di[j] - g * i[j];
            dr[j] = g * i[j];
        }
    }
}

/// Right-hand side evaluated on a state.
pub fn sir_rhs(t: f64, state: &SirState, params: &SirParams) -> Result<SirState> {
    params.validate()?;
    let grid = state.grid().clone();
    let u = state.stacked();
    let mut out = vec![0.0; u.len()];
    SirRhs::new(grid.clone(), *params).eval(t, &u, &mut out);
    let n = grid.len();
    SirState::new(
        Field::new(grid.clone(), out[..n].to_vec())?,
        Field::new(grid.clone(), out[n..2 * n].to_vec())?,
        Field::new(grid, out[2 * n..].to_vec())?,
    )
}

/// Per-node diagnostics of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirDiagnostic {
    pub t: f64,
    /// `‖β S (K[I] − I)‖_p`, the amount by which the nonlocal model breaks conservation.
    pub defect_norm: f64,
    /// `‖S + I + R‖_p`.
    pub total_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SirReport {
    /// Solver report on the stacked state.
    pub report: SolveReport,
    pub s: Trajectory,
    pub i: Trajectory,
    pub r: Trajectory,
    pub diagnostics: Vec<SirDiagnostic>,
}

/// Runs the model with `A = 0` and `f` the SIR right-hand side.
pub fn simulate_sir(
    initial: &SirState,
    params: &SirParams,
    alpha: &OrderField,
    time: TimeGrid,
    cfg: &SemilinearConfig,
) -> Result<SirReport> {
    params.validate()?;
    let grid = initial.grid().clone();
    if alpha.grid() != &grid {
        return Err(Error::GridMismatch { expected: grid.len(), found: alpha.len() });
    }
    if initial.stacked().iter().any(|v| *v < 0.0) {
        return Err(Error::invalid("sir.initial", "compartments must be nonnegative"));
    }
    let n = grid.len();
    let stacked_grid = grid.tiled(3);
    let stacked_alpha = alpha.tiled(stacked_grid.clone(), 3)?;
    let u0 = Field::new(stacked_grid.clone(), initial.stacked())?;
    let rhs = SirRhs::new(grid.clone(), *params);
    let report = solve_semilinear(&BoundedOperator::zero(stacked_grid), &rhs, &stacked_alpha, &u0, time, cfg)?;

    let traj = &report.trajectory;
    let run_time = traj.time();
    let split = |c: usize| {
        let data = (0..run_time.nodes()).flat_map(|k| traj.slice(k)[c * n..(c + 1) * n].to_vec()).collect();
        Trajectory::new(grid.clone(), run_time, data)
    };
    let (s, i, r) = (split(0)?, split(1)?, split(2)?);
    if [&s, &i, &r].iter().any(|c| c.data().iter().any(|v| *v < -NEGATIVITY_TOLERANCE)) {
        warn!("a compartment dropped below {NEGATIVITY_TOLERANCE:e}; the time grid may be too coarse");
    }

    let p = cfg.picard.norm;
    let mut coupled = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let diagnostics = (0..run_time.nodes())
        .map(|k| {
            rhs.volterra.apply_slice(i.slice(k), &mut coupled);
            let (sk, ik, rk) = (s.slice(k), i.slice(k), r.slice(k));
            for (j, d) in scratch.iter_mut().enumerate() {
                *d = params.beta * sk[j] * (coupled[j] - ik[j]);
            }
            let defect_norm = lp_norm_slice(&scratch, grid.weights(), p);
            for (j, d) in scratch.iter_mut().enumerate() {
                *d = sk[j] + ik[j] + rk[j];
            }
            SirDiagnostic { t: run_time.t(k), defect_norm, total_norm: lp_norm_slice(&scratch, grid.weights(), p) }
        })
        .collect();
    Ok(SirReport { report, s, i, r, diagnostics })
}
