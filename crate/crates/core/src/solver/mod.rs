//! Solvers for `cD^{α(x)} u = A u + f(t, u)`, `u(0) = u₀`, through the equivalent
//! integral equation `u = u₀ + J^{α}(A u + f(·, u))`.

mod engine;
pub mod linear;
pub mod semilinear;

pub use engine::StartIterate;
pub use linear::{
    apply_t, commute_check, picard_step_size, series_solution, solution_operator_bound_check, solve_linear,
    volterra_example_solution, CommuteReport, OperatorBoundReport,
};
pub use semilinear::{
    estimate_lipschitz, local_step, solve_semilinear, step_size_formula, FnRhs, LipschitzHint, SemilinearConfig,
    SemilinearRhs, StepParameters,
};

use crate::domain::{NormExponent, Trajectory};
use crate::frac_calculus::Scheme;

/// Fixed-point iteration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardConfig {
    /// Relative change (sup over the window, `L^p` in space) at which a window is accepted.
    pub fixed_point_tol: f64,
    pub max_iter: usize,
    /// Window length replacing the contraction estimate.
    pub window_override: Option<f64>,
    pub scheme: Scheme,
    pub norm: NormExponent,
    pub start: StartIterate,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            fixed_point_tol: 1e-10,
            max_iter: 200,
            window_override: None,
            scheme: Scheme::L1Linear,
            norm: NormExponent::TWO,
            start: StartIterate::Hold,
        }
    }
}

/// Per-window diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStats {
    pub index: usize,
    /// First time node of the window (the last frozen node).
    pub start_step: usize,
    pub steps: usize,
    pub iterations: usize,
    /// Largest ratio of successive iterate changes; 0 when fewer than two changes were measurable.
    pub contraction: f64,
}

/// Why a run ended before its horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowUpTrigger {
    /// `‖u(t)‖_p` reached the configured threshold.
    ThresholdCrossed,
    /// Every retry of the local step failed while the norm was growing.
    StepsExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Status {
    Completed,
    /// `omega_estimate` is the last accepted grid time, an under-estimate of the blow-up time.
    BlowUp {
        omega_estimate: f64,
        trigger: BlowUpTrigger,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub trajectory: Trajectory,
    pub status: Status,
    pub per_window: Vec<WindowStats>,
    /// `max_n ‖u_n − (T u)_n‖_p` over the returned trajectory.
    pub residual: f64,
}

impl SolveReport {
    pub fn max_contraction(&self) -> f64 {
        self.per_window.iter().map(|w| w.contraction).fold(0.0, f64::max)
    }

    pub fn final_norm(&self, p: NormExponent) -> f64 {
        self.trajectory.norm_at(self.trajectory.time().steps(), p)
    }
}
