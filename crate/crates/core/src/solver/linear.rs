//! Linear problems `cD^{α(x)} u = A u`.

use std::sync::Arc;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::engine::{Engine, Outcome};
use super::{PicardConfig, SolveReport, Status, WindowStats};
use crate::domain::{
    lp_norm_slice, BoundedOperator, Field, NormExponent, OrderBounds, OrderField, SpatialGrid, TimeGrid, Trajectory,
};
use crate::error::{Error, Result};
use crate::frac_calculus::{KernelWeights, Scheme};
use crate::mittag_leffler::{ml_operator_apply, ml_operator_apply_beta, piecewise_envelope, MlSeriesControl};
use crate::special::gamma;

/// `τ = min{(α₀ Γ(‖α‖) / (2‖A‖))^{1/α₀}, 1/2}`: on windows of this length the
/// integral operator is a 1/2-contraction.
pub fn picard_step_size(bounds: OrderBounds, a_norm: f64) -> f64 {
    if a_norm <= 0.0 {
        return 0.5;
    }
    let base = bounds.alpha0 * gamma(bounds.alpha_sup) / (2.0 * a_norm);
    base.powf(1.0 / bounds.alpha0).min(0.5)
}

/// Number of grid steps in a window of length `tau`, at least one.
pub(crate) fn window_steps(tau: f64, dt: f64) -> usize {
    let steps = (tau / dt * (1.0 + 1e-12)).floor();
    if steps < 1.0 {
        warn!("window length {tau:e} is shorter than the time step {dt:e}; using one step, refine the grid");
        1
    } else {
        steps as usize
    }
}

pub(crate) fn check_points(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::GridMismatch { expected, found })
    }
}

/// `T u = u₀ + J^{α}(A u) [+ J^{α} forcing]`.
pub fn apply_t(
    u: &Trajectory,
    a: &BoundedOperator,
    alpha: &OrderField,
    u0: &Field,
    forcing: Option<&Trajectory>,
    scheme: Scheme,
) -> Result<Trajectory> {
    let nx = u.grid().len();
    check_points(nx, a.grid().len())?;
    check_points(nx, u0.len())?;
    let mut au = Trajectory::zeros(u.grid().clone(), u.time());
    for n in 0..u.time().nodes() {
        a.apply_slice(u.slice(n), au.slice_mut(n));
    }
    if let Some(f) = forcing {
        au.check_compatible(f)?;
        au.data_mut().iter_mut().zip(f.data()).for_each(|(x, y)| *x += y);
    }
    let mut out = KernelWeights::new(u.time(), alpha, scheme)?.apply(&au)?;
    for n in 0..out.time().nodes() {
        out.slice_mut(n).iter_mut().zip(u0.values()).for_each(|(x, y)| *x += y);
    }
    Ok(out)
}

/// Windowed Picard solution of `cD^{α(x)} u = A u` on `time`.
pub fn solve_linear(
    a: &BoundedOperator,
    alpha: &OrderField,
    u0: &Field,
    time: TimeGrid,
    cfg: &PicardConfig,
) -> Result<SolveReport> {
    let grid = u0.grid().clone();
    check_points(grid.len(), alpha.len())?;
    check_points(grid.len(), a.grid().len())?;
    let kernel = KernelWeights::new(time, alpha, cfg.scheme)?;
    let a_norm = a.norm_estimate(cfg.norm).0;
    let tau = cfg.window_override.unwrap_or_else(|| picard_step_size(alpha.bounds(), a_norm));
    let width = window_steps(tau, time.dt());
    let mut rhs = |_: usize, u: &[f64], out: &mut [f64]| a.apply_slice(u, out);
    let mut engine = Engine::new(&kernel, grid.weights(), cfg.norm, u0.values(), &mut rhs);
    let mut per_window = Vec::new();
    let mut start = 0;
    while start < time.steps() {
        let end = (start + width).min(time.steps());
        let index = per_window.len();
        match engine.window(start, end, cfg.start, cfg.fixed_point_tol, cfg.max_iter, &mut rhs, None) {
            Outcome::Converged { iterations, contraction } => {
                per_window.push(WindowStats { index, start_step: start, steps: end - start, iterations, contraction })
            }
            Outcome::NotConverged { iterations, last_change } => {
                return Err(Error::PicardMaxIter { window: index, iterations, last_change })
            }
            Outcome::Diverged | Outcome::Escaped => {
                return Err(Error::PicardMaxIter { window: index, iterations: 0, last_change: f64::INFINITY })
            }
        }
        start = end;
    }
    let residual = engine.residual(time.steps());
    let trajectory = Trajectory::new(grid, time, engine.into_states())?;
    Ok(SolveReport { trajectory, status: Status::Completed, per_window, residual })
}

/// Result of [`commute_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommuteReport {
    pub commutes: bool,
    pub worst_residual: f64,
}

/// Tests `m_s A φ = A (m_s φ)` with `m_s(x) = s^{α(x)}/Γ(α(x)+1)` on random fields and
/// `s` drawn from nine log-spaced values in `[0.1, 10]`. Diagonal operators pass structurally.
pub fn commute_check(a: &BoundedOperator, alpha: &OrderField, samples: usize, seed: u64) -> Result<CommuteReport> {
    if samples == 0 {
        return Err(Error::invalid("samples", "need at least one sample"));
    }
    let n = alpha.len();
    check_points(n, a.grid().len())?;
    if a.is_diagonal() {
        return Ok(CommuteReport { commutes: true, worst_residual: 0.0 });
    }
    let weights = a.grid().weights();
    let p = NormExponent::TWO;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lhs, mut rhs, mut tmp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let phi: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = 10f64.powf(-1.0 + 2.0 * rng.random_range(0..9) as f64 / 8.0);
        let m: Vec<f64> = alpha.values().iter().map(|&aj| s.powf(aj) / gamma(aj + 1.0)).collect();
        a.apply_slice(&phi, &mut tmp);
        lhs.iter_mut().zip(&tmp).zip(&m).for_each(|((l, t), m)| *l = m * t);
        tmp.iter_mut().zip(&phi).zip(&m).for_each(|((t, f), m)| *t = m * f);
        a.apply_slice(&tmp, &mut rhs);
        let scale = lp_norm_slice(&lhs, weights, p).max(lp_norm_slice(&rhs, weights, p));
        tmp.iter_mut().zip(&lhs).zip(&rhs).for_each(|((t, l), r)| *t = l - r);
        let r = lp_norm_slice(&tmp, weights, p);
        if r > 0.0 {
            worst = worst.max(r / scale);
        }
    }
    Ok(CommuteReport { commutes: worst <= 1e-10, worst_residual: worst })
}

/// `E_{α(x)}(t^{α(x)} A) u₀` at every node of `time`.
pub fn series_solution(
    a: &BoundedOperator,
    alpha: &OrderField,
    u0: &Field,
    time: TimeGrid,
    ctl: &MlSeriesControl,
) -> Result<Trajectory> {
    if !commute_check(a, alpha, 16, 0)?.commutes {
        warn!("operator does not commute with the order field; the series need not solve the problem");
    }
    let slices = (0..time.nodes())
        .into_par_iter()
        .map(|k| ml_operator_apply(alpha, time.t(k), a, u0, ctl).map(Field::into_values))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(u0.grid().clone(), time, slices.concat())
}

fn sub_grid(grid: &SpatialGrid, range: std::ops::Range<usize>, left: f64, right: f64) -> Result<Arc<SpatialGrid>> {
    SpatialGrid::from_points(left, right, grid.points()[range.clone()].to_vec(), grid.weights()[range].to_vec())
}

/// Closed-form solution for `A φ(x) = ∫₀^x φ` on `(0, 1)` with `α = α₁` on `x ≤ 1/2`
/// and `α₂` beyond.
///
/// The left half evolves on its own: `u = E_{α₁}(t^{α₁} A₁) u₀`. The right half sees
/// the left mass `c(s) = ∫₀^{1/2} u(s, y) dy` as a spatially constant source:
/// `u = E_{α₂}(t^{α₂} A₂) u₀ + ∫₀^t (t−s)^{α₂−1} E_{α₂,α₂}((t−s)^{α₂} A₂) 𝟙 c(s) ds`,
/// where the time integral uses the same trapezoidal product weights as `J^{α₂}`.
pub fn volterra_example_solution(
    alpha1: f64,
    alpha2: f64,
    u0: &Field,
    time: TimeGrid,
    ctl: &MlSeriesControl,
) -> Result<Trajectory> {
    let grid = u0.grid();
    if (grid.left(), grid.right()) != (0.0, 1.0) {
        return Err(Error::invalid("grid", "the Volterra example lives on (0, 1)"));
    }
    let split = grid.points().iter().position(|&x| (x - 0.5).abs() <= 1e-12).ok_or(Error::SplitNotOnGrid)?;
    let (nl, n) = (split + 1, grid.len());
    let left_grid = sub_grid(grid, 0..nl, 0.0, 0.5)?;
    let right_grid = sub_grid(grid, nl..n, 0.5, 1.0)?;
    let a1 = BoundedOperator::volterra(left_grid.clone());
    let a2 = BoundedOperator::volterra(right_grid.clone());
    let order1 = OrderField::constant(left_grid.clone(), alpha1)?;
    let order2 = OrderField::constant(right_grid.clone(), alpha2)?;
    let u0_left = Field::new(left_grid.clone(), u0.values()[..nl].to_vec())?;
    let u0_right = Field::new(right_grid.clone(), u0.values()[nl..].to_vec())?;
    let ones = Field::constant(right_grid.clone(), 1.0)?;

    let nodes = time.nodes();
    let per_time = |f: &(dyn Fn(f64) -> Result<Field> + Sync)| -> Result<Vec<Vec<f64>>> {
        (0..nodes).into_par_iter().map(|k| f(time.t(k)).map(Field::into_values)).collect()
    };
    let left = per_time(&|t| ml_operator_apply(&order1, t, &a1, &u0_left, ctl))?;
    let free = per_time(&|t| ml_operator_apply(&order2, t, &a2, &u0_right, ctl))?;
    let response = per_time(&|r| ml_operator_apply_beta(&order2, alpha2, r, &a2, &ones, ctl))?;
    let mass: Vec<f64> = left.iter().map(|u| u.iter().zip(left_grid.weights()).map(|(v, w)| v * w).sum()).collect();

    let point = SpatialGrid::uniform(0.0, 1.0, 1)?;
    let kernel = KernelWeights::new(time, &OrderField::constant(point, alpha2)?, Scheme::L1Linear)?;
    let scale = gamma(alpha2);
    let nr = n - nl;
    let right: Vec<Vec<f64>> = (0..nodes)
        .into_par_iter()
        .map(|m| {
            let mut u = free[m].clone();
            for k in 0..=m {
                let w = scale * kernel.weight(0, m, k) * mass[k];
                if w != 0.0 {
                    u.iter_mut().zip(&response[m - k]).for_each(|(x, f)| *x += w * f);
                }
            }
            debug_assert_eq!(u.len(), nr);
            u
        })
        .collect();
    let data: Vec<f64> = left.into_iter().zip(right).flat_map(|(l, r)| l.into_iter().chain(r)).collect();
    Trajectory::new(grid.clone(), time, data)
}

/// Result of [`solution_operator_bound_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBoundReport {
    /// `(t, estimated ‖S(t)‖, M e^{Λ t})`.
    pub samples: Vec<(f64, f64, f64)>,
    pub violations: usize,
}

/// Estimates `‖S(t)‖` by maximising `‖E_{α(x)}(t^{α(x)} A) φ‖` over random unit `φ`
/// and compares with `M e^{Λ t}` for a piecewise-constant order.
pub fn solution_operator_bound_check(
    a: &BoundedOperator,
    alpha: &OrderField,
    times: &[f64],
    trials: usize,
    seed: u64,
    ctl: &MlSeriesControl,
) -> Result<OperatorBoundReport> {
    let (m, lambda) = piecewise_envelope(alpha, a.norm_estimate(ctl.norm).0)?;
    let grid = alpha.grid().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(times.len());
    let mut violations = 0;
    for &t in times {
        let mut estimate = 0.0f64;
        for _ in 0..trials {
            let raw: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = lp_norm_slice(&raw, grid.weights(), ctl.norm);
            let phi = Field::new(grid.clone(), raw.iter().map(|v| v / norm).collect())?;
            estimate = estimate.max(ml_operator_apply(alpha, t, a, &phi, ctl)?.norm(ctl.norm));
        }
        let bound = m * (lambda * t).exp();
        violations += usize::from(estimate > bound);
        samples.push((t, estimate, bound));
    }
    Ok(OperatorBoundReport { samples, violations })
}
