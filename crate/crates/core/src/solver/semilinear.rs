//! Semilinear problems `cD^{α(x)} u = A u + f(t, u)` with continuation and blow-up detection.
//!
//! Each window starts from the last accepted state (the anchor). Its length is
//! `τ₀ = min{r₀ − β, [α₀Γ(‖α‖)/(2(‖A‖ + L₀))]^{1/α₀}, [β α₀ Γ(‖α‖)/(2M₀ + 1)]^{1/α₀}}`
//! with `β = r₀/2`, `L₀` a Lipschitz estimate of `f` on the `r₀`-ball around the anchor
//! and `M₀` a bound for `‖f(s, anchor)‖` on `[t, t + r₀]`. Iterates must stay in the
//! `β`-ball around the anchor; otherwise `r₀` is halved and the window retried.

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::engine::{Ball, Engine, Outcome};
use super::linear::{check_points, window_steps};
use super::{BlowUpTrigger, PicardConfig, SolveReport, Status, WindowStats};
use crate::domain::{
    lp_norm_slice, BoundedOperator, Field, NormExponent, OrderBounds, OrderField, TimeGrid, Trajectory,
};
use crate::error::{Error, Result};
use crate::frac_calculus::KernelWeights;
use crate::special::gamma;

/// User-supplied local Lipschitz data: `‖f(t,u) − f(t,v)‖ ≤ l0 ‖u − v‖` on balls of radius `r0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzHint {
    pub l0: f64,
    pub r0: f64,
}

/// Nonlinearity `f(t, u)`, evaluated on raw nodal values.
pub trait SemilinearRhs: Sync {
    fn eval(&self, t: f64, u: &[f64], out: &mut [f64]);

    fn lipschitz_hint(&self) -> Option<LipschitzHint> {
        None
    }

    /// Whether `f` maps bounded sets to bounded sets, the hypothesis behind the
    /// global-or-blow-up alternative. Trusted, not verified.
    fn bounded_on_bounded(&self) -> bool {
        true
    }
}

/// Closure-backed [`SemilinearRhs`].
pub struct FnRhs<F> {
    f: F,
    hint: Option<LipschitzHint>,
}

impl<F: Fn(f64, &[f64], &mut [f64]) + Sync> FnRhs<F> {
    pub fn new(f: F) -> Self {
        Self { f, hint: None }
    }

    pub fn with_hint(mut self, hint: LipschitzHint) -> Self {
        self.hint = Some(hint);
        self
    }
}

impl<F: Fn(f64, &[f64], &mut [f64]) + Sync> SemilinearRhs for FnRhs<F> {
    fn eval(&self, t: f64, u: &[f64], out: &mut [f64]) {
        (self.f)(t, u, out)
    }

    fn lipschitz_hint(&self) -> Option<LipschitzHint> {
        self.hint
    }
}

/// Parameters of one local step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParameters {
    pub r0: f64,
    pub beta: f64,
    pub l0: f64,
    pub m0: f64,
    pub tau0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemilinearConfig {
    pub picard: PicardConfig,
    pub blowup_threshold: f64,
    /// Halvings of `r₀` before a window is declared failed.
    pub max_retries: usize,
    pub lipschitz_samples: usize,
    /// Initial ball radius; defaults to `max(1, ‖anchor‖)`.
    pub r0: Option<f64>,
    pub seed: u64,
}

impl Default for SemilinearConfig {
    fn default() -> Self {
        Self {
            picard: PicardConfig::default(),
            blowup_threshold: 1e8,
            max_retries: 30,
            lipschitz_samples: 16,
            r0: None,
            seed: 0,
        }
    }
}

/// `τ₀` from its three constraints. Terms with a zero denominator drop out.
pub fn step_size_formula(bounds: OrderBounds, a_norm: f64, l0: f64, m0: f64, r0: f64, beta: f64) -> f64 {
    let (a0, g) = (bounds.alpha0, gamma(bounds.alpha_sup));
    let contraction = if a_norm + l0 > 0.0 { (a0 * g / (2.0 * (a_norm + l0))).powf(1.0 / a0) } else { f64::INFINITY };
    let confinement = (beta * a0 * g / (2.0 * m0 + 1.0)).powf(1.0 / a0);
    (r0 - beta).min(contraction).min(confinement)
}

fn finite_or_err(v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Rhs(format!("non-finite value while {what}")))
    }
}

/// Random point of the ball of radius `radius` around `center`.
fn ball_point(rng: &mut ChaCha8Rng, center: &[f64], radius: f64, weights: &[f64], p: NormExponent) -> Vec<f64> {
    let mut d: Vec<f64> = center.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = lp_norm_slice(&d, weights, p);
    let rho = radius * rng.random::<f64>();
    if norm > 0.0 {
        d.iter_mut().for_each(|v| *v *= rho / norm);
    }
    d.iter_mut().zip(center).for_each(|(v, c)| *v += c);
    d
}

fn lipschitz_slices(
    f: &dyn SemilinearRhs,
    t: f64,
    anchor: &[f64],
    weights: &[f64],
    r0: f64,
    samples: usize,
    p: NormExponent,
    seed: u64,
) -> Result<f64> {
    if samples < 2 {
        return Err(Error::invalid("samples", "need at least two samples"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = anchor.len();
    let (mut fa, mut fb, mut diff) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut best = 0.0f64;
    for _ in 0..samples {
        // Time and state offsets share the radius, as in the joint ball |s − t| + ‖v − u‖ < r₀.
        let dt = 0.5 * r0 * rng.random::<f64>();
        let radius = r0 - dt;
        let u = ball_point(&mut rng, anchor, radius, weights, p);
        let v = ball_point(&mut rng, anchor, radius, weights, p);
        f.eval(t + dt, &u, &mut fa);
        f.eval(t + dt, &v, &mut fb);
        finite_or_err(&fa, "estimating the Lipschitz constant")?;
        finite_or_err(&fb, "estimating the Lipschitz constant")?;
        diff.iter_mut().zip(&u).zip(&v).for_each(|((d, a), b)| *d = a - b);
        let du = lp_norm_slice(&diff, weights, p);
        diff.iter_mut().zip(&fa).zip(&fb).for_each(|((d, a), b)| *d = a - b);
        let df = lp_norm_slice(&diff, weights, p);
        if du > 0.0 {
            best = best.max(df / du);
        }
    }
    Ok(1.5 * best)
}

/// Sampled Lipschitz constant of `f` on the ball of radius `r0` around `(t, anchor)`,
/// inflated by 1.5.
pub fn estimate_lipschitz(
    f: &dyn SemilinearRhs,
    t: f64,
    anchor: &Field,
    r0: f64,
    samples: usize,
    p: NormExponent,
    seed: u64,
) -> Result<f64> {
    if let Some(h) = f.lipschitz_hint() {
        return Ok(h.l0);
    }
    lipschitz_slices(f, t, anchor.values(), anchor.grid().weights(), r0, samples, p, seed)
}

struct Problem<'a> {
    f: &'a dyn SemilinearRhs,
    bounds: OrderBounds,
    a_norm: f64,
    weights: &'a [f64],
    cfg: &'a SemilinearConfig,
    /// Time of node 0.
    t_offset: f64,
}

impl Problem<'_> {
    fn parameters(&self, t: f64, anchor: &[f64], r0: f64, seed: u64) -> Result<StepParameters> {
        let p = self.cfg.picard.norm;
        let l0 = match self.f.lipschitz_hint() {
            Some(h) => h.l0,
            None => lipschitz_slices(self.f, t, anchor, self.weights, r0, self.cfg.lipschitz_samples, p, seed)?,
        };
        let mut out = vec![0.0; anchor.len()];
        let mut m0 = 0.0f64;
        for i in 0..=32 {
            self.f.eval(t + r0 * i as f64 / 32.0, anchor, &mut out);
            finite_or_err(&out, "bounding f on the anchor")?;
            m0 = m0.max(lp_norm_slice(&out, self.weights, p));
        }
        let m0 = 1.1 * m0;
        let beta = 0.5 * r0;
        let tau0 = step_size_formula(self.bounds, self.a_norm, l0, m0, r0, beta);
        Ok(StepParameters { r0, beta, l0, m0, tau0 })
    }
}

struct Run {
    report: SolveReport,
    last_parameters: Option<StepParameters>,
}

fn run(
    a: &BoundedOperator,
    f: &dyn SemilinearRhs,
    alpha: &OrderField,
    u0: &Field,
    t_offset: f64,
    time: TimeGrid,
    cfg: &SemilinearConfig,
    single_window: bool,
) -> Result<Run> {
    let grid = u0.grid().clone();
    check_points(grid.len(), alpha.len())?;
    check_points(grid.len(), a.grid().len())?;
    let picard = &cfg.picard;
    let p = picard.norm;
    if !(cfg.blowup_threshold > u0.norm(p)) {
        return Err(Error::invalid("blowup_threshold", "must exceed the norm of the initial datum"));
    }
    let problem =
        Problem { f, bounds: alpha.bounds(), a_norm: a.norm_estimate(p).0, weights: grid.weights(), cfg, t_offset };
    let kernel = KernelWeights::new(time, alpha, picard.scheme)?;
    let nx = grid.len();
    let mut scratch = vec![0.0; nx];
    let mut rhs = |n: usize, u: &[f64], out: &mut [f64]| {
        a.apply_slice(u, out);
        f.eval(problem.t_offset + time.t(n), u, &mut scratch);
        out.iter_mut().zip(&scratch).for_each(|(o, s)| *o += s);
    };
    let mut engine = Engine::new(&kernel, grid.weights(), p, u0.values(), &mut rhs);
    let mut per_window = Vec::new();
    let mut window_end_norms = vec![u0.norm(p)];
    let mut last_parameters = None;
    let mut floored_warned = false;
    let mut status = Status::Completed;
    let mut last = 0;
    'windows: while last < time.steps() {
        let index = per_window.len();
        let anchor = engine.state(last).to_vec();
        let t_anchor = t_offset + time.t(last);
        let mut r0 = cfg.r0.or(f.lipschitz_hint().map(|h| h.r0)).unwrap_or_else(|| engine.norm(&anchor).max(1.0));
        let mut accepted = None;
        for attempt in 0..=cfg.max_retries {
            let seed = cfg.seed ^ ((index as u64) << 8 | attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let params = problem.parameters(t_anchor, &anchor, r0, seed)?;
            let steps = (params.tau0 / time.dt() * (1.0 + 1e-12)).floor() as usize;
            if steps == 0 && !floored_warned {
                warn!(
                    "local step {:e} is shorter than the time step at t = {t_anchor}; continuing with single steps",
                    params.tau0
                );
                floored_warned = true;
            }
            let width = window_steps(params.tau0.max(time.dt()), time.dt());
            let end = (last + width).min(time.steps());
            // A single grid step is the finest resolution available; confinement is not enforced there.
            let ball = (width > 1).then_some(Ball { center: &anchor, radius: params.beta });
            match engine.window(last, end, picard.start, picard.fixed_point_tol, picard.max_iter, &mut rhs, ball) {
                Outcome::Converged { iterations, contraction } => {
                    accepted = Some((end, iterations, contraction, params));
                    break;
                }
                _ if width == 1 => break,
                _ => r0 *= 0.5,
            }
        }
        let Some((end, iterations, contraction, params)) = accepted else {
            let tail = &window_end_norms[window_end_norms.len().saturating_sub(3)..];
            if tail.len() >= 2 && tail.windows(2).all(|w| w[1] > w[0]) {
                status = Status::BlowUp { omega_estimate: t_anchor, trigger: BlowUpTrigger::StepsExhausted };
                break 'windows;
            }
            return Err(Error::StepRejected { time: t_anchor, retries: cfg.max_retries });
        };
        per_window.push(WindowStats { index, start_step: last, steps: end - last, iterations, contraction });
        last_parameters = Some(params);
        for n in last + 1..=end {
            if engine.norm(engine.state(n)) >= cfg.blowup_threshold {
                last = n;
                status =
                    Status::BlowUp { omega_estimate: t_offset + time.t(n), trigger: BlowUpTrigger::ThresholdCrossed };
                break 'windows;
            }
        }
        window_end_norms.push(engine.norm(engine.state(end)));
        last = end;
        if single_window {
            break;
        }
    }
    let residual = engine.residual(last);
    let mut trajectory = Trajectory::new(grid, time, engine.into_states())?;
    trajectory.truncate(last);
    Ok(Run { report: SolveReport { trajectory, status, per_window, residual }, last_parameters })
}

/// One local step from `anchor` at time `t0`, treated as a fresh initial value.
/// Returns the accepted parameters and the window trajectory (time measured from `t0`).
pub fn local_step(
    a: &BoundedOperator,
    f: &dyn SemilinearRhs,
    alpha: &OrderField,
    t0: f64,
    anchor: &Field,
    time: TimeGrid,
    cfg: &SemilinearConfig,
) -> Result<(StepParameters, Trajectory)> {
    let out = run(a, f, alpha, anchor, t0, time, cfg, true)?;
    let params = out.last_parameters.ok_or(Error::StepRejected { time: t0, retries: cfg.max_retries })?;
    Ok((params, out.report.trajectory))
}

/// Continues local steps until `time.horizon()`, a threshold crossing, or step exhaustion.
pub fn solve_semilinear(
    a: &BoundedOperator,
    f: &dyn SemilinearRhs,
    alpha: &OrderField,
    u0: &Field,
    time: TimeGrid,
    cfg: &SemilinearConfig,
) -> Result<SolveReport> {
    Ok(run(a, f, alpha, u0, 0.0, time, cfg, false)?.report)
}
