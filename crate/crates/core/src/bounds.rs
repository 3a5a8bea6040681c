//! Kernel and Gamma-function inequalities as executable predicates.
//!
//! Every predicate returns a signed margin: nonnegative when the inequality holds,
//! scaled so that magnitudes are comparable to 1. The sampling suites draw
//! `α₀ ~ U(0.05, 0.95)`, `γ ~ U(α₀, 1)` and `s ~ exp(U(−6, 6))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::domain::{NormExponent, OrderBounds, OrderField, SpatialGrid, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::frac_calculus::{frac_integral, Scheme};
use crate::special::{gamma, GAMMA_ARGMIN, GAMMA_MIN};

/// Violations are counted only below this margin.
pub const VIOLATION_SLACK: f64 = 1e-12;

/// Location and value of the minimum of Γ on `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaMinimum {
    pub eta: f64,
    pub gamma_at_eta: f64,
}

impl Default for GammaMinimum {
    fn default() -> Self {
        Self { eta: GAMMA_ARGMIN, gamma_at_eta: GAMMA_MIN }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive, got {v}")))
    }
}

/// `(lower, upper)` with `lower ≤ s^{α(x)−1} ≤ upper` for every admissible order.
pub fn kernel_pointwise_bounds(b: OrderBounds, s: f64) -> Result<(f64, f64)> {
    positive("s", s)?;
    let lo = s.powf(b.alpha0 - 1.0);
    let hi = s.powf(b.alpha_sup - 1.0);
    Ok(if s <= 1.0 { (hi, lo) } else { (lo, hi) })
}

/// `|s₂^{α₀−1} − s₁^{α₀−1}|/α₀ + |s₂^{‖α‖−1} − s₁^{‖α‖−1}|/‖α‖`.
pub fn kernel_difference_bound(b: OrderBounds, s1: f64, s2: f64) -> Result<f64> {
    positive("s1", s1)?;
    positive("s2", s2)?;
    let term = |a: f64| (s2.powf(a - 1.0) - s1.powf(a - 1.0)).abs() / a;
    Ok(term(b.alpha0) + term(b.alpha_sup))
}

/// `(1/Γ(‖α‖)) [T^{α₀}/α₀ + T^{‖α‖}/‖α‖]`, a bound for `J^{α(x)}` in sup-over-time `L^p`.
pub fn integral_operator_bound(b: OrderBounds, horizon: f64) -> Result<f64> {
    positive("horizon", horizon)?;
    Ok((horizon.powf(b.alpha0) / b.alpha0 + horizon.powf(b.alpha_sup) / b.alpha_sup) / gamma(b.alpha_sup))
}

/// Outcome of [`lemma_predicates`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaCheck {
    /// `None` when `y` lies outside `[e^{1/(1−θ)}, e^{1/(1−γ)}]`.
    pub aux_positive: Option<bool>,
    pub power_comparison: bool,
}

fn check_lemma_params(theta: f64, gamma: f64, beta: f64) -> Result<()> {
    if !(0.0 < theta && theta < gamma && gamma < 1.0) {
        return Err(Error::invalid("theta", format!("need 0 < theta < gamma < 1, got ({theta}, {gamma})")));
    }
    if !(theta..=gamma).contains(&beta) {
        return Err(Error::invalid("beta", format!("need beta in [{theta}, {gamma}], got {beta}")));
    }
    Ok(())
}

/// `((1−θ)/θ) y^θ + ((1−γ)/γ) y^γ − y/(e log y)` divided by `y/(e log y)`, with `x = log y`.
/// Positive exactly when the unscaled expression is.
pub fn aux_positive_margin(theta: f64, gamma: f64, log_y: f64) -> f64 {
    let x = log_y;
    let e = std::f64::consts::E;
    (1.0 - theta) / theta * e * x * (x * (theta - 1.0)).exp()
        + (1.0 - gamma) / gamma * e * x * (x * (gamma - 1.0)).exp()
        - 1.0
}

/// `1 − (1−β) y^β / [((1−θ)/θ) y^θ + ((1−γ)/γ) y^γ]`, nonnegative when the comparison holds.
pub fn power_comparison_margin(theta: f64, gamma: f64, beta: f64, log_y: f64) -> f64 {
    let rhs =
        (1.0 - theta) / theta * ((theta - beta) * log_y).exp() + (1.0 - gamma) / gamma * ((gamma - beta) * log_y).exp();
    1.0 - (1.0 - beta) / rhs
}

/// Evaluates the two auxiliary power inequalities at `y`.
pub fn lemma_predicates(theta: f64, gamma: f64, beta: f64, y: f64) -> Result<LemmaCheck> {
    check_lemma_params(theta, gamma, beta)?;
    positive("y", y)?;
    let x = y.ln();
    let inside = (1.0 / (1.0 - theta)..=1.0 / (1.0 - gamma)).contains(&x);
    Ok(LemmaCheck {
        aux_positive: inside.then(|| aux_positive_margin(theta, gamma, x) > 0.0),
        power_comparison: power_comparison_margin(theta, gamma, beta, x) >= 0.0,
    })
}

/// One line of the `verify-inequalities` table.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRow {
    pub predicate: &'static str,
    pub samples: usize,
    pub violations: usize,
    pub worst_margin: f64,
}

impl SuiteRow {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Names of the suites in the order [`run_suites`] reports them.
pub const SUITES: [&str; 6] = [
    "gamma_ordering",
    "kernel_pointwise",
    "kernel_difference",
    "aux_positive",
    "power_comparison",
    "integral_operator_norm",
];

const CHUNK: usize = 4096;

/// Runs `samples` draws of `margin` in parallel. Deterministic for a given seed
/// regardless of thread count: chunk `c` uses its own stream.
fn sample(name: &'static str, samples: usize, seed: u64, margin: impl Fn(&mut ChaCha8Rng) -> f64 + Sync) -> SuiteRow {
    let chunks = samples.div_ceil(CHUNK);
    let (violations, worst) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64 + 1);
            let n = CHUNK.min(samples - c * CHUNK);
            (0..n).fold((0usize, f64::INFINITY), |(v, w), _| {
                let m = margin(&mut rng);
                (v + usize::from(!(m >= -VIOLATION_SLACK)), w.min(m))
            })
        })
        .reduce(|| (0, f64::INFINITY), |a, b| (a.0 + b.0, a.1.min(b.1)));
    SuiteRow { predicate: name, samples, violations, worst_margin: worst }
}

fn draw_bounds(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let a0 = rng.random_range(0.05..0.95);
    let g = rng.random_range(a0..1.0);
    (a0, g)
}

fn draw_s(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-6.0f64..6.0).exp()
}

/// Margin of `Γ(η) < Γ(‖α‖) ≤ Γ(α_j) ≤ Γ(α₀)` for a random order field of eight values.
pub fn gamma_ordering_suite(samples: usize, seed: u64) -> SuiteRow {
    sample(SUITES[0], samples, seed, |rng| {
        let (a0, sup) = draw_bounds(rng);
        let g_sup = gamma(sup);
        let mut m = g_sup - GAMMA_MIN;
        for _ in 0..8 {
            let g = gamma(rng.random_range(a0..=sup));
            m = m.min(g - g_sup).min(gamma(a0) - g);
        }
        m
    })
}

/// Relative margin of `lower ≤ s^{β−1} ≤ upper`.
pub fn kernel_pointwise_suite(samples: usize, seed: u64) -> SuiteRow {
    sample(SUITES[1], samples, seed, |rng| {
        let (a0, sup) = draw_bounds(rng);
        let beta = rng.random_range(a0..=sup);
        let s = draw_s(rng);
        let (lo, hi) = kernel_pointwise_bounds(OrderBounds { alpha0: a0, alpha_sup: sup }, s).expect("s > 0");
        let v = s.powf(beta - 1.0);
        (v - lo).min(hi - v) / v
    })
}

/// Relative margin of `|s₂^{β−1} − s₁^{β−1}| ≤ kernel_difference_bound`.
pub fn kernel_difference_suite(samples: usize, seed: u64) -> SuiteRow {
    sample(SUITES[2], samples, seed, |rng| {
        let (a0, sup) = draw_bounds(rng);
        let beta = rng.random_range(a0..=sup);
        let (s1, s2) = (draw_s(rng), draw_s(rng));
        let bound = kernel_difference_bound(OrderBounds { alpha0: a0, alpha_sup: sup }, s1, s2).expect("s > 0");
        let lhs = (s2.powf(beta - 1.0) - s1.powf(beta - 1.0)).abs();
        let scale = bound.max(lhs);
        if scale == 0.0 {
            0.0
        } else {
            (bound - lhs) / scale
        }
    })
}

/// `log y` uniform over `[1/(1−θ), 1/(1−γ)]`.
pub fn aux_positive_suite(samples: usize, seed: u64) -> SuiteRow {
    sample(SUITES[3], samples, seed, |rng| {
        let (theta, gamma) = draw_bounds(rng);
        let x = rng.random_range(1.0 / (1.0 - theta)..=1.0 / (1.0 - gamma));
        aux_positive_margin(theta, gamma, x)
    })
}

pub fn power_comparison_suite(samples: usize, seed: u64) -> SuiteRow {
    sample(SUITES[4], samples, seed, |rng| {
        let (theta, gamma) = draw_bounds(rng);
        let beta = rng.random_range(theta..=gamma);
        let log_y = rng.random_range(-6.0..6.0);
        power_comparison_margin(theta, gamma, beta, log_y)
    })
}

/// Discrete `‖J^{α}φ‖ ≤ C ‖φ‖` on random trajectories (six points, 32 steps).
pub fn integral_operator_suite(samples: usize, seed: u64) -> SuiteRow {
    let grid = SpatialGrid::uniform(0.0, 1.0, 6).expect("valid grid");
    sample(SUITES[5], samples, seed, |rng| {
        let (a0, sup) = draw_bounds(rng);
        let mut values: Vec<f64> = (0..6).map(|_| rng.random_range(a0..=sup)).collect();
        values[0] = a0;
        values[5] = sup;
        let alpha = OrderField::new(grid.clone(), values).expect("orders in range");
        let horizon = rng.random_range(-2.0f64..2.0).exp();
        let time = TimeGrid::new(horizon, 32).expect("valid time grid");
        let mut phi = Trajectory::zeros(grid.clone(), time);
        phi.data_mut().iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
        let scheme = if rng.random_bool(0.5) { Scheme::L1Linear } else { Scheme::Rectangle };
        let j = frac_integral(&phi, &alpha, scheme).expect("compatible inputs");
        let p = NormExponent::TWO;
        let c = integral_operator_bound(alpha.bounds(), horizon).expect("positive horizon");
        let rhs = c * phi.sup_norm(p);
        (rhs - j.sup_norm(p)) / rhs
    })
}

/// All suites with the same sample count and seed.
pub fn run_suites(samples: usize, seed: u64) -> Vec<SuiteRow> {
    vec![
        gamma_ordering_suite(samples, seed),
        kernel_pointwise_suite(samples, seed),
        kernel_difference_suite(samples, seed),
        aux_positive_suite(samples, seed),
        power_comparison_suite(samples, seed),
        integral_operator_suite(samples.min(10_000), seed),
    ]
}
