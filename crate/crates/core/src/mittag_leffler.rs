//! Mittag-Leffler functions by direct series summation.
//!
//! `E_{α,β}(z) = Σ_k z^k / Γ(αk + β)`. Terms are formed in log space so that
//! `Γ(αk + β)` never overflows. The sum is accepted once three consecutive terms
//! fall below `rel_tol` of the running sum, never before index `k*`, the first
//! `n` with `α₀ n + 1 ≥ η` (past it, `Γ(αn + 1)` increases with `n`).

use crate::domain::{BoundedOperator, Field, NormExponent, OrderBounds, OrderField};
use crate::error::{Error, Result};
use crate::special::{gamma, ln_gamma, GAMMA_ARGMIN, GAMMA_MIN};

/// Largest tolerated ratio between accumulated rounding error and the result.
const CANCELLATION_LIMIT: f64 = 1e-8;

/// Truncation controls for series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlSeriesControl {
    pub rel_tol: f64,
    pub max_terms: usize,
    pub k_star: usize,
    /// Norm used for operator-series increments.
    pub norm: NormExponent,
}

impl MlSeriesControl {
    /// Defaults (`rel_tol = 1e-14`, 400 terms, `L²`) with `k*` for the lower order bound `alpha0`.
    pub fn new(alpha0: f64) -> Self {
        Self { rel_tol: 1e-14, max_terms: 400, k_star: k_star(alpha0), norm: NormExponent::TWO }
    }

    pub fn with_norm(mut self, norm: NormExponent) -> Self {
        self.norm = norm;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::invalid("rel_tol", "must be positive"));
        }
        if self.max_terms < self.k_star {
            return Err(Error::invalid("max_terms", format!("must be at least k* = {}", self.k_star)));
        }
        Ok(())
    }
}

/// Smallest `n` with `α₀ n + 1 ≥ η`.
pub fn k_star(alpha0: f64) -> usize {
    ((GAMMA_ARGMIN - 1.0) / alpha0).ceil().max(0.0) as usize
}

/// Tracks the stopping rule shared by scalar and operator series.
struct Stopper {
    small_run: usize,
    largest: f64,
}

impl Stopper {
    fn new() -> Self {
        Self { small_run: 0, largest: 0.0 }
    }

    /// Feeds `|term|` at index `k` against `|sum|`; true once converged.
    fn push(&mut self, k: usize, term: f64, sum: f64, ctl: &MlSeriesControl) -> bool {
        self.largest = self.largest.max(term);
        if term <= ctl.rel_tol * sum {
            self.small_run += 1;
        } else {
            self.small_run = 0;
        }
        k >= ctl.k_star && self.small_run >= 3
    }

    fn check_precision(&self, sum: f64) -> Result<()> {
        if self.largest * f64::EPSILON > CANCELLATION_LIMIT * sum {
            return Err(Error::MlPrecisionLoss { largest_term: self.largest, sum });
        }
        Ok(())
    }
}

/// `E_{α,β}(z)` with default controls.
pub fn ml_scalar(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    ml_scalar_with(alpha, beta, z, &MlSeriesControl::new(alpha.clamp(f64::MIN_POSITIVE, 1.0)))
}

/// `E_{α,β}(z)` with explicit controls.
pub fn ml_scalar_with(alpha: f64, beta: f64, z: f64, ctl: &MlSeriesControl) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid("alpha", format!("must lie in (0, 1], got {alpha}")));
    }
    if !(beta > 0.0) {
        return Err(Error::invalid("beta", format!("must be positive, got {beta}")));
    }
    if !z.is_finite() {
        return Err(Error::invalid("z", "must be finite"));
    }
    ctl.validate()?;
    if alpha == 1.0 && beta == 1.0 {
        return Ok(z.exp());
    }
    if alpha == 1.0 && beta == 2.0 {
        return Ok(if z == 0.0 { 1.0 } else { z.exp_m1() / z });
    }
    if z == 0.0 {
        return Ok(1.0 / gamma(beta));
    }
    let ln_z = z.abs().ln();
    let negative = z < 0.0;
    let mut sum = 0.0;
    let mut stop = Stopper::new();
    for k in 0..ctl.max_terms {
        let magnitude = (k as f64 * ln_z - ln_gamma(alpha * k as f64 + beta)).exp();
        let term = if negative && k % 2 == 1 { -magnitude } else { magnitude };
        sum += term;
        if !sum.is_finite() {
            return Err(Error::MlUnconverged { terms: k + 1, partial: sum });
        }
        if stop.push(k, magnitude, sum.abs(), ctl) {
            stop.check_precision(sum.abs())?;
            return Ok(sum);
        }
    }
    Err(Error::MlUnconverged { terms: ctl.max_terms, partial: sum })
}

/// `E_{α(x)}(t^{α(x)} A) u₀`, the operator series with `β = 1`.
pub fn ml_operator_apply(
    alpha: &OrderField,
    t: f64,
    a: &BoundedOperator,
    u0: &Field,
    ctl: &MlSeriesControl,
) -> Result<Field> {
    ml_operator_apply_beta(alpha, 1.0, t, a, u0, ctl)
}

/// `Σ_k t^{α(x) k} (A^k u₀)(x) / Γ(α(x) k + β)`.
pub fn ml_operator_apply_beta(
    alpha: &OrderField,
    beta: f64,
    t: f64,
    a: &BoundedOperator,
    u0: &Field,
    ctl: &MlSeriesControl,
) -> Result<Field> {
    if !(t >= 0.0) {
        return Err(Error::invalid("t", format!("must be nonnegative, got {t}")));
    }
    if !(beta > 0.0) {
        return Err(Error::invalid("beta", format!("must be positive, got {beta}")));
    }
    ctl.validate()?;
    let n = u0.len();
    if alpha.len() != n || a.grid().len() != n {
        return Err(Error::GridMismatch { expected: n, found: alpha.len().min(a.grid().len()) });
    }
    let weights = u0.grid().weights();
    let ln_t = t.ln();
    let coefficient = |k: usize, aj: f64| -> f64 {
        let x = aj * k as f64 + beta;
        match (k, t) {
            (0, _) => 1.0 / gamma(beta),
            (_, 0.0) => 0.0,
            _ => (aj * k as f64 * ln_t - ln_gamma(x)).exp(),
        }
    };
    let mut power = u0.values().to_vec();
    let mut next = vec![0.0; n];
    let mut sum = vec![0.0; n];
    let mut increment = vec![0.0; n];
    let mut stop = Stopper::new();
    for k in 0..ctl.max_terms {
        for j in 0..n {
            increment[j] = coefficient(k, alpha.values()[j]) * power[j];
            sum[j] += increment[j];
        }
        let inc_norm = crate::domain::lp_norm_slice(&increment, weights, ctl.norm);
        let sum_norm = crate::domain::lp_norm_slice(&sum, weights, ctl.norm);
        if !sum_norm.is_finite() {
            return Err(Error::MlUnconverged { terms: k + 1, partial: sum_norm });
        }
        let exhausted = power.iter().all(|v| *v == 0.0);
        if stop.push(k, inc_norm, sum_norm, ctl) || (exhausted && k >= ctl.k_star) {
            stop.check_precision(sum_norm)?;
            return Field::new(u0.grid().clone(), sum);
        }
        a.apply_slice(&power, &mut next);
        std::mem::swap(&mut power, &mut next);
    }
    let partial = crate::domain::lp_norm_slice(&sum, weights, ctl.norm);
    Err(Error::MlUnconverged { terms: ctl.max_terms, partial })
}

/// `sup_{v ≥ 0} E_β(v) e^{−v^{1/β}}`, never below its limit `1/β`.
///
/// The ratio is sampled on `v ∈ [0, min(10, 20^β)]`, where the series is accurate;
/// beyond that it approaches `1/β` from below.
pub fn scalar_envelope_constant(beta: f64) -> Result<f64> {
    if beta == 1.0 {
        return Ok(1.0);
    }
    let v_max = 10f64.min(20f64.powf(beta));
    let ctl = MlSeriesControl { max_terms: 4000, ..MlSeriesControl::new(beta) };
    let mut best = 1.0 / beta;
    for i in 0..=64 {
        let v = v_max * i as f64 / 64.0;
        let e = ml_scalar_with(beta, 1.0, v, &ctl)?;
        best = best.max(e * (-v.powf(1.0 / beta)).exp());
    }
    Ok(best)
}

/// Constant `M` of the growth envelope:
/// `Σ_{n ≤ k*} (α₀ n / e)^{α₀ n} / Γ(η) + sup_v E_{α₀}(v) e^{−v^{1/α₀}}`.
pub fn envelope_constant(bounds: OrderBounds) -> Result<f64> {
    let a0 = bounds.alpha0;
    let prefix: f64 = (0..=k_star(a0))
        .map(|n| {
            let s = a0 * n as f64;
            if n == 0 {
                1.0
            } else {
                (s / std::f64::consts::E).powf(s)
            }
        })
        .sum::<f64>()
        / GAMMA_MIN;
    Ok(prefix + scalar_envelope_constant(a0)?)
}

/// Bound on `‖E_{α(x)}(t^{α(x)} A)‖`, per unit `‖u₀‖`.
///
/// `M exp(‖A‖^{1/α₀} t)` for `t ≤ 1` and `M exp(‖A‖^{1/α₀} t^{‖α‖/α₀})` beyond.
pub fn growth_envelope(bounds: OrderBounds, a_norm: f64, t: f64) -> Result<f64> {
    if !(a_norm >= 0.0) {
        return Err(Error::invalid("a_norm", "must be nonnegative"));
    }
    if !(t >= 0.0) {
        return Err(Error::invalid("t", "must be nonnegative"));
    }
    let m = envelope_constant(bounds)?;
    let rate = a_norm.powf(1.0 / bounds.alpha0);
    let s = if t <= 1.0 { t } else { t.powf(bounds.alpha_sup / bounds.alpha0) };
    Ok(m * (rate * s).exp())
}

/// `(M, Λ)` with `‖S(t)‖ ≤ M e^{Λ t}` for a piecewise-constant order:
/// `M = m · max_j M_j`, `Λ = max_j ‖A‖^{1/α_j}` over the `m` regions.
pub fn piecewise_envelope(alpha: &OrderField, a_norm: f64) -> Result<(f64, f64)> {
    let regions = alpha.regions().ok_or(Error::RegionsAbsent)?;
    let mut m = 0.0f64;
    let mut lambda = 0.0f64;
    for r in regions {
        m = m.max(envelope_constant(OrderBounds::new(r.value, r.value)?)?);
        lambda = lambda.max(a_norm.powf(1.0 / r.value));
    }
    Ok((regions.len() as f64 * m, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_star_values() {
        assert_eq!(k_star(1.0), 1);
        assert_eq!(k_star(0.5), 1);
        assert_eq!(k_star(0.4), 2);
        assert_eq!(k_star(0.1), 5);
    }

    #[test]
    fn scalar_special_values() {
        assert_eq!(ml_scalar(1.0, 1.0, 1.0).unwrap(), std::f64::consts::E);
        assert!((ml_scalar(0.5, 2.5, 0.0).unwrap() - 1.0 / gamma(2.5)).abs() < 1e-15);
        // E_{1,2}(z) = (e^z − 1)/z.
        assert!((ml_scalar(1.0, 2.0, 1.0).unwrap() - (std::f64::consts::E - 1.0)).abs() < 1e-15);
        // E_{1/2}(z) = e^{z²} erfc(−z), so E_{1/2}(1) = e (1 + erf 1).
        assert!((ml_scalar(0.5, 1.0, 1.0).unwrap() - 5.008_980_080_762_283).abs() < 1e-12);
    }

    #[test]
    fn guard_trips_for_large_negative_argument() {
        assert!(matches!(ml_scalar(0.9, 1.0, -60.0), Err(Error::MlPrecisionLoss { .. } | Error::MlUnconverged { .. })));
        assert!(matches!(ml_scalar(0.2, 1.0, 50.0), Err(Error::MlUnconverged { .. })));
    }

    #[test]
    fn envelope_constant_is_at_least_one() {
        for a in [0.1, 0.3, 0.7, 1.0] {
            let m = envelope_constant(OrderBounds::new(a, 1.0).unwrap()).unwrap();
            assert!(m >= 1.0, "{a}: {m}");
        }
    }
}
