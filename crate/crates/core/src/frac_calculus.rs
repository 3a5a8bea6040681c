//! Variable-order Riemann–Liouville integral and Caputo derivative on a uniform time grid.
//!
//! `J^{α(x)} φ(t_n, x_j) ≈ Σ_k b_{n,k}(α_j) φ(t_k, x_j)` where the kernel
//! `(t_n − s)^{α−1}/Γ(α)` is integrated exactly against a piecewise constant
//! ([`Scheme::Rectangle`]) or piecewise linear ([`Scheme::L1Linear`]) interpolant of φ.
//! Apart from the `k = 0` column the weights depend on `n − k` only, so each
//! distinct order stores two vectors of length `N_t + 1`.

use rayon::prelude::*;

use crate::domain::{NormExponent, OrderField, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::special::gamma;

/// Product-integration rule for the history sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Left values held on each subinterval. First order, explicit.
    Rectangle,
    /// Piecewise-linear interpolation. Order `2 − α` for smooth data.
    #[default]
    L1Linear,
}

/// `g_β(t) = t^{β−1}/Γ(β)` for `t > 0`, zero otherwise.
pub fn g_beta(t: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::invalid("beta", format!("must be positive, got {beta}")));
    }
    Ok(if t > 0.0 { t.powf(beta - 1.0) / gamma(beta) } else { 0.0 })
}

/// Weights for one order value: `b_{n,0} = start[n]`, `b_{n,k} = tail[n−k]` for `k ≥ 1`.
#[derive(Debug, Clone)]
pub(crate) struct ClassWeights {
    pub alpha: f64,
    pub start: Vec<f64>,
    pub tail: Vec<f64>,
}

impl ClassWeights {
    fn new(alpha: f64, time: TimeGrid, scheme: Scheme) -> Self {
        let n = time.steps();
        let dt = time.dt();
        let mut start = vec![0.0; n + 1];
        let mut tail = vec![0.0; n + 1];
        match scheme {
            Scheme::L1Linear if alpha == 1.0 => {
                tail[0] = 0.5 * dt;
                tail[1..].iter_mut().for_each(|w| *w = dt);
                start[1..].iter_mut().for_each(|w| *w = 0.5 * dt);
            }
            Scheme::Rectangle if alpha == 1.0 => {
                tail[1..].iter_mut().for_each(|w| *w = dt);
                start[1..].iter_mut().for_each(|w| *w = dt);
            }
            Scheme::L1Linear => {
                let c = dt.powf(alpha) / gamma(alpha + 2.0);
                let p = alpha + 1.0;
                tail[0] = c;
                for (m, w) in tail.iter_mut().enumerate().skip(1) {
                    *w = c * trapezoid_interior(p, m);
                }
                for (m, w) in start.iter_mut().enumerate().skip(1) {
                    *w = c * trapezoid_start(alpha, m);
                }
            }
            Scheme::Rectangle => {
                let c = dt.powf(alpha) / gamma(alpha + 1.0);
                for (m, w) in tail.iter_mut().enumerate().skip(1) {
                    *w = c * power_difference(alpha, m);
                }
                start[1..].copy_from_slice(&tail[1..]);
            }
        }
        Self { alpha, start, tail }
    }

    /// `Σ_k b_{n,k} g_k` for the full history `g_0..=g_n`.
    #[inline]
    pub fn convolve(&self, n: usize, g: &[f64]) -> f64 {
        if n == 0 {
            return 0.0;
        }
        self.start[n] * g[0] + self.partial(n, 1, g)
    }

    /// `Σ_{k=from}^{n} tail[n−k] g_k`, `from ≥ 1`.
    #[inline]
    pub fn partial(&self, n: usize, from: usize, g: &[f64]) -> f64 {
        if from > n {
            return 0.0;
        }
        let w = &self.tail[..=n - from];
        g[from..=n].iter().zip(w.iter().rev()).map(|(a, b)| a * b).sum()
    }
}

/// Generalised binomial coefficients `C(p, j)` for `j = 0..len`.
fn binomials(p: f64, len: usize) -> impl Iterator<Item = f64> {
    (0..len).scan(1.0, move |c, j| {
        let out = *c;
        *c *= (p - j as f64) / (j as f64 + 1.0);
        Some(out)
    })
}

/// `(m+1)^p − 2 m^p + (m−1)^p` without cancellation.
fn trapezoid_interior(p: f64, m: usize) -> f64 {
    if m == 1 {
        return 2f64.powf(p) - 2.0;
    }
    // m^p [(1+x)^p + (1−x)^p − 2] = 2 m^p Σ_{k≥1} C(p, 2k) x^{2k}, every term positive for 1 < p < 2.
    let x = 1.0 / m as f64;
    let x2 = x * x;
    let mut sum = 0.0;
    let mut xp = 1.0;
    for (j, c) in binomials(p, 400).enumerate() {
        if j % 2 == 1 {
            continue;
        }
        if j >= 2 {
            let term = c * xp;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
        }
        xp *= x2;
    }
    2.0 * (m as f64).powf(p) * sum
}

/// `(m−1)^{α+1} − (m − α − 1) m^α`, the `k = 0` trapezoid weight in units of `Δt^α/Γ(α+2)`.
fn trapezoid_start(alpha: f64, m: usize) -> f64 {
    let p = alpha + 1.0;
    let mf = m as f64;
    if m < 4 {
        return (mf - 1.0).powf(p) - (mf - p) * mf.powf(alpha);
    }
    // m^p [(1−x)^p − 1 + p x] = m^p Σ_{j≥2} C(p, j)(−x)^j, every term positive for 1 < p < 2.
    let x = 1.0 / mf;
    let mut sum = 0.0;
    let mut xp = 1.0;
    for (j, c) in binomials(p, 400).enumerate() {
        if j >= 2 {
            let term = c * xp;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
        }
        xp *= -x;
    }
    mf.powf(p) * sum
}

/// `m^α − (m−1)^α` without cancellation.
fn power_difference(alpha: f64, m: usize) -> f64 {
    if m == 1 {
        return 1.0;
    }
    let mf = m as f64;
    -mf.powf(alpha) * (alpha * (-1.0 / mf).ln_1p()).exp_m1()
}

/// Cached product-integration weights for a (time grid, order field, scheme) triple.
#[derive(Debug, Clone)]
pub struct KernelWeights {
    scheme: Scheme,
    time: TimeGrid,
    classes: Vec<ClassWeights>,
    class_of: Vec<usize>,
}

impl KernelWeights {
    pub fn new(time: TimeGrid, alpha: &OrderField, scheme: Scheme) -> Result<Self> {
        let mut distinct: Vec<f64> = alpha.values().to_vec();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        let classes: Vec<ClassWeights> = distinct.par_iter().map(|&a| ClassWeights::new(a, time, scheme)).collect();
        let class_of = alpha
            .values()
            .iter()
            .map(|a| distinct.binary_search_by(|d| d.total_cmp(a)).expect("value present"))
            .collect();
        Ok(Self { scheme, time, classes, class_of })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn time(&self) -> TimeGrid {
        self.time
    }

    pub fn points(&self) -> usize {
        self.class_of.len()
    }

    /// `b_{n,k}(α_j)`.
    pub fn weight(&self, j: usize, n: usize, k: usize) -> f64 {
        let c = &self.classes[self.class_of[j]];
        match (n, k) {
            (0, _) => 0.0,
            _ if k > n => 0.0,
            (_, 0) => c.start[n],
            _ => c.tail[n - k],
        }
    }

    /// `Σ_k b_{n,k}(α_j)`, equal to `t_n^{α_j}/Γ(α_j + 1)`.
    pub fn row_sum(&self, j: usize, n: usize) -> f64 {
        let c = &self.classes[self.class_of[j]];
        if n == 0 {
            return 0.0;
        }
        c.start[n] + c.tail[..n].iter().sum::<f64>()
    }

    pub(crate) fn class(&self, j: usize) -> &ClassWeights {
        &self.classes[self.class_of[j]]
    }

    /// Applies `J^{α}` to a trajectory on the same time grid.
    pub fn apply(&self, phi: &Trajectory) -> Result<Trajectory> {
        self.check(phi)?;
        let nt = self.time.nodes();
        let pm = phi.to_point_major();
        let mut out = vec![0.0; pm.len()];
        out.par_chunks_mut(nt).zip(pm.par_chunks(nt)).enumerate().for_each(|(j, (o, g))| {
            let c = self.class(j);
            for (n, v) in o.iter_mut().enumerate() {
                *v = c.convolve(n, g);
            }
        });
        Ok(Trajectory::from_point_major(phi.grid().clone(), self.time, &out))
    }

    fn check(&self, phi: &Trajectory) -> Result<()> {
        if phi.grid().len() != self.points() {
            return Err(Error::GridMismatch { expected: self.points(), found: phi.grid().len() });
        }
        if phi.time() != self.time {
            return Err(Error::invalid("time", "trajectory and weights use different time grids"));
        }
        Ok(())
    }
}

fn check_alpha(phi: &Trajectory, alpha: &OrderField) -> Result<()> {
    if phi.grid().len() != alpha.len() {
        return Err(Error::GridMismatch { expected: phi.grid().len(), found: alpha.len() });
    }
    Ok(())
}

/// `J^{α(x)} φ` by product integration.
pub fn frac_integral(phi: &Trajectory, alpha: &OrderField, scheme: Scheme) -> Result<Trajectory> {
    check_alpha(phi, alpha)?;
    KernelWeights::new(phi.time(), alpha, scheme)?.apply(phi)
}

/// Caputo derivative `cD^{α(x)} φ`, computed as the exact inverse of the discrete
/// trapezoidal `J^{α}` applied to `φ − φ(0)`.
///
/// The values `d_n` solve `Σ_k b_{n,k} d_k = φ_n − φ_0` for `n ≥ 1`, closed by the
/// linear extrapolation `d_0 = 2 d_1 − d_2`. Points with `α = 1` use centred
/// differences with second-order one-sided ends.
pub fn caputo_derivative(phi: &Trajectory, alpha: &OrderField) -> Result<Trajectory> {
    check_alpha(phi, alpha)?;
    let time = phi.time();
    if time.steps() < 2 {
        return Err(Error::invalid("steps", "Caputo derivative needs at least two time steps"));
    }
    let weights = KernelWeights::new(time, alpha, Scheme::L1Linear)?;
    let nt = time.nodes();
    let dt = time.dt();
    let pm = phi.to_point_major();
    let mut out = vec![0.0; pm.len()];
    out.par_chunks_mut(nt).zip(pm.par_chunks(nt)).enumerate().for_each(|(j, (d, f))| {
        let c = weights.class(j);
        if c.alpha == 1.0 {
            classical_derivative(f, dt, d);
        } else {
            deconvolve(c, f, d);
        }
    });
    Ok(Trajectory::from_point_major(phi.grid().clone(), time, &out))
}

fn classical_derivative(f: &[f64], dt: f64, d: &mut [f64]) {
    let n = f.len() - 1;
    // Differences of φ − φ(0) so constants map to exact zeros.
    let f: Vec<f64> = f.iter().map(|v| v - f[0]).collect();
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
    for k in 1..n {
        d[k] = (f[k + 1] - f[k - 1]) / (2.0 * dt);
    }
    d[n] = (3.0 * f[n] - 4.0 * f[n - 1] + f[n - 2]) / (2.0 * dt);
}

fn deconvolve(c: &ClassWeights, f: &[f64], d: &mut [f64]) {
    let (s, t) = (&c.start, &c.tail);
    let psi = |n: usize| f[n] - f[0];
    // Rows 1 and 2 with d_0 = 2 d_1 − d_2 substituted.
    let (a11, a12) = (2.0 * s[1] + t[0], -s[1]);
    let (a21, a22) = (2.0 * s[2] + t[1], t[0] - s[2]);
    let det = a11 * a22 - a12 * a21;
    d[1] = (psi(1) * a22 - a12 * psi(2)) / det;
    d[2] = (a11 * psi(2) - a21 * psi(1)) / det;
    d[0] = 2.0 * d[1] - d[2];
    for n in 3..f.len() {
        let history: f64 = s[n] * d[0] + d[1..n].iter().zip(t[1..n].iter().rev()).map(|(a, b)| a * b).sum::<f64>();
        d[n] = (psi(n) - history) / t[0];
    }
}

/// `sup_n ‖J^{α₁} J^{α₂} φ − J^{α₁+α₂} φ‖_p`.
pub fn check_composition(
    alpha1: &OrderField,
    alpha2: &OrderField,
    phi: &Trajectory,
    scheme: Scheme,
    p: NormExponent,
) -> Result<f64> {
    let combined = alpha1.sum(alpha2)?;
    let inner = frac_integral(phi, alpha2, scheme)?;
    let nested = frac_integral(&inner, alpha1, scheme)?;
    let direct = frac_integral(phi, &combined, scheme)?;
    nested.sup_distance(&direct, p)
}
