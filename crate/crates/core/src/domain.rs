//! Grids, fields, norms and bounded operators on a one-dimensional domain.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Quadrature grid on an interval `[left, right]`.
///
/// Uniform grids place nodes at the left cell endpoints `x_j = left + j h`,
/// each carrying weight `h`, so that the weights sum to the length of the interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    points: Vec<f64>,
    weights: Vec<f64>,
    left: f64,
    right: f64,
}

impl SpatialGrid {
    pub fn uniform(left: f64, right: f64, n: usize) -> Result<Arc<Self>> {
        if !(left.is_finite() && right.is_finite() && left < right) {
            return Err(Error::invalid("grid", format!("need finite left < right, got [{left}, {right}]")));
        }
        if n == 0 {
            return Err(Error::invalid("grid.points", "need at least one point"));
        }
        let h = (right - left) / n as f64;
        let points = (0..n).map(|j| left + j as f64 * h).collect();
        Ok(Arc::new(Self { points, weights: vec![h; n], left, right }))
    }

    /// Arbitrary nodes and weights.
    pub fn from_points(left: f64, right: f64, points: Vec<f64>, weights: Vec<f64>) -> Result<Arc<Self>> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::invalid("grid", "points and weights must be non-empty and of equal length"));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("grid", "points must be strictly increasing"));
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::invalid("grid", "weights must be positive"));
        }
        if points[0] < left || *points.last().unwrap() > right {
            return Err(Error::invalid("grid", "points must lie inside [left, right]"));
        }
        Ok(Arc::new(Self { points, weights, left, right }))
    }

    /// `copies` translated copies laid end to end, used for stacked multi-component states.
    pub fn tiled(&self, copies: usize) -> Arc<Self> {
        let len = self.length();
        let points = (0..copies).flat_map(|c| self.points.iter().map(move |x| x + c as f64 * len)).collect();
        let weights = (0..copies).flat_map(|_| self.weights.iter().copied()).collect();
        Arc::new(Self { points, weights, left: self.left, right: self.left + copies as f64 * len })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn right(&self) -> f64 {
        self.right
    }

    pub fn length(&self) -> f64 {
        self.right - self.left
    }
}

fn same_grid(a: &Arc<SpatialGrid>, b: &Arc<SpatialGrid>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::GridMismatch { expected, found })
    }
}

/// Exponent `p ∈ [1, ∞]` of an `L^p` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormExponent(f64);

impl NormExponent {
    pub const ONE: Self = Self(1.0);
    pub const TWO: Self = Self(2.0);
    pub const INFINITY: Self = Self(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p >= 1.0 {
            Ok(Self(p))
        } else {
            Err(Error::invalid("p", format!("norm exponent must lie in [1, inf], got {p}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

impl Default for NormExponent {
    fn default() -> Self {
        Self::TWO
    }
}

/// Weighted `L^p` norm of raw values.
pub fn lp_norm_slice(values: &[f64], weights: &[f64], p: NormExponent) -> f64 {
    debug_assert_eq!(values.len(), weights.len());
    match p.0 {
        p if p.is_infinite() => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        1.0 => values.iter().zip(weights).map(|(v, w)| w * v.abs()).sum(),
        2.0 => values.iter().zip(weights).map(|(v, w)| w * v * v).sum::<f64>().sqrt(),
        p => {
            // Scale by the max to keep |v|^p representable.
            let scale = values.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
            if scale == 0.0 {
                return 0.0;
            }
            let s: f64 = values.iter().zip(weights).map(|(v, w)| w * (v.abs() / scale).powf(p)).sum();
            scale * s.powf(1.0 / p)
        }
    }
}

/// `‖u‖_p` with the quadrature weights of the field's grid.
pub fn lp_norm(u: &Field, p: f64) -> Result<f64> {
    let p = NormExponent::new(p)?;
    Ok(u.norm(p))
}

/// Values of a quantity at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Arc<SpatialGrid>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Arc<SpatialGrid>, values: Vec<f64>) -> Result<Self> {
        check_len(grid.len(), values.len())?;
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid("field", format!("non-finite value at index {j}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<SpatialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: Arc<SpatialGrid>, c: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![c; n])
    }

    pub fn zeros(grid: Arc<SpatialGrid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![0.0; n] }
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self, p: NormExponent) -> f64 {
        lp_norm_slice(&self.values, self.grid.weights(), p)
    }
}

/// Uniform time grid `t_k = k Δt`, `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    dt: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid("horizon", format!("must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(Error::invalid("steps", "need at least one time step"));
        }
        Ok(Self { dt: horizon / steps as f64, steps })
    }

    pub fn with_step(dt: f64, steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
        }
        Ok(Self { dt, steps })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn nodes(&self) -> usize {
        self.steps + 1
    }

    pub fn t(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.t(self.steps)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(|k| self.t(k))
    }

    /// Same step, fewer nodes.
    pub fn truncated(&self, steps: usize) -> Self {
        Self { dt: self.dt, steps: steps.min(self.steps) }
    }
}

/// One field per time node, stored time-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: Arc<SpatialGrid>,
    time: TimeGrid,
    data: Vec<f64>,
}

impl Trajectory {
    pub fn new(grid: Arc<SpatialGrid>, time: TimeGrid, data: Vec<f64>) -> Result<Self> {
        check_len(grid.len() * time.nodes(), data.len())?;
        Ok(Self { grid, time, data })
    }

    pub fn zeros(grid: Arc<SpatialGrid>, time: TimeGrid) -> Self {
        let len = grid.len() * time.nodes();
        Self { grid, time, data: vec![0.0; len] }
    }

    /// Samples `f(t, x)` at every node.
    pub fn from_fn(grid: Arc<SpatialGrid>, time: TimeGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let data =
            time.times().flat_map(|t| grid.points().iter().map(move |&x| (t, x))).map(|(t, x)| f(t, x)).collect();
        Self { grid, time, data }
    }

    /// The constant-in-time extension of `u0`.
    pub fn constant(u0: &Field, time: TimeGrid) -> Self {
        let data = (0..time.nodes()).flat_map(|_| u0.values().iter().copied()).collect();
        Self { grid: u0.grid().clone(), time, data }
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn time(&self) -> TimeGrid {
        self.time
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn slice(&self, n: usize) -> &[f64] {
        let nx = self.grid.len();
        &self.data[n * nx..(n + 1) * nx]
    }

    pub fn slice_mut(&mut self, n: usize) -> &mut [f64] {
        let nx = self.grid.len();
        &mut self.data[n * nx..(n + 1) * nx]
    }

    pub fn field(&self, n: usize) -> Field {
        Field { grid: self.grid.clone(), values: self.slice(n).to_vec() }
    }

    pub fn norm_at(&self, n: usize, p: NormExponent) -> f64 {
        lp_norm_slice(self.slice(n), self.grid.weights(), p)
    }

    /// `max_n ‖u(t_n)‖_p`.
    pub fn sup_norm(&self, p: NormExponent) -> f64 {
        (0..self.time.nodes()).map(|n| self.norm_at(n, p)).fold(0.0, f64::max)
    }

    /// `max_n ‖self(t_n) − other(t_n)‖_p`.
    pub fn sup_distance(&self, other: &Trajectory, p: NormExponent) -> Result<f64> {
        self.check_compatible(other)?;
        let nx = self.grid.len();
        let mut diff = vec![0.0; nx];
        let mut worst = 0.0f64;
        for n in 0..self.time.nodes() {
            for ((d, a), b) in diff.iter_mut().zip(self.slice(n)).zip(other.slice(n)) {
                *d = a - b;
            }
            worst = worst.max(lp_norm_slice(&diff, self.grid.weights(), p));
        }
        Ok(worst)
    }

    pub(crate) fn check_compatible(&self, other: &Trajectory) -> Result<()> {
        if !same_grid(&self.grid, &other.grid) {
            return Err(Error::GridMismatch { expected: self.grid.len(), found: other.grid.len() });
        }
        check_len(self.data.len(), other.data.len())
    }

    /// Keeps nodes `0..=steps`.
    pub fn truncate(&mut self, steps: usize) {
        self.time = self.time.truncated(steps);
        self.data.truncate(self.grid.len() * self.time.nodes());
    }

    /// Point-major copy: entry `j * nodes + n` holds `u(t_n, x_j)`.
    pub(crate) fn to_point_major(&self) -> Vec<f64> {
        let (nx, nt) = (self.grid.len(), self.time.nodes());
        let mut out = vec![0.0; nx * nt];
        for n in 0..nt {
            for (j, v) in self.slice(n).iter().enumerate() {
                out[j * nt + n] = *v;
            }
        }
        out
    }

    pub(crate) fn from_point_major(grid: Arc<SpatialGrid>, time: TimeGrid, pm: &[f64]) -> Self {
        let (nx, nt) = (grid.len(), time.nodes());
        let mut data = vec![0.0; nx * nt];
        for j in 0..nx {
            for n in 0..nt {
                data[n * nx + j] = pm[j * nt + n];
            }
        }
        Self { grid, time, data }
    }
}

/// Interval of constant order. Intervals are closed on the right; the first is closed on both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub lower: f64,
    pub upper: f64,
    pub value: f64,
}

/// Certified range `[alpha0, alpha_sup]` of an order field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderBounds {
    pub alpha0: f64,
    pub alpha_sup: f64,
}

impl OrderBounds {
    pub fn new(alpha0: f64, alpha_sup: f64) -> Result<Self> {
        if !(alpha0 > 0.0 && alpha0 <= alpha_sup && alpha_sup <= 1.0) {
            return Err(Error::invalid(
                "alpha",
                format!("need 0 < alpha0 <= alpha_sup <= 1, got ({alpha0}, {alpha_sup})"),
            ));
        }
        Ok(Self { alpha0, alpha_sup })
    }
}

/// Fractional order `α(x) ∈ [α₀, 1]` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderField {
    grid: Arc<SpatialGrid>,
    values: Vec<f64>,
    bounds: OrderBounds,
    regions: Option<Vec<Region>>,
}

impl OrderField {
    /// Bounds taken as the exact extremes of `values`.
    pub fn new(grid: Arc<SpatialGrid>, values: Vec<f64>) -> Result<Self> {
        check_len(grid.len(), values.len())?;
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::with_bounds(grid, values, lo, hi)
    }

    /// Bounds supplied by the caller, checked against every value.
    pub fn with_bounds(grid: Arc<SpatialGrid>, values: Vec<f64>, alpha0: f64, alpha_sup: f64) -> Result<Self> {
        check_len(grid.len(), values.len())?;
        let bounds = OrderBounds::new(alpha0, alpha_sup)?;
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, &a)| !(a >= alpha0 && a <= alpha_sup)) {
            return Err(Error::OrderOutOfRange { index, value, lower: alpha0, upper: alpha_sup });
        }
        Ok(Self { grid, values, bounds, regions: None })
    }

    pub fn constant(grid: Arc<SpatialGrid>, alpha: f64) -> Result<Self> {
        let n = grid.len();
        let mut field = Self::new(grid.clone(), vec![alpha; n])?;
        field.regions = Some(vec![Region { lower: grid.left(), upper: grid.right(), value: alpha }]);
        Ok(field)
    }

    pub fn from_fn(grid: Arc<SpatialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    /// Piecewise-constant order from `(upper breakpoint, value)` pairs in increasing order.
    /// The last breakpoint must reach the right end of the grid.
    pub fn piecewise(grid: Arc<SpatialGrid>, pieces: &[(f64, f64)]) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::invalid("alpha.regions", "need at least one region"));
        }
        let mut regions = Vec::with_capacity(pieces.len());
        let mut lower = grid.left();
        for &(upper, value) in pieces {
            if upper <= lower {
                return Err(Error::invalid("alpha.regions", "breakpoints must be increasing"));
            }
            regions.push(Region { lower, upper, value });
            lower = upper;
        }
        let right = grid.right();
        if (lower - right).abs() > 1e-12 * grid.length() {
            return Err(Error::invalid("alpha.regions", format!("last breakpoint {lower} must equal {right}")));
        }
        let values = grid
            .points()
            .iter()
            .map(|&x| regions.iter().find(|r| x <= r.upper).unwrap_or(regions.last().unwrap()).value)
            .collect();
        let mut field = Self::new(grid, values)?;
        field.regions = Some(regions);
        Ok(field)
    }

    /// Pointwise sum, rejected where it exceeds 1.
    pub fn sum(&self, other: &OrderField) -> Result<OrderField> {
        if !same_grid(&self.grid, &other.grid) {
            return Err(Error::GridMismatch { expected: self.len(), found: other.len() });
        }
        let values: Vec<f64> = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, &v)| v > 1.0) {
            return Err(Error::OrderOutOfRange { index, value, lower: 0.0, upper: 1.0 });
        }
        Self::new(self.grid.clone(), values)
    }

    /// Values repeated over a grid made of `copies` tiles of this one.
    pub fn tiled(&self, grid: Arc<SpatialGrid>, copies: usize) -> Result<OrderField> {
        let values: Vec<f64> = (0..copies).flat_map(|_| self.values.iter().copied()).collect();
        Self::with_bounds(grid, values, self.bounds.alpha0, self.bounds.alpha_sup)
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn bounds(&self) -> OrderBounds {
        self.bounds
    }

    pub fn alpha0(&self) -> f64 {
        self.bounds.alpha0
    }

    pub fn alpha_sup(&self) -> f64 {
        self.bounds.alpha_sup
    }

    pub fn regions(&self) -> Option<&[Region]> {
        self.regions.as_deref()
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|&a| a == self.values[0])
    }
}

/// Concrete action of a bounded operator.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    /// `(Au)_j = ψ_j u_j`.
    Multiplication(Vec<f64>),
    /// `(Au)_j = Σ_{i<j} w_i u_i`, a rectangle rule for `∫_left^{x_j} u`.
    VolterraCumulative,
    /// Row-major `n × n` matrix acting on nodal values.
    DenseMatrix(Vec<f64>),
}

/// Bounded linear operator on `L^p` of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedOperator {
    grid: Arc<SpatialGrid>,
    kind: OperatorKind,
}

impl BoundedOperator {
    pub fn multiplication(psi: &Field) -> Self {
        Self { grid: psi.grid().clone(), kind: OperatorKind::Multiplication(psi.values().to_vec()) }
    }

    pub fn zero(grid: Arc<SpatialGrid>) -> Self {
        let n = grid.len();
        Self { grid, kind: OperatorKind::Multiplication(vec![0.0; n]) }
    }

    pub fn volterra(grid: Arc<SpatialGrid>) -> Self {
        Self { grid, kind: OperatorKind::VolterraCumulative }
    }

    pub fn dense(grid: Arc<SpatialGrid>, matrix: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        check_len(n * n, matrix.len())?;
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("operator.matrix", "entries must be finite"));
        }
        Ok(Self { grid, kind: OperatorKind::DenseMatrix(matrix) })
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    /// Diagonal in the nodal basis, hence commuting with every pointwise multiplier.
    pub fn is_diagonal(&self) -> bool {
        match &self.kind {
            OperatorKind::Multiplication(_) => true,
            OperatorKind::VolterraCumulative => self.grid.len() == 1,
            OperatorKind::DenseMatrix(m) => {
                let n = self.grid.len();
                (0..n).all(|i| (0..n).all(|j| i == j || m[i * n + j] == 0.0))
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            OperatorKind::Multiplication(psi) => psi.iter().all(|&v| v == 0.0),
            OperatorKind::VolterraCumulative => false,
            OperatorKind::DenseMatrix(m) => m.iter().all(|&v| v == 0.0),
        }
    }

    /// `out = A v` on raw nodal values.
    pub fn apply_slice(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.grid.len());
        debug_assert_eq!(out.len(), self.grid.len());
        match &self.kind {
            OperatorKind::Multiplication(psi) => {
                for ((o, p), x) in out.iter_mut().zip(psi).zip(v) {
                    *o = p * x;
                }
            }
            OperatorKind::VolterraCumulative => {
                let mut acc = 0.0;
                for ((o, w), x) in out.iter_mut().zip(self.grid.weights()).zip(v) {
                    *o = acc;
                    acc += w * x;
                }
            }
            OperatorKind::DenseMatrix(m) => {
                let n = v.len();
                for (i, o) in out.iter_mut().enumerate() {
                    *o = m[i * n..(i + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum();
                }
            }
        }
    }

    pub fn apply(&self, u: &Field) -> Result<Field> {
        if !same_grid(&self.grid, u.grid()) {
            return Err(Error::GridMismatch { expected: self.grid.len(), found: u.len() });
        }
        let mut out = vec![0.0; u.len()];
        self.apply_slice(u.values(), &mut out);
        Ok(Field { grid: u.grid().clone(), values: out })
    }

    /// Upper bound on `‖A‖_{L^p → L^p}` and whether it is exact.
    pub fn norm_estimate(&self, p: NormExponent) -> (f64, bool) {
        match &self.kind {
            OperatorKind::Multiplication(psi) => (psi.iter().fold(0.0, |m, v| m.max(v.abs())), true),
            // |Σ_{i<j} w_i v_i| ≤ |Ω|^{1/p'} ‖v‖_p, then integrate over Ω.
            OperatorKind::VolterraCumulative => (self.grid.length(), false),
            OperatorKind::DenseMatrix(m) => (dense_norm(m, self.grid.weights(), p), false),
        }
    }
}

fn dense_norm(m: &[f64], w: &[f64], p: NormExponent) -> f64 {
    let n = w.len();
    // Weighted L^1: max_j Σ_i w_i |m_ij| / w_j. L^∞: max_i Σ_j |m_ij|.
    let norm1 = || (0..n).map(|j| (0..n).map(|i| w[i] * m[i * n + j].abs()).sum::<f64>() / w[j]).fold(0.0, f64::max);
    let norm_inf = || (0..n).map(|i| m[i * n..(i + 1) * n].iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    match p.value() {
        p if p.is_infinite() => norm_inf(),
        1.0 => norm1(),
        2.0 => dense_norm2(m, w),
        p => norm1().powf(1.0 / p) * norm_inf().powf(1.0 - 1.0 / p),
    }
}

/// Power iteration on `BᵀB` with `B = W^{1/2} M W^{-1/2}`, 50 iterations.
fn dense_norm2(m: &[f64], w: &[f64]) -> f64 {
    let n = w.len();
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let b: Vec<f64> = (0..n * n).map(|k| sw[k / n] * m[k] / sw[k % n]).collect();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    let mut bv = vec![0.0; n];
    let mut lambda = 0.0;
    for _ in 0..50 {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        for (i, o) in bv.iter_mut().enumerate() {
            *o = b[i * n..(i + 1) * n].iter().zip(&v).map(|(a, x)| a * x).sum();
        }
        for (j, o) in v.iter_mut().enumerate() {
            *o = (0..n).map(|i| b[i * n + j] * bv[i]).sum();
        }
        lambda = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    lambda.sqrt()
}

pub fn apply_operator(a: &BoundedOperator, u: &Field) -> Result<Field> {
    a.apply(u)
}

pub fn estimate_operator_norm(a: &BoundedOperator, p: NormExponent) -> f64 {
    a.norm_estimate(p).0
}
