//! Evolution equations with a space-dependent fractional order in time.
//!
//! The building blocks, bottom up:
//!
//! * [`domain`]: one-dimensional grids, order fields, trajectories, `L^p` norms
//!   and the bounded operators acting on them.
//! * [`frac_calculus`]: product-integration weights for the variable-order
//!   Riemann–Liouville integral, its Caputo inverse and the composition residual.
//! * [`bounds`]: the kernel and Gamma-function inequalities as checkable
//!   predicates, plus the sampling suites behind `verify-inequalities`.
//! * [`mittag_leffler`]: scalar and operator-valued Mittag-Leffler series with a
//!   constructive growth envelope.
//! * [`solver`]: windowed Picard iteration for `cD^{α(x)} u = A u + f(t, u)`.
//! * [`sir`]: a space-structured SIR model driven by the semilinear solver.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod domain;
pub mod error;
pub mod frac_calculus;
pub mod mittag_leffler;
pub mod sir;
pub mod solver;
pub mod special;

pub use domain::{
    apply_operator, estimate_operator_norm, lp_norm, BoundedOperator, Field, NormExponent, OperatorKind, OrderBounds,
    OrderField, Region, SpatialGrid, TimeGrid, Trajectory,
};
pub use error::{Error, Result};
pub use frac_calculus::{caputo_derivative, check_composition, frac_integral, g_beta, KernelWeights, Scheme};
