//! Windowed fixed-point iteration for `u = u₀ + J^{α}[g(·, u)]`.
//!
//! Nodes `0..=a` are frozen. On the window `(a, b]` the history contribution of the
//! frozen nodes is computed once; each sweep then only convolves over the window.

use rayon::prelude::*;

use crate::domain::{lp_norm_slice, NormExponent};
use crate::frac_calculus::KernelWeights;

/// Evaluates `g_n = g(t_n, u_n)` into the output slice.
pub(crate) type Rhs<'a> = dyn FnMut(usize, &[f64], &mut [f64]) + 'a;

/// Relative size below which successive changes are rounding noise.
const NOISE_FLOOR: f64 = 1e-13;

/// Work per window (points × steps) above which sweeps run in parallel.
const PARALLEL_WORK: usize = 4096;

/// First iterate on a new window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StartIterate {
    /// Constant extension of the last frozen value.
    #[default]
    Hold,
    /// Zero on the whole window.
    Zero,
}

/// Iterates must stay within `radius` of `center` at every window node.
pub(crate) struct Ball<'a> {
    pub center: &'a [f64],
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Outcome {
    Converged { iterations: usize, contraction: f64 },
    NotConverged { iterations: usize, last_change: f64 },
    Diverged,
    Escaped,
}

pub(crate) struct Engine<'k> {
    kernel: &'k KernelWeights,
    weights: Vec<f64>,
    p: NormExponent,
    nx: usize,
    nt: usize,
    u0: Vec<f64>,
    /// Time-major states.
    u: Vec<f64>,
    /// Point-major right-hand side values.
    g: Vec<f64>,
}

impl<'k> Engine<'k> {
    pub fn new(kernel: &'k KernelWeights, weights: &[f64], p: NormExponent, u0: &[f64], rhs: &mut Rhs) -> Self {
        let nx = u0.len();
        let nt = kernel.time().nodes();
        let mut u = vec![0.0; nx * nt];
        u[..nx].copy_from_slice(u0);
        let mut engine =
            Self { kernel, weights: weights.to_vec(), p, nx, nt, u0: u0.to_vec(), u, g: vec![0.0; nx * nt] };
        engine.refresh_rhs(0, 0, rhs);
        engine
    }

    pub fn state(&self, n: usize) -> &[f64] {
        &self.u[n * self.nx..(n + 1) * self.nx]
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        lp_norm_slice(v, &self.weights, self.p)
    }

    pub fn into_states(self) -> Vec<f64> {
        self.u
    }

    /// Recomputes `g` at nodes `from..=to` from the stored states.
    fn refresh_rhs(&mut self, from: usize, to: usize, rhs: &mut Rhs) {
        let mut out = vec![0.0; self.nx];
        for n in from..=to {
            rhs(n, &self.u[n * self.nx..(n + 1) * self.nx], &mut out);
            for (j, v) in out.iter().enumerate() {
                self.g[j * self.nt + n] = *v;
            }
        }
    }

    fn for_each_point(&self, width: usize, out: &mut [f64], f: impl Fn(usize, &mut [f64]) + Sync) {
        if self.nx * width >= PARALLEL_WORK {
            out.par_chunks_mut(width).enumerate().for_each(|(j, o)| f(j, o));
        } else {
            out.chunks_mut(width).enumerate().for_each(|(j, o)| f(j, o));
        }
    }

    /// Iterates on `(a, b]` until the relative sup-over-window change is at most `tol`.
    pub fn window(
        &mut self,
        a: usize,
        b: usize,
        start: StartIterate,
        tol: f64,
        max_iter: usize,
        rhs: &mut Rhs,
        ball: Option<Ball>,
    ) -> Outcome {
        let (nx, nt, w) = (self.nx, self.nt, b - a);
        // history[j * w + i] for node n = a + 1 + i.
        let mut history = vec![0.0; nx * w];
        self.for_each_point(w, &mut history, |j, h| {
            let c = self.kernel.class(j);
            let g = &self.g[j * nt..(j + 1) * nt];
            for (i, v) in h.iter_mut().enumerate() {
                let n = a + 1 + i;
                let frozen: f64 = g[1..=a].iter().zip(c.tail[n - a..n].iter().rev()).map(|(x, y)| x * y).sum();
                *v = c.start[n] * g[0] + frozen;
            }
        });
        for n in a + 1..=b {
            let (head, tail) = self.u.split_at_mut(n * nx);
            let dst = &mut tail[..nx];
            match start {
                StartIterate::Hold => dst.copy_from_slice(&head[a * nx..(a + 1) * nx]),
                StartIterate::Zero => dst.fill(0.0),
            }
        }

        let mut next = vec![0.0; nx * w];
        let mut diff = vec![0.0; nx];
        let mut previous_change: Option<f64> = None;
        let mut contraction = 0.0f64;
        let mut change = f64::INFINITY;
        for iteration in 1..=max_iter {
            self.refresh_rhs(a + 1, b, rhs);
            self.for_each_point(w, &mut next, |j, o| {
                let c = self.kernel.class(j);
                let g = &self.g[j * nt..(j + 1) * nt];
                let u0 = self.u0[j];
                for (i, v) in o.iter_mut().enumerate() {
                    *v = u0 + history[j * w + i] + c.partial(a + 1 + i, a + 1, g);
                }
            });
            change = 0.0;
            let mut scale = 0.0f64;
            for i in 0..w {
                let row = &mut self.u[(a + 1 + i) * nx..(a + 2 + i) * nx];
                for j in 0..nx {
                    let v = next[j * w + i];
                    diff[j] = v - row[j];
                    row[j] = v;
                }
                change = change.max(lp_norm_slice(&diff, &self.weights, self.p));
                scale = scale.max(lp_norm_slice(row, &self.weights, self.p));
            }
            if !(change.is_finite() && scale.is_finite()) {
                return Outcome::Diverged;
            }
            if let Some(prev) = previous_change {
                if prev > 0.0 && change > NOISE_FLOOR * scale {
                    contraction = contraction.max(change / prev);
                }
            }
            previous_change = Some(change);
            if let Some(ball) = &ball {
                let escaped = (a + 1..=b).any(|n| {
                    let row = &self.u[n * nx..(n + 1) * nx];
                    diff.iter_mut().zip(row).zip(ball.center).for_each(|((d, x), c)| *d = x - c);
                    lp_norm_slice(&diff, &self.weights, self.p) > ball.radius
                });
                if escaped {
                    return Outcome::Escaped;
                }
            }
            if change <= tol * scale {
                self.refresh_rhs(a + 1, b, rhs);
                return Outcome::Converged { iterations: iteration, contraction };
            }
        }
        Outcome::NotConverged { iterations: max_iter, last_change: change }
    }

    /// `max_{n ≤ last} ‖u_n − (u₀ + J^{α} g)_n‖_p` with `g` evaluated at the stored states.
    pub fn residual(&self, last: usize) -> f64 {
        let (nx, nt) = (self.nx, self.nt);
        let width = last + 1;
        let mut tu = vec![0.0; nx * width];
        self.for_each_point(width, &mut tu, |j, o| {
            let c = self.kernel.class(j);
            let g = &self.g[j * nt..(j + 1) * nt];
            for (n, v) in o.iter_mut().enumerate() {
                *v = self.u0[j] + c.convolve(n, g);
            }
        });
        let mut diff = vec![0.0; nx];
        (0..width)
            .map(|n| {
                for j in 0..nx {
                    diff[j] = self.u[n * nx + j] - tu[j * width + n];
                }
                lp_norm_slice(&diff, &self.weights, self.p)
            })
            .fold(0.0, f64::max)
    }
}
