//! Principal eigenpair of `-dΔ + q(x)` with homogeneous Dirichlet data.
//!
//! Shifted inverse power iteration: the operator `-dΔ_h + q + s` with
//! `s = max(0, -min q) + 1` is a symmetric M-matrix, factored once; its
//! inverse is positive so the iterates stay positive and converge to the
//! principal eigenvector.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::NumError;
use crate::grid::{laplacian_into, Boundary, Field, Grid};
use crate::linalg::Tridiagonal;

pub const MAX_ITERATIONS: usize = 10_000;
/// Relative change of the Rayleigh quotient accepted as converged.
pub const RAYLEIGH_RTOL: f64 = 1e-12;
/// Target eigen-residual.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// A potential given either as a constant or nodewise on the grid.
#[derive(Debug, Clone, Copy)]
pub enum Potential<'a> {
    Constant(f64),
    Nodal(&'a [f64]),
}

impl Potential<'_> {
    fn at(&self, i: usize) -> f64 {
        match self {
            Potential::Constant(c) => *c,
            Potential::Nodal(v) => v[i],
        }
    }
}

impl From<f64> for Potential<'_> {
    fn from(c: f64) -> Self {
        Potential::Constant(c)
    }
}

impl<'a> From<&'a [f64]> for Potential<'a> {
    fn from(v: &'a [f64]) -> Self {
        Potential::Nodal(v)
    }
}

impl<'a> From<&'a Field> for Potential<'a> {
    fn from(v: &'a Field) -> Self {
        Potential::Nodal(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub lambda: f64,
    /// Positive eigenfunction normalized to max = 1.
    pub phi: Field,
    pub iterations: usize,
    /// ‖(-dΔ_h + q)φ - λφ‖∞
    pub residual: f64,
}

fn apply_operator(g: &Grid, d: f64, q: &[f64], x: &[f64], out: &mut [f64]) {
    laplacian_into(g, x, out);
    for ((o, &xi), &qi) in out.iter_mut().zip(x).zip(q) {
        *o = -d * *o + qi * xi;
    }
}

/// λ₁ᵈ(q) and its positive eigenfunction.
pub fn principal_eigenvalue<'a>(
    g: &Grid,
    d: f64,
    q: impl Into<Potential<'a>>,
) -> Result<EigenResult, NumError> {
    if g.bc() != Boundary::Dirichlet {
        return Err(NumError::InvalidArgument("principal eigenvalue needs a Dirichlet grid"));
    }
    if !(d.is_finite() && d > 0.0) {
        return Err(NumError::InvalidArgument("diffusivity must be finite and > 0"));
    }
    let q = q.into();
    let n = g.nodes();
    if let Potential::Nodal(v) = q {
        g.check(v)?;
    }
    let q: Vec<f64> = (0..n).map(|i| q.at(i)).collect();
    if q.iter().any(|v| !v.is_finite()) {
        return Err(NumError::InvalidArgument("potential must be finite"));
    }

    let q_min = q.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = (-q_min).max(0.0) + 1.0;
    let k = d / (g.spacing() * g.spacing());
    let diag: Vec<f64> = q.iter().map(|qi| 2.0 * k + qi + shift).collect();
    let off = vec![-k; n];
    let lu = Tridiagonal::factor(&off, &diag, &off)?;

    let mut x = vec![1.0; n];
    let mut bx = vec![0.0; n];
    let mut lambda = f64::NAN;
    let mut best_residual = f64::INFINITY;
    let mut since_best = 0usize;
    let mut rayleigh_done = false;
    for iteration in 1..=MAX_ITERATIONS {
        lu.solve_in_place(&mut x);
        let scale = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(NumError::NoConvergence {
                iterations: iteration,
                change: f64::NAN,
            });
        }
        x.iter_mut().for_each(|v| *v /= scale);

        apply_operator(g, d, &q, &x, &mut bx);
        let num: f64 = x.iter().zip(&bx).map(|(a, b)| a * b).sum();
        let den: f64 = x.iter().map(|a| a * a).sum();
        let next = num / den;
        let change = (next - lambda).abs();
        lambda = next;
        let residual = bx
            .iter()
            .zip(&x)
            .fold(0.0_f64, |m, (b, xi)| m.max((b - lambda * xi).abs()));

        rayleigh_done |= change <= RAYLEIGH_RTOL * (1.0 + lambda.abs());
        // after the Rayleigh quotient settles, keep iterating while the
        // eigenvector still improves (it converges at half the rate)
        if residual < (1.0 - 1e-3) * best_residual {
            best_residual = residual;
            since_best = 0;
        } else {
            since_best += 1;
        }
        let stalled = since_best >= 50;
        if rayleigh_done && (residual <= RESIDUAL_TOL || stalled) {
            return Ok(EigenResult {
                lambda,
                phi: Field::new(x),
                iterations: iteration,
                residual,
            });
        }
    }
    Err(NumError::NoConvergence {
        iterations: MAX_ITERATIONS,
        change: f64::NAN,
    })
}

/// λ₀ᵈ = λ₁ᵈ(0).
pub fn lambda0(g: &Grid, d: f64) -> Result<f64, NumError> {
    Ok(principal_eigenvalue(g, d, 0.0)?.lambda)
}

/// Closed-form smallest eigenvalue of `-dΔ_h` on the grid,
/// `(4d/h²) sin²(πh / 2l)`.
pub fn discrete_lambda0(g: &Grid, d: f64) -> f64 {
    let h = g.spacing();
    let s = libm::sin(core::f64::consts::PI * h / (2.0 * g.length()));
    4.0 * d * s * s / (h * h)
}
