//! Uniform 1-D grids, nodal fields and the discrete Laplacian.
//!
//! A grid on `(0, l)` has `n` interior nodes at spacing `h = l / (n + 1)`.
//! Dirichlet fields store the `n` interior nodes only (the boundary values
//! are identically zero); Neumann fields store all `n + 2` nodes and the
//! zero-flux condition is imposed by reflection (ghost value = first
//! interior neighbour), which keeps the scheme second order.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Deref, DerefMut};

use crate::error::NumError;
use crate::linalg::Tridiagonal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Boundary {
    Neumann,
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Grid {
    length: f64,
    n: usize,
    bc: Boundary,
}

impl Grid {
    pub const MIN_INTERIOR: usize = 3;

    pub fn new(length: f64, n: usize, bc: Boundary) -> Result<Self, NumError> {
        if !(length.is_finite() && length > 0.0) {
            return Err(NumError::InvalidArgument("grid length must be finite and > 0"));
        }
        if n < Self::MIN_INTERIOR {
            return Err(NumError::InvalidArgument("grid needs at least 3 interior nodes"));
        }
        Ok(Self { length, n, bc })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Interior node count.
    pub fn interior(&self) -> usize {
        self.n
    }

    pub fn bc(&self) -> Boundary {
        self.bc
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.n + 1) as f64
    }

    /// Same interval and resolution, other boundary condition.
    pub fn with_bc(&self, bc: Boundary) -> Self {
        Self { bc, ..*self }
    }

    /// Number of stored values per field.
    pub fn nodes(&self) -> usize {
        match self.bc {
            Boundary::Neumann => self.n + 2,
            Boundary::Dirichlet => self.n,
        }
    }

    /// Coordinate of stored node `i`.
    pub fn x(&self, i: usize) -> f64 {
        let h = self.spacing();
        match self.bc {
            Boundary::Neumann => i as f64 * h,
            Boundary::Dirichlet => (i + 1) as f64 * h,
        }
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.nodes()).map(|i| self.x(i)).collect()
    }

    /// Trapezoid weights for the stored nodes. For Dirichlet grids the
    /// boundary values are zero, so every interior weight is `h`.
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.spacing();
        match self.bc {
            Boundary::Neumann if i == 0 || i == self.n + 1 => 0.5 * h,
            _ => h,
        }
    }

    /// Trapezoid rule over the whole interval.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.nodes());
        values
            .iter()
            .enumerate()
            .map(|(i, v)| self.weight(i) * v)
            .sum()
    }

    pub fn check(&self, values: &[f64]) -> Result<(), NumError> {
        if values.len() == self.nodes() {
            Ok(())
        } else {
            Err(NumError::DimensionMismatch {
                expected: self.nodes(),
                found: values.len(),
            })
        }
    }
}

/// Nodal values of one scalar field, laid out as described by its grid.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Field(Vec<f64>);

impl Field {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn constant(g: &Grid, c: f64) -> Self {
        Self(vec![c; g.nodes()])
    }

    pub fn zeros(g: &Grid) -> Self {
        Self::constant(g, 0.0)
    }

    pub fn from_fn(g: &Grid, mut f: impl FnMut(f64) -> f64) -> Self {
        Self((0..g.nodes()).map(|i| f(g.x(i))).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// max_i |self_i - other_i|; infinite on length mismatch.
    pub fn sup_distance(&self, other: &Field) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Field {
        Field(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Field, mut f: impl FnMut(f64, f64) -> f64) -> Field {
        debug_assert_eq!(self.len(), other.len());
        Field(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }
}

impl Deref for Field {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Field {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Writes `Δ_h u` into `out` (both conforming to `g`).
pub fn laplacian_into(g: &Grid, u: &[f64], out: &mut [f64]) {
    let inv_h2 = 1.0 / (g.spacing() * g.spacing());
    let m = u.len();
    match g.bc() {
        Boundary::Dirichlet => {
            for i in 0..m {
                let left = if i == 0 { 0.0 } else { u[i - 1] };
                let right = if i + 1 == m { 0.0 } else { u[i + 1] };
                out[i] = (left - 2.0 * u[i] + right) * inv_h2;
            }
        }
        Boundary::Neumann => {
            out[0] = 2.0 * (u[1] - u[0]) * inv_h2;
            for i in 1..m - 1 {
                out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv_h2;
            }
            out[m - 1] = 2.0 * (u[m - 2] - u[m - 1]) * inv_h2;
        }
    }
}

/// Second-order central-difference Laplacian of `u`.
pub fn apply_laplacian(g: &Grid, u: &[f64]) -> Result<Field, NumError> {
    g.check(u)?;
    let mut out = vec![0.0; u.len()];
    laplacian_into(g, u, &mut out);
    Ok(Field(out))
}

/// Prefactored `(m - d Δ_h)` for repeated solves with a fixed shift.
#[derive(Debug, Clone)]
pub struct Helmholtz {
    grid: Grid,
    lu: Tridiagonal,
}

impl Helmholtz {
    pub fn new(g: &Grid, d: f64, m: f64) -> Result<Self, NumError> {
        if !(d.is_finite() && d > 0.0) {
            return Err(NumError::InvalidArgument("diffusivity must be finite and > 0"));
        }
        if !(m.is_finite() && m >= 0.0) {
            return Err(NumError::InvalidArgument("shift must be finite and >= 0"));
        }
        if g.bc() == Boundary::Neumann && m == 0.0 {
            // constants span the kernel
            return Err(NumError::Singular { row: 0 });
        }
        let k = d / (g.spacing() * g.spacing());
        let nodes = g.nodes();
        let diag = vec![m + 2.0 * k; nodes];
        let mut lower = vec![-k; nodes];
        let mut upper = vec![-k; nodes];
        if g.bc() == Boundary::Neumann {
            upper[0] = -2.0 * k;
            lower[nodes - 1] = -2.0 * k;
        }
        Ok(Self {
            grid: *g,
            lu: Tridiagonal::factor(&lower, &diag, &upper)?,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn solve_in_place(&self, rhs: &mut [f64]) -> Result<(), NumError> {
        self.grid.check(rhs)?;
        self.lu.solve_in_place(rhs);
        Ok(())
    }
}

/// Solves `(m - d Δ_h) u = rhs`.
pub fn solve_helmholtz(g: &Grid, d: f64, m: f64, rhs: &[f64]) -> Result<Field, NumError> {
    g.check(rhs)?;
    let op = Helmholtz::new(g, d, m)?;
    let mut u = rhs.to_vec();
    op.solve_in_place(&mut u)?;
    Ok(Field(u))
}
