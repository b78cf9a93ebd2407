//! Damped Newton for Dirichlet systems `-D_j Δ_h u_j = f_j(x_i, u)` with
//! `M` coupled fields.
//!
//! Unknowns are interleaved node by node (`i * M + j`), which makes the
//! Jacobian a band matrix with `M` sub- and super-diagonals. The Jacobian is
//! assembled from the analytic local derivatives supplied by the caller.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::SteadyError;
use crate::grid::{Boundary, Grid, Helmholtz};
use crate::linalg::BandMatrix;

pub const MAX_OUTER: usize = 50;
pub const MAX_HALVINGS: usize = 30;
/// Residual accepted unconditionally.
pub const TARGET_RESIDUAL: f64 = 1e-11;
/// Residual accepted once Newton steps stop making progress.
pub const ACCEPT_RESIDUAL: f64 = 1e-9;

/// Local kinetics: values `f(x_i, u)` and the Jacobian `∂f/∂u` at node `i`.
pub trait Kinetics<const M: usize> {
    fn eval(&self, node: usize, u: &[f64; M]) -> ([f64; M], [[f64; M]; M]);
}

impl<const M: usize, F> Kinetics<M> for F
where
    F: Fn(usize, &[f64; M]) -> ([f64; M], [[f64; M]; M]),
{
    fn eval(&self, node: usize, u: &[f64; M]) -> ([f64; M], [[f64; M]; M]) {
        self(node, u)
    }
}

#[derive(Debug, Clone)]
pub struct NewtonResult {
    /// Interleaved unknowns.
    pub values: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

impl NewtonResult {
    pub fn component<const M: usize>(&self, j: usize) -> Vec<f64> {
        self.values.iter().skip(j).step_by(M).copied().collect()
    }
}

pub struct DirichletSystem<'a, const M: usize, K: Kinetics<M>> {
    pub grid: &'a Grid,
    pub diffusivity: [f64; M],
    pub kinetics: K,
}

impl<const M: usize, K: Kinetics<M>> DirichletSystem<'_, M, K> {
    fn check(&self) -> Result<(), SteadyError> {
        if self.grid.bc() != Boundary::Dirichlet {
            return Err(SteadyError::InvalidArgument("steady solvers need a Dirichlet grid"));
        }
        Ok(())
    }

    fn local(u: &[f64], i: usize) -> [f64; M] {
        let mut out = [0.0; M];
        out.copy_from_slice(&u[i * M..(i + 1) * M]);
        out
    }

    /// Residual vector and its sup norm.
    pub fn residual(&self, u: &[f64]) -> (Vec<f64>, f64) {
        let n = self.grid.nodes();
        let inv_h2 = 1.0 / (self.grid.spacing() * self.grid.spacing());
        let mut r = vec![0.0; n * M];
        let mut sup = 0.0_f64;
        for i in 0..n {
            let (f, _) = self.kinetics.eval(i, &Self::local(u, i));
            for j in 0..M {
                let c = u[i * M + j];
                let left = if i == 0 { 0.0 } else { u[(i - 1) * M + j] };
                let right = if i + 1 == n { 0.0 } else { u[(i + 1) * M + j] };
                let lap = (left - 2.0 * c + right) * inv_h2;
                let v = -self.diffusivity[j] * lap - f[j];
                r[i * M + j] = v;
                sup = if v.is_nan() { f64::NAN } else { sup.max(v.abs()) };
            }
        }
        (r, sup)
    }

    pub fn jacobian(&self, u: &[f64]) -> BandMatrix {
        let n = self.grid.nodes();
        let inv_h2 = 1.0 / (self.grid.spacing() * self.grid.spacing());
        let mut jac = BandMatrix::zeros(n * M, M, M);
        for i in 0..n {
            let (_, df) = self.kinetics.eval(i, &Self::local(u, i));
            for j in 0..M {
                let row = i * M + j;
                let k = self.diffusivity[j] * inv_h2;
                for (l, dfl) in df[j].iter().enumerate() {
                    jac.add(row, i * M + l, -dfl);
                }
                jac.add(row, row, 2.0 * k);
                if i > 0 {
                    jac.add(row, row - M, -k);
                }
                if i + 1 < n {
                    jac.add(row, row + M, -k);
                }
            }
        }
        jac
    }

    /// Pseudo-time march of `u_t = D_j Δu_j + f_j(u)` with implicit diffusion
    /// and explicit kinetics, clipped at zero. The step is `0.5 / Λ` with `Λ`
    /// the largest absolute row sum of the local Jacobian (capped at 0.1).
    /// Stops at `horizon` or once `sup|Δu| / dt <= tol`. Brings a guess into
    /// the basin of a stable positive state before Newton.
    pub fn relax(&self, guess: Vec<f64>, horizon: f64, tol: f64) -> Result<Vec<f64>, SteadyError> {
        self.check()?;
        let n = self.grid.nodes();
        if guess.len() != n * M {
            return Err(SteadyError::InvalidArgument("initial guess does not conform to grid"));
        }
        let mut u = guess;
        let mut f = vec![0.0; n * M];
        let mut col = vec![0.0; n];
        let mut t = 0.0;
        let mut steps = 0;
        while t < horizon {
            let mut lambda = 0.0_f64;
            for i in 0..n {
                let (fi, df) = self.kinetics.eval(i, &Self::local(&u, i));
                f[i * M..(i + 1) * M].copy_from_slice(&fi);
                for row in df.iter() {
                    lambda = lambda.max(row.iter().map(|v| v.abs()).sum());
                }
            }
            let dt = if lambda > 0.0 { (0.5 / lambda).min(0.1) } else { 0.1 };
            let mut change = 0.0_f64;
            for j in 0..M {
                let op = Helmholtz::new(self.grid, self.diffusivity[j], 1.0 / dt)?;
                for i in 0..n {
                    col[i] = u[i * M + j] / dt + f[i * M + j];
                }
                op.solve_in_place(&mut col)?;
                for i in 0..n {
                    let v = col[i].max(0.0);
                    change = change.max((v - u[i * M + j]).abs());
                    u[i * M + j] = v;
                }
            }
            t += dt;
            steps += 1;
            if !change.is_finite() {
                return Err(SteadyError::Diverged {
                    iterations: steps,
                    residual: change,
                });
            }
            if change / dt <= tol {
                break;
            }
        }
        Ok(u)
    }

    /// Damped Newton from `guess` (interleaved).
    pub fn solve(&self, guess: Vec<f64>) -> Result<NewtonResult, SteadyError> {
        self.check()?;
        if guess.len() != self.grid.nodes() * M {
            return Err(SteadyError::InvalidArgument("initial guess does not conform to grid"));
        }
        let mut u = guess;
        let (mut r, mut res) = self.residual(&u);
        for it in 0..=MAX_OUTER {
            if res <= TARGET_RESIDUAL {
                return Ok(NewtonResult {
                    values: u,
                    iterations: it,
                    residual: res,
                });
            }
            if it == MAX_OUTER || !res.is_finite() {
                break;
            }
            let lu = match self.jacobian(&u).factor() {
                Ok(lu) => lu,
                Err(_) => break,
            };
            let mut step: Vec<f64> = r.iter().map(|v| -v).collect();
            lu.solve_in_place(&mut step);
            let u_scale = u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let step_size = step.iter().fold(0.0_f64, |m, v| m.max(v.abs()));

            let mut alpha = 1.0;
            let mut accepted = None;
            for _ in 0..=MAX_HALVINGS {
                let trial: Vec<f64> = u.iter().zip(&step).map(|(a, s)| a + alpha * s).collect();
                let (tr, tres) = self.residual(&trial);
                if tres < res {
                    accepted = Some((trial, tr, tres));
                    break;
                }
                alpha *= 0.5;
            }
            match accepted {
                Some((nu, nr, nres)) => {
                    u = nu;
                    r = nr;
                    res = nres;
                    // rounding floor reached
                    if res <= ACCEPT_RESIDUAL && alpha * step_size <= 1e-13 * u_scale.max(1e-300) {
                        return Ok(NewtonResult {
                            values: u,
                            iterations: it + 1,
                            residual: res,
                        });
                    }
                }
                None => {
                    if res <= ACCEPT_RESIDUAL {
                        return Ok(NewtonResult {
                            values: u,
                            iterations: it,
                            residual: res,
                        });
                    }
                    return Err(SteadyError::Diverged {
                        iterations: it,
                        residual: res,
                    });
                }
            }
        }
        Err(SteadyError::Diverged {
            iterations: MAX_OUTER,
            residual: res,
        })
    }
}
