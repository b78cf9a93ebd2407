//! Positive steady states of the Dirichlet problem.
//!
//! Existence of each semi-trivial or positive state is decided by the sign
//! of a principal eigenvalue; the states themselves are assembled from
//! scalar logistic problems wherever the structure allows it:
//!
//! * `S*` solves `-dΔS = (a - b)S - cS²`;
//! * `(S̃, Ĩ)`: `S̃ + Ĩ = S*` and `Ĩ` is logistic with rate `(k - c)S* - b`
//!   and crowding `k`;
//! * `(Ŝ, P̂)` needs a genuinely coupled Newton solve;
//! * the positive `(S, I, P)`: `S + I = Ŝ`, `P = P̂` and `I` is logistic with
//!   rate `(k - c)Ŝ - b - ℓP̂` and crowding `k`.
//!
//! Coupled Newton solvers for the two- and three-field systems are exposed
//! as well; they serve as an independent route (uniqueness probes,
//! decomposition checks).

use alloc::vec;
use alloc::vec::Vec;

use crate::eigen::{lambda0, principal_eigenvalue, EigenResult, Potential};
use crate::error::{NumError, SteadyError};
use crate::grid::{apply_laplacian, Boundary, Field, Grid};
use crate::model::{EigenBundle, Parameters, State};
use crate::newton::{DirichletSystem, Kinetics, NewtonResult};
use crate::rng::SplitMix64;

/// Reported solutions must have residual at most this.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Positive means min > POSITIVE_RTOL * max at interior nodes.
pub const POSITIVE_RTOL: f64 = 1e-12;
/// A field whose max is below TRIVIAL_RTOL * (natural scale) is the zero branch.
pub const TRIVIAL_RTOL: f64 = 1e-8;
/// Continuation steps in the predator gain θ.
pub const CONTINUATION_STEPS: usize = 8;

fn require_dirichlet(g: &Grid) -> Result<(), SteadyError> {
    if g.bc() == Boundary::Dirichlet {
        Ok(())
    } else {
        Err(SteadyError::InvalidArgument("steady solvers need a Dirichlet grid"))
    }
}

/// Strictly positive and not the zero branch, relative to `scale`.
pub fn is_positive(v: &[f64], scale: f64) -> bool {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    max > TRIVIAL_RTOL * scale.abs() && min > POSITIVE_RTOL * max
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticSolution {
    /// λ₁ᵈ(-r): the solution exists iff this is negative.
    pub lambda: f64,
    pub solution: Option<Field>,
    pub newton_iterations: usize,
    pub residual: Option<f64>,
}

/// ‖-dΔ_h u - r u + κu²‖∞, evaluated independently of Newton.
pub fn logistic_residual(g: &Grid, d: f64, r: Potential<'_>, kappa: f64, u: &[f64]) -> Result<f64, NumError> {
    let lap = apply_laplacian(g, u)?;
    Ok((0..u.len()).fold(0.0_f64, |m, i| {
        let ri = match r {
            Potential::Constant(c) => c,
            Potential::Nodal(v) => v[i],
        };
        m.max((-d * lap[i] - ri * u[i] + kappa * u[i] * u[i]).abs())
    }))
}

fn nodal(g: &Grid, r: Potential<'_>) -> Result<Vec<f64>, SteadyError> {
    match r {
        Potential::Constant(c) => Ok(vec![c; g.nodes()]),
        Potential::Nodal(v) => {
            g.check(v)?;
            Ok(v.to_vec())
        }
    }
}

/// Damped Newton for `-dΔu = r(x)u - κu²` from `guess`, without any
/// existence pre-check. Converging to the zero branch is not an error here.
pub fn newton_logistic(
    g: &Grid,
    d: f64,
    r: Potential<'_>,
    kappa: f64,
    guess: &[f64],
) -> Result<NewtonResult, SteadyError> {
    require_dirichlet(g)?;
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(SteadyError::InvalidArgument("crowding coefficient must be > 0"));
    }
    g.check(guess)?;
    let sys = logistic_system(g, d, nodal(g, r)?, kappa);
    sys.solve(guess.to_vec())
}

/// Positive solution of `-dΔu = r(x)u - κu²`, `u = 0` on the boundary,
/// present iff `λ₁ᵈ(-r) < 0`.
pub fn solve_logistic(g: &Grid, d: f64, r: Potential<'_>, kappa: f64) -> Result<LogisticSolution, SteadyError> {
    require_dirichlet(g)?;
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(SteadyError::InvalidArgument("crowding coefficient must be > 0"));
    }
    let rate = nodal(g, r)?;
    let minus_r: Vec<f64> = rate.iter().map(|v| -v).collect();
    let eig = principal_eigenvalue(g, d, minus_r.as_slice())?;
    if eig.lambda >= 0.0 {
        return Ok(LogisticSolution {
            lambda: eig.lambda,
            solution: None,
            newton_iterations: 0,
            residual: None,
        });
    }
    let amplitude = -eig.lambda / kappa;
    let floor = 1e-6 * amplitude;
    let guess: Vec<f64> = eig.phi.iter().map(|p| (p * amplitude).max(floor)).collect();
    let res = newton_logistic(g, d, Potential::Nodal(&rate), kappa, &guess)?;
    let scale = rate.iter().fold(0.0_f64, |m, v| m.max(*v)) / kappa;
    if !is_positive(&res.values, scale) {
        return Err(SteadyError::Inconsistent {
            what: "logistic Newton limit",
            min: res.values.iter().copied().fold(f64::INFINITY, f64::min),
        });
    }
    let residual = logistic_residual(g, d, Potential::Nodal(&rate), kappa, &res.values)?;
    if residual > RESIDUAL_TOL {
        return Err(SteadyError::Diverged {
            iterations: res.iterations,
            residual,
        });
    }
    Ok(LogisticSolution {
        lambda: eig.lambda,
        solution: Some(Field::new(res.values)),
        newton_iterations: res.iterations,
        residual: Some(residual),
    })
}

/// S*: positive solution of `-dΔS = (a - b)S - cS²`.
pub fn solve_s_star(g: &Grid, p: &Parameters) -> Result<LogisticSolution, SteadyError> {
    solve_logistic(g, p.d, Potential::Constant(p.a - p.b), p.c)
}

fn take_s_star(g: &Grid, p: &Parameters) -> Result<Field, SteadyError> {
    solve_s_star(g, p)?
        .solution
        .ok_or(SteadyError::MissingPrerequisite("S*"))
}

/// Sup-norm residual of the full Dirichlet steady-state system at `state`,
/// computed from `apply_laplacian` and the model reaction terms. With a
/// zero component it is the residual of the corresponding reduced system.
pub fn system_residual(g: &Grid, p: &Parameters, state: &State) -> Result<f64, NumError> {
    let ls = apply_laplacian(g, &state.s)?;
    let li = apply_laplacian(g, &state.i)?;
    let lp = apply_laplacian(g, &state.p)?;
    let mut sup = 0.0_f64;
    for n in 0..g.nodes() {
        let f = p.reaction(state.s[n], state.i[n], state.p[n]);
        sup = sup
            .max((-p.d * ls[n] - f[0]).abs())
            .max((-p.d * li[n] - f[1]).abs())
            .max((-p.big_d * lp[n] - f[2]).abs());
    }
    Ok(sup)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiSolution {
    pub s_tilde: Field,
    pub i_tilde: Field,
    /// λ₁ᵈ(b - (k - c)S*)
    pub lambda: f64,
    pub residual: f64,
    pub newton_iterations: usize,
}

/// Positive solution `(S̃, Ĩ)` of the predator-free system; `Ok(None)` when
/// `λ₁ᵈ(b - (k - c)S*) ≥ 0`.
pub fn solve_si(g: &Grid, p: &Parameters) -> Result<Option<SiSolution>, SteadyError> {
    require_dirichlet(g)?;
    let s_star = take_s_star(g, p)?;
    let rate: Vec<f64> = s_star.iter().map(|s| (p.k - p.c) * s - p.b).collect();
    let inf = solve_logistic(g, p.d, Potential::Nodal(&rate), p.k)?;
    let Some(i_tilde) = inf.solution else {
        return Ok(None);
    };
    let s_tilde = s_star.zip_map(&i_tilde, |s, i| s - i);
    if !is_positive(&s_tilde, p.carrying_capacity()) {
        return Err(SteadyError::Inconsistent {
            what: "S~ = S* - I~",
            min: s_tilde.min(),
        });
    }
    let state = State {
        s: s_tilde.clone(),
        i: i_tilde.clone(),
        p: Field::zeros(g),
    };
    let residual = system_residual(g, p, &state)?;
    if residual > RESIDUAL_TOL {
        return Err(SteadyError::Diverged {
            iterations: inf.newton_iterations,
            residual,
        });
    }
    Ok(Some(SiSolution {
        s_tilde,
        i_tilde,
        lambda: inf.lambda,
        residual,
        newton_iterations: inf.newton_iterations,
    }))
}

fn prey_predator_system<'a>(
    g: &'a Grid,
    p: &Parameters,
    theta: f64,
) -> DirichletSystem<'a, 2, impl Fn(usize, &[f64; 2]) -> ([f64; 2], [[f64; 2]; 2])> {
    let (r, c, ell, rho) = (p.a - p.b, p.c, p.ell, p.rho);
    DirichletSystem {
        grid: g,
        diffusivity: [p.d, p.big_d],
        kinetics: move |_: usize, u: &[f64; 2]| {
            let (s, q) = (u[0], u[1]);
            (
                [r * s - c * s * s - ell * s * q, theta * s * q - rho * q],
                [[r - 2.0 * c * s - ell * q, -ell * s], [theta * q, theta * s - rho]],
            )
        },
    }
}

/// Coupled Newton for `(Ŝ, P̂)` from an arbitrary guess.
pub fn newton_prey_predator(g: &Grid, p: &Parameters, s0: &[f64], p0: &[f64]) -> Result<NewtonResult, SteadyError> {
    require_dirichlet(g)?;
    g.check(s0)?;
    g.check(p0)?;
    prey_predator_system(g, p, p.theta).solve(interleave(&[s0, p0]))
}

fn si_system<'a>(
    g: &'a Grid,
    p: &Parameters,
) -> DirichletSystem<'a, 2, impl Fn(usize, &[f64; 2]) -> ([f64; 2], [[f64; 2]; 2])> {
    let (a, b, c, k) = (p.a, p.b, p.c, p.k);
    DirichletSystem {
        grid: g,
        diffusivity: [p.d, p.d],
        kinetics: move |_: usize, u: &[f64; 2]| {
            let (s, i) = (u[0], u[1]);
            let w = s + i;
            (
                [a * w - b * s - c * w * s - k * s * i, k * s * i - b * i - c * w * i],
                [
                    [a - b - 2.0 * c * s - (c + k) * i, a - (c + k) * s],
                    [(k - c) * i, (k - c) * s - b - 2.0 * c * i],
                ],
            )
        },
    }
}

fn full_system<'a>(
    g: &'a Grid,
    p: &Parameters,
) -> DirichletSystem<'a, 3, impl Fn(usize, &[f64; 3]) -> ([f64; 3], [[f64; 3]; 3])> {
    let q = *p;
    DirichletSystem {
        grid: g,
        diffusivity: [p.d, p.d, p.big_d],
        kinetics: move |_: usize, u: &[f64; 3]| {
            let (s, i, x) = (u[0], u[1], u[2]);
            let f = q.reaction(s, i, x);
            let (a, b, c, k) = (q.a, q.b, q.c, q.k);
            (
                f,
                [
                    [
                        a - b - 2.0 * c * s - (c + k) * i - q.ell * x,
                        a - (c + k) * s,
                        -q.ell * s,
                    ],
                    [
                        (k - c) * i,
                        (k - c) * s - b - 2.0 * c * i - q.gamma * x,
                        -q.gamma * i,
                    ],
                    [q.theta * x, q.sigma * x, q.theta * s + q.sigma * i - q.rho],
                ],
            )
        },
    }
}

fn logistic_system<'a>(
    g: &'a Grid,
    d: f64,
    rate: Vec<f64>,
    kappa: f64,
) -> DirichletSystem<'a, 1, impl Fn(usize, &[f64; 1]) -> ([f64; 1], [[f64; 1]; 1])> {
    DirichletSystem {
        grid: g,
        diffusivity: [d],
        kinetics: move |i: usize, u: &[f64; 1]| {
            let v = u[0];
            ([rate[i] * v - kappa * v * v], [[rate[i] - 2.0 * kappa * v]])
        },
    }
}

/// Coupled Newton for the predator-free pair `(S̃, Ĩ)`.
pub fn newton_si(g: &Grid, p: &Parameters, s0: &[f64], i0: &[f64]) -> Result<NewtonResult, SteadyError> {
    require_dirichlet(g)?;
    g.check(s0)?;
    g.check(i0)?;
    si_system(g, p).solve(interleave(&[s0, i0]))
}

/// Coupled Newton for the full three-field steady state.
pub fn newton_full(g: &Grid, p: &Parameters, guess: &State) -> Result<NewtonResult, SteadyError> {
    require_dirichlet(g)?;
    if !guess.conforms(g) {
        return Err(SteadyError::InvalidArgument("initial guess does not conform to grid"));
    }
    full_system(g, p).solve(interleave(&[&guess.s, &guess.i, &guess.p]))
}

fn interleave(fields: &[&[f64]]) -> Vec<f64> {
    let n = fields[0].len();
    let mut out = Vec::with_capacity(n * fields.len());
    for i in 0..n {
        for f in fields {
            out.push(f[i]);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreyPredatorSolution {
    pub s_hat: Field,
    pub p_hat: Field,
    /// λ₁ᴰ(ρ - θS*)
    pub lambda: f64,
    pub residual: f64,
    pub newton_iterations: usize,
    /// Number of θ-continuation steps taken (0 when the direct solve worked).
    pub continuation_steps: usize,
}

fn accept_prey_predator(
    g: &Grid,
    p: &Parameters,
    res: &NewtonResult,
) -> Option<(Field, Field)> {
    let s = Field::new(res.component::<2>(0));
    let q = Field::new(res.component::<2>(1));
    let scale = p.carrying_capacity();
    let pred_scale = scale * p.theta / p.ell.max(f64::MIN_POSITIVE);
    (is_positive(&s, scale) && is_positive(&q, pred_scale.max(scale)) && g.check(&s).is_ok()).then_some((s, q))
}

/// λ₁ᴰ(ρ - θS*) as a function of θ, for continuation.
fn predation_eigen(g: &Grid, p: &Parameters, theta: f64, s_star: &Field) -> Result<EigenResult, NumError> {
    let q: Vec<f64> = s_star.iter().map(|s| p.rho - theta * s).collect();
    principal_eigenvalue(g, p.big_d, q.as_slice())
}

/// Positive solution `(Ŝ, P̂)` of the susceptible-free prey-predator system;
/// `Ok(None)` when `λ₁ᵈ(b - a) ≥ 0` or `λ₁ᴰ(ρ - θS*) ≥ 0`.
pub fn solve_prey_predator(g: &Grid, p: &Parameters) -> Result<Option<PreyPredatorSolution>, SteadyError> {
    require_dirichlet(g)?;
    let star = solve_s_star(g, p)?;
    let Some(s_star) = star.solution else {
        return Ok(None);
    };
    let eig = predation_eigen(g, p, p.theta, &s_star)?;
    if eig.lambda >= 0.0 {
        return Ok(None);
    }
    let finish = |s: Field, q: Field, iterations: usize, steps: usize| -> Result<Option<PreyPredatorSolution>, SteadyError> {
        let state = State {
            s: s.clone(),
            i: Field::zeros(g),
            p: q.clone(),
        };
        let residual = system_residual(g, p, &state)?;
        if residual > RESIDUAL_TOL {
            return Err(SteadyError::Diverged { iterations, residual });
        }
        Ok(Some(PreyPredatorSolution {
            s_hat: s,
            p_hat: q,
            lambda: eig.lambda,
            residual,
            newton_iterations: iterations,
            continuation_steps: steps,
        }))
    };

    let eps = 0.1 * s_star.max();
    let p0: Vec<f64> = eig.phi.iter().map(|v| eps * v).collect();
    let mut total_iterations = 0;
    if let Ok(res) = newton_prey_predator(g, p, &s_star, &p0) {
        total_iterations += res.iterations;
        if let Some((s, q)) = accept_prey_predator(g, p, &res) {
            return finish(s, q, res.iterations, 0);
        }
    }

    let (current_s_q, steps) = match continue_in_theta(g, p, &s_star, &mut total_iterations)? {
        Some(found) => found,
        None => {
            // pseudo-time march from the direct guess, then polish
            let sys = prey_predator_system(g, p, p.theta);
            let relaxed = sys.relax(interleave(&[&s_star, &p0]), RELAX_HORIZON, RELAX_TOL)?;
            let res = sys.solve(relaxed)?;
            total_iterations += res.iterations;
            let found = accept_prey_predator(g, p, &res).ok_or(SteadyError::Inconsistent {
                what: "prey-predator Newton limit",
                min: res.values.iter().copied().fold(f64::INFINITY, f64::min),
            })?;
            (found, 0)
        }
    };
    let (s, q) = current_s_q;
    finish(s, q, total_iterations, steps)
}

/// Pseudo-time horizon and stationarity tolerance used before a Newton polish.
pub const RELAX_HORIZON: f64 = 500.0;
pub const RELAX_TOL: f64 = 1e-6;

/// Natural-parameter continuation in θ from the bifurcation point
/// `λ₁ᴰ(ρ - θ_c S*) = 0`. The first guess is the local branch
/// `(S* + τS₁, τφ)`; later guesses extrapolate linearly from the last two
/// solutions. Steps are halved on failure. `None` if the branch is lost.
fn continue_in_theta(
    g: &Grid,
    p: &Parameters,
    s_star: &Field,
    total_iterations: &mut usize,
) -> Result<Option<((Field, Field), usize)>, SteadyError> {
    let theta_c = bifurcation_theta(g, p, s_star)?;
    let span = p.theta - theta_c;
    if !(span > 0.0) {
        return Ok(None);
    }
    let kernel = predation_eigen(g, p, theta_c, s_star)?.phi;
    // S₁ = -(-dΔ - (a - b) + 2cS*)⁻¹ (ℓ S* φ)
    let k = p.d / (g.spacing() * g.spacing());
    let diag: Vec<f64> = s_star.iter().map(|s| 2.0 * k - (p.a - p.b) + 2.0 * p.c * s).collect();
    let off = vec![-k; g.nodes()];
    let lu = crate::linalg::Tridiagonal::factor(&off, &diag, &off)?;
    let mut s1: Vec<f64> = s_star.iter().zip(kernel.iter()).map(|(s, f)| -p.ell * s * f).collect();
    lu.solve_in_place(&mut s1);
    let num: f64 = g.integrate(&s_star.zip_map(&kernel, |s, f| s * f * f));
    let den: f64 = g.integrate(&Field::new(s1.clone()).zip_map(&kernel, |a, f| a * f * f));
    if !(den < 0.0) {
        return Ok(None);
    }

    let mut history: Vec<(f64, Field, Field)> = Vec::new();
    let mut theta = theta_c;
    let mut step = span / CONTINUATION_STEPS as f64;
    let min_step = span / 1024.0;
    let mut taken = 0;
    while theta < p.theta {
        let target = (theta + step).min(p.theta);
        let (s0, q0): (Vec<f64>, Vec<f64>) = match history.as_slice() {
            [] => {
                let tau = -(target - theta_c) * num / (theta_c * den);
                (
                    s_star.iter().zip(&s1).map(|(s, v)| s + tau * v).collect(),
                    kernel.iter().map(|f| tau * f).collect(),
                )
            }
            [(t, s, q)] => {
                // scale along the local branch: P grows like θ - θ_c
                let r = (target - theta_c) / (t - theta_c);
                (
                    s_star.iter().zip(s.iter()).map(|(a, b)| a + r * (b - a)).collect(),
                    q.iter().map(|v| r * v).collect(),
                )
            }
            [.., (t0, s0, q0), (t1, s1v, q1)] => {
                let r = (target - t1) / (t1 - t0);
                (
                    s1v.iter().zip(s0.iter()).map(|(b, a)| b + r * (b - a)).collect(),
                    q1.iter().zip(q0.iter()).map(|(b, a)| (b + r * (b - a)).max(0.0)).collect(),
                )
            }
        };
        let pt = p.with("theta", target)?;
        let found = match newton_prey_predator(g, &pt, &s0, &q0) {
            Ok(res) => {
                *total_iterations += res.iterations;
                accept_prey_predator(g, &pt, &res)
            }
            Err(SteadyError::Diverged { iterations, .. }) => {
                *total_iterations += iterations;
                None
            }
            Err(e) => return Err(e),
        };
        match found {
            Some((s, q)) => {
                theta = target;
                history.push((target, s, q));
                taken += 1;
            }
            None => {
                step *= 0.5;
                if step < min_step {
                    return Ok(None);
                }
            }
        }
    }
    Ok(history.pop().map(|(_, s, q)| ((s, q), taken)))
}

/// θ at which λ₁ᴰ(ρ - θS*) changes sign (bisection; the eigenvalue is
/// strictly decreasing in θ because S* > 0).
fn bifurcation_theta(g: &Grid, p: &Parameters, s_star: &Field) -> Result<f64, SteadyError> {
    let (mut lo, mut hi) = (0.0, p.theta);
    for _ in 0..200 {
        if hi - lo <= 1e-12 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if predation_eigen(g, p, mid, s_star)?.lambda > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Steady states the command line can request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SteadyTarget {
    #[cfg_attr(feature = "serde", serde(rename = "Sstar"))]
    SStar,
    #[cfg_attr(feature = "serde", serde(rename = "SI"))]
    Si,
    #[cfg_attr(feature = "serde", serde(rename = "preypred"))]
    PreyPredator,
    #[cfg_attr(feature = "serde", serde(rename = "full"))]
    Full,
}

/// Outcome of one steady-state request. Components that the target does
/// not involve are `None`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SteadyReport {
    pub target: SteadyTarget,
    pub exists_predicted: bool,
    pub eigen: EigenBundle,
    pub s: Option<Field>,
    pub i: Option<Field>,
    pub p: Option<Field>,
    pub residual: Option<f64>,
    pub newton_iterations: usize,
    /// ‖(S + I) - Ŝ‖∞ + ‖P - P̂‖∞ for the full target,
    /// ‖(S̃ + Ĩ) - S*‖∞ for the predator-free pair.
    pub identity_error: Option<f64>,
}

impl SteadyReport {
    pub fn exists(&self) -> bool {
        self.s.is_some() || self.i.is_some() || self.p.is_some()
    }

    pub fn state(&self, g: &Grid) -> Option<State> {
        if !self.exists() {
            return None;
        }
        Some(State {
            s: self.s.clone().unwrap_or_else(|| Field::zeros(g)),
            i: self.i.clone().unwrap_or_else(|| Field::zeros(g)),
            p: self.p.clone().unwrap_or_else(|| Field::zeros(g)),
        })
    }
}

/// Eigenvalue bundle plus the steady states computed along the way.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletAnalysis {
    pub eigen: EigenBundle,
    pub s_star: Option<Field>,
    pub prey_predator: Option<PreyPredatorSolution>,
}

/// Principal eigenvalues deciding existence. `with_coexistence` also solves
/// for `(Ŝ, P̂)` (when it exists) to fill `λ₁ᵈ(b - (k - c)Ŝ + ℓP̂)`.
pub fn analyze(g: &Grid, p: &Parameters, with_coexistence: bool) -> Result<DirichletAnalysis, SteadyError> {
    require_dirichlet(g)?;
    let l0d = lambda0(g, p.d)?;
    let l0p = lambda0(g, p.big_d)?;
    let mut eigen = EigenBundle {
        lambda0_prey: l0d,
        lambda0_predator: l0p,
        logistic: l0d + (p.b - p.a),
        infection: None,
        predation: None,
        coexistence: None,
    };
    if eigen.logistic >= 0.0 {
        return Ok(DirichletAnalysis {
            eigen,
            s_star: None,
            prey_predator: None,
        });
    }
    let s_star = take_s_star(g, p)?;
    let inf: Vec<f64> = s_star.iter().map(|s| p.b - (p.k - p.c) * s).collect();
    eigen.infection = Some(principal_eigenvalue(g, p.d, inf.as_slice())?.lambda);
    let predation = predation_eigen(g, p, p.theta, &s_star)?.lambda;
    eigen.predation = Some(predation);
    let mut prey_predator = None;
    if with_coexistence && predation < 0.0 {
        if let Some(pp) = solve_prey_predator(g, p)? {
            let q: Vec<f64> = pp
                .s_hat
                .iter()
                .zip(pp.p_hat.iter())
                .map(|(s, x)| p.b - (p.k - p.c) * s + p.ell * x)
                .collect();
            eigen.coexistence = Some(principal_eigenvalue(g, p.d, q.as_slice())?.lambda);
            prey_predator = Some(pp);
        }
    }
    Ok(DirichletAnalysis {
        eigen,
        s_star: Some(s_star),
        prey_predator,
    })
}

/// The eigenvalue bundle `(λ₁ᵈ(b - a), λ₁ᵈ(b - (k - c)S*), λ₁ᴰ(ρ - θS*),
/// λ₁ᵈ(b - (k - c)Ŝ + ℓP̂))`, later entries absent when their
/// prerequisites do not exist.
pub fn existence_conditions(g: &Grid, p: &Parameters) -> Result<EigenBundle, SteadyError> {
    Ok(analyze(g, p, true)?.eigen)
}

/// Positive solution of the full three-species steady-state problem via
/// `S + I = Ŝ`, `P = P̂`.
pub fn solve_full(g: &Grid, p: &Parameters) -> Result<SteadyReport, SteadyError> {
    p.require_special_case()?;
    let analysis = analyze(g, p, true)?;
    let eigen = analysis.eigen;
    let absent = |eigen| SteadyReport {
        target: SteadyTarget::Full,
        exists_predicted: false,
        eigen,
        s: None,
        i: None,
        p: None,
        residual: None,
        newton_iterations: 0,
        identity_error: None,
    };
    let predicted = eigen.logistic < 0.0
        && eigen.predation.is_some_and(|v| v < 0.0)
        && eigen.coexistence.is_some_and(|v| v < 0.0);
    let Some(pp) = analysis.prey_predator.filter(|_| predicted) else {
        return Ok(absent(eigen));
    };
    let rate: Vec<f64> = pp
        .s_hat
        .iter()
        .zip(pp.p_hat.iter())
        .map(|(s, x)| (p.k - p.c) * s - p.b - p.ell * x)
        .collect();
    let inf = solve_logistic(g, p.d, Potential::Nodal(&rate), p.k)?;
    let Some(i) = inf.solution else {
        return Ok(absent(eigen));
    };
    let s = pp.s_hat.zip_map(&i, |sh, iv| sh - iv);
    if !is_positive(&s, p.carrying_capacity()) {
        return Err(SteadyError::Inconsistent {
            what: "S = S^ - I",
            min: s.min(),
        });
    }
    let state = State {
        s,
        i,
        p: pp.p_hat.clone(),
    };
    let residual = system_residual(g, p, &state)?;
    if residual > RESIDUAL_TOL {
        return Err(SteadyError::Diverged {
            iterations: inf.newton_iterations,
            residual,
        });
    }
    let sum = state.s.zip_map(&state.i, |a, b| a + b);
    let identity_error = sum.sup_distance(&pp.s_hat) + state.p.sup_distance(&pp.p_hat);
    Ok(SteadyReport {
        target: SteadyTarget::Full,
        exists_predicted: true,
        eigen,
        s: Some(state.s),
        i: Some(state.i),
        p: Some(state.p),
        residual: Some(residual),
        newton_iterations: pp.newton_iterations + inf.newton_iterations,
        identity_error: Some(identity_error),
    })
}

/// Dispatches one steady-state request and packages it as a report.
pub fn solve_target(g: &Grid, p: &Parameters, target: SteadyTarget) -> Result<SteadyReport, SteadyError> {
    if target == SteadyTarget::Full {
        return solve_full(g, p);
    }
    let analysis = analyze(g, p, false)?;
    let mut report = SteadyReport {
        target,
        exists_predicted: false,
        eigen: analysis.eigen,
        s: None,
        i: None,
        p: None,
        residual: None,
        newton_iterations: 0,
        identity_error: None,
    };
    let Some(s_star) = analysis.s_star else {
        return Ok(report);
    };
    match target {
        SteadyTarget::SStar => {
            let state = State {
                s: s_star.clone(),
                i: Field::zeros(g),
                p: Field::zeros(g),
            };
            report.exists_predicted = true;
            report.residual = Some(system_residual(g, p, &state)?);
            report.s = Some(s_star);
        }
        SteadyTarget::Si => {
            report.exists_predicted = report.eigen.infection.is_some_and(|v| v < 0.0);
            if let Some(si) = solve_si(g, p)? {
                let sum = si.s_tilde.zip_map(&si.i_tilde, |a, b| a + b);
                report.identity_error = Some(sum.sup_distance(&s_star));
                report.residual = Some(si.residual);
                report.newton_iterations = si.newton_iterations;
                report.s = Some(si.s_tilde);
                report.i = Some(si.i_tilde);
            }
        }
        SteadyTarget::PreyPredator => {
            report.exists_predicted = report.eigen.predation.is_some_and(|v| v < 0.0);
            if let Some(pp) = solve_prey_predator(g, p)? {
                let q: Vec<f64> = pp
                    .s_hat
                    .iter()
                    .zip(pp.p_hat.iter())
                    .map(|(s, x)| p.b - (p.k - p.c) * s + p.ell * x)
                    .collect();
                report.eigen.coexistence = Some(principal_eigenvalue(g, p.d, q.as_slice())?.lambda);
                report.residual = Some(pp.residual);
                report.newton_iterations = pp.newton_iterations;
                report.s = Some(pp.s_hat);
                report.p = Some(pp.p_hat);
            }
        }
        SteadyTarget::Full => unreachable!(),
    }
    Ok(report)
}

/// Smooth positive random profile `sin(πx/l)·exp(Σ c_m cos(mπx/l))`.
pub fn random_profile(g: &Grid, rng: &mut SplitMix64) -> Field {
    let coeffs = [rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)];
    let l = g.length();
    Field::from_fn(g, |x| {
        let t = core::f64::consts::PI * x / l;
        let bump: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| c * libm::cos((m + 1) as f64 * t))
            .sum();
        libm::sin(t) * libm::exp(bump)
    })
}

/// Which steady-state problem a uniqueness probe solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeProblem {
    Logistic,
    Si,
    PreyPredator,
    Full,
}

/// Newton from `guess`; if the limit is not positive (or Newton fails),
/// a pseudo-time march from the same guess followed by Newton.
fn probe_one<const M: usize, K: Kinetics<M>>(
    sys: &DirichletSystem<'_, M, K>,
    guess: Vec<f64>,
    scales: &[f64],
) -> Result<Option<(Vec<Field>, bool)>, SteadyError> {
    let split = |r: &NewtonResult| -> Option<Vec<Field>> {
        let fields: Vec<Field> = (0..M).map(|j| Field::new(r.component::<M>(j))).collect();
        fields
            .iter()
            .zip(scales)
            .all(|(f, s)| is_positive(f, *s))
            .then_some(fields)
    };
    match sys.solve(guess.clone()) {
        Ok(r) => {
            if let Some(f) = split(&r) {
                return Ok(Some((f, false)));
            }
        }
        Err(SteadyError::Diverged { .. }) => {}
        Err(e) => return Err(e),
    }
    let relaxed = match sys.relax(guess, RELAX_HORIZON, RELAX_TOL) {
        Ok(u) => u,
        Err(SteadyError::Diverged { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    match sys.solve(relaxed) {
        Ok(r) => Ok(split(&r).map(|f| (f, true))),
        Err(SteadyError::Diverged { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub starts: usize,
    /// Starts that ended at a positive solution.
    pub positive: usize,
    /// Of those, how many needed the pseudo-time march before Newton.
    pub relaxed: usize,
    /// Largest sup-norm distance between any converged solution and the first.
    pub spread: f64,
    pub solutions: Vec<Vec<Field>>,
}

/// Multi-start Newton: random positive guesses with amplitudes between 0.3
/// and 2 times the reference scale of each component; collects the positive
/// limits and their spread.
pub fn uniqueness_probe(
    g: &Grid,
    p: &Parameters,
    problem: ProbeProblem,
    reference: &[Field],
    starts: usize,
    seed: u64,
) -> Result<ProbeReport, SteadyError> {
    require_dirichlet(g)?;
    let width = match problem {
        ProbeProblem::Logistic => 1,
        ProbeProblem::Si | ProbeProblem::PreyPredator => 2,
        ProbeProblem::Full => 3,
    };
    if reference.len() != width || reference.iter().any(|f| g.check(f).is_err()) {
        return Err(SteadyError::InvalidArgument("probe reference does not match the problem"));
    }
    let mut rng = SplitMix64::new(seed);
    let mut solutions: Vec<Vec<Field>> = Vec::new();
    let mut relaxed = 0;
    let scales: Vec<f64> = reference.iter().map(|f| f.max()).collect();
    for _ in 0..starts {
        let guess: Vec<Field> = scales
            .iter()
            .map(|s| {
                let amp = rng.uniform(0.3, 2.0) * s;
                random_profile(g, &mut rng).map(|v| amp * v)
            })
            .collect();
        let refs: Vec<&[f64]> = guess.iter().map(|f| &f[..]).collect();
        let start = interleave(&refs);
        let outcome = match problem {
            ProbeProblem::Logistic => {
                probe_one(&logistic_system(g, p.d, vec![p.a - p.b; g.nodes()], p.c), start, &scales)?
            }
            ProbeProblem::Si => probe_one(&si_system(g, p), start, &scales)?,
            ProbeProblem::PreyPredator => probe_one(&prey_predator_system(g, p, p.theta), start, &scales)?,
            ProbeProblem::Full => probe_one(&full_system(g, p), start, &scales)?,
        };
        if let Some((fields, was_relaxed)) = outcome {
            relaxed += usize::from(was_relaxed);
            solutions.push(fields);
        }
    }
    let spread = match solutions.first() {
        None => f64::INFINITY,
        Some(first) => solutions
            .iter()
            .map(|sol| {
                sol.iter()
                    .zip(first)
                    .fold(0.0_f64, |m, (a, b)| m.max(a.sup_distance(b)))
            })
            .fold(0.0, f64::max),
    };
    Ok(ProbeReport {
        starts,
        positive: solutions.len(),
        relaxed,
        spread,
        solutions,
    })
}
