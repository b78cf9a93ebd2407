//! Time integration of the reaction-diffusion systems.
//!
//! One IMEX step per field: `(1/dt - dΔ_h) u⁺ = u/dt + f(u)`, with the
//! reaction evaluated at the current state and the Helmholtz operators
//! factored once per run. Monitors (minima, prey sup, mass, Lyapunov
//! functionals) are recorded every `sample_every` steps.

use alloc::vec::Vec;

use crate::error::SimError;
use crate::grid::{Field, Grid, Helmholtz};
use crate::model::{Parameters, PreyPredatorParams, State};

/// Interior values below this abort the run.
pub const POSITIVITY_FLOOR: f64 = -1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum System {
    /// Susceptible prey, infected prey, predator.
    Full(Parameters),
    /// `u_t - dΔu = b(a - u)u - cuv`, `v_t - DΔv = k(u - h)v`, stored in the
    /// `s` (u) and `p` (v) slots of a [`State`]; `i` stays zero.
    PreyPredator(PreyPredatorParams),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Problem {
    pub grid: Grid,
    pub system: System,
}

impl Problem {
    pub fn full(grid: Grid, p: Parameters) -> Self {
        Self {
            grid,
            system: System::Full(p),
        }
    }

    pub fn prey_predator(grid: Grid, p: PreyPredatorParams) -> Self {
        Self {
            grid,
            system: System::PreyPredator(p),
        }
    }

    fn diffusivities(&self) -> [f64; 3] {
        match self.system {
            System::Full(p) => [p.d, p.d, p.big_d],
            System::PreyPredator(q) => [q.d, q.d, q.big_d],
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        let ok = match self.system {
            System::Full(p) => p.validate().is_ok(),
            System::PreyPredator(q) => q.validate().is_ok(),
        };
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidInput("invalid model parameters"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct RunSettings {
    /// Final time T.
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub horizon: f64,
    pub dt: f64,
    /// Monitors every k steps.
    pub sample_every: usize,
    /// `None`: a snapshot at every monitor sample. `Some(r)`: after t = 1,
    /// keep a sample only once t has grown by the factor r since the last
    /// snapshot (the final sample is always kept).
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub snapshot_ratio: Option<f64>,
}

impl RunSettings {
    pub fn new(horizon: f64, dt: f64, sample_every: usize) -> Self {
        Self {
            horizon,
            dt,
            sample_every,
            snapshot_ratio: None,
        }
    }

    /// Number of steps, `round(T / dt)`.
    pub fn steps(&self) -> usize {
        libm::round(self.horizon / self.dt) as usize
    }

    fn validate(&self) -> Result<(), SimError> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(SimError::InvalidInput("horizon must be finite and > 0"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0 && self.dt <= self.horizon) {
            return Err(SimError::InvalidInput("dt must be in (0, T]"));
        }
        if self.sample_every == 0 {
            return Err(SimError::InvalidInput("sample_every must be >= 1"));
        }
        if let Some(r) = self.snapshot_ratio {
            if !(r.is_finite() && r > 1.0) {
                return Err(SimError::InvalidInput("snapshot ratio must be > 1"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MonitorRecord {
    pub t: f64,
    pub min_s: f64,
    /// Absent for the two-species system.
    pub min_i: Option<f64>,
    pub min_p: f64,
    /// max(S + I), or max u.
    pub prey_sup: f64,
    /// ∫(S + I + δP), full system only.
    pub mass_w: Option<f64>,
    /// Two-species system with h ≥ a.
    pub v: Option<f64>,
    /// Two-species system with h < a.
    pub f: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<State>,
    pub monitors: Vec<MonitorRecord>,
    pub steps: usize,
    pub final_time: f64,
    pub final_state: State,
}

/// Error of an aborted run together with everything recorded up to it.
#[derive(Debug, Clone, PartialEq)]
pub struct Aborted {
    pub error: SimError,
    pub partial: Trajectory,
}

fn integrand_sum(g: &Grid, values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    g.integrate(&v)
}

/// `V = ∫(u - a - a ln(u/a) + (c/k)v)` for the two-species system.
pub fn lyapunov_v(g: &Grid, q: &PreyPredatorParams, u: &[f64], v: &[f64]) -> Result<f64, SimError> {
    g.check(u)?;
    g.check(v)?;
    if u.iter().any(|x| !(*x > 0.0)) {
        return Err(SimError::InvalidInput("V needs u > 0"));
    }
    let a = q.a;
    Ok(integrand_sum(
        g,
        u.iter()
            .zip(v)
            .map(|(&x, &y)| x - a - a * libm::log(x / a) + q.c / q.k * y),
    ))
}

/// `F = ∫(u - h - h ln(u/h)) + (c/k)∫(v - ṽ - ṽ ln(v/ṽ))`, `ṽ = b(a - h)/c`.
pub fn lyapunov_f(g: &Grid, q: &PreyPredatorParams, u: &[f64], v: &[f64]) -> Result<f64, SimError> {
    g.check(u)?;
    g.check(v)?;
    if q.h >= q.a {
        return Err(SimError::InvalidInput("F needs h < a"));
    }
    if u.iter().chain(v).any(|x| !(*x > 0.0)) {
        return Err(SimError::InvalidInput("F needs u, v > 0"));
    }
    let (h, vt) = (q.h, q.coexistence_predator());
    Ok(integrand_sum(
        g,
        u.iter().zip(v).map(|(&x, &y)| {
            x - h - h * libm::log(x / h) + q.c / q.k * (y - vt - vt * libm::log(y / vt))
        }),
    ))
}

fn record(prob: &Problem, t: f64, st: &State) -> MonitorRecord {
    let g = &prob.grid;
    match prob.system {
        System::Full(p) => {
            let delta = p.delta();
            MonitorRecord {
                t,
                min_s: st.s.min(),
                min_i: Some(st.i.min()),
                min_p: st.p.min(),
                prey_sup: st
                    .s
                    .iter()
                    .zip(st.i.iter())
                    .fold(f64::NEG_INFINITY, |m, (s, i)| m.max(s + i)),
                mass_w: Some(integrand_sum(
                    g,
                    st.s
                        .iter()
                        .zip(st.i.iter())
                        .zip(st.p.iter())
                        .map(|((s, i), x)| s + i + delta * x),
                )),
                v: None,
                f: None,
            }
        }
        System::PreyPredator(q) => MonitorRecord {
            t,
            min_s: st.s.min(),
            min_i: None,
            min_p: st.p.min(),
            prey_sup: st.s.max(),
            mass_w: None,
            v: if q.h >= q.a {
                lyapunov_v(g, &q, &st.s, &st.p).ok()
            } else {
                None
            },
            f: if q.h < q.a {
                lyapunov_f(g, &q, &st.s, &st.p).ok()
            } else {
                None
            },
        },
    }
}

fn check_state(st: &State, t: f64, fields: &[usize]) -> Result<(), SimError> {
    const NAMES: [&str; 3] = ["S", "I", "P"];
    let all = st.fields();
    for &j in fields {
        let mut worst: Option<(usize, f64)> = None;
        for (node, &v) in all[j].iter().enumerate() {
            if !v.is_finite() {
                return Err(SimError::NonFinite { t, field: NAMES[j] });
            }
            if v <= POSITIVITY_FLOOR && worst.is_none_or(|(_, w)| v < w) {
                worst = Some((node, v));
            }
        }
        if let Some((node, value)) = worst {
            return Err(SimError::Positivity {
                t,
                field: NAMES[j],
                node,
                value,
            });
        }
    }
    Ok(())
}

/// Integrates from `init` to `settings.horizon`. On abort the partial
/// trajectory (up to the last good state) is returned with the error.
pub fn integrate(prob: &Problem, init: &State, settings: &RunSettings) -> Result<Trajectory, Aborted> {
    let empty = |error: SimError| Aborted {
        error,
        partial: Trajectory {
            times: Vec::new(),
            snapshots: Vec::new(),
            monitors: Vec::new(),
            steps: 0,
            final_time: 0.0,
            final_state: init.clone(),
        },
    };
    prob.validate().map_err(empty)?;
    settings.validate().map_err(empty)?;
    if !init.conforms(&prob.grid) {
        return Err(empty(SimError::InvalidInput("initial state does not conform to grid")));
    }
    let active: &[usize] = match prob.system {
        System::Full(_) => &[0, 1, 2],
        System::PreyPredator(_) => &[0, 2],
    };
    check_state(init, 0.0, active).map_err(empty)?;

    let dt = settings.dt;
    let diff = prob.diffusivities();
    let mut ops: [Option<Helmholtz>; 3] = [None, None, None];
    for &j in active {
        ops[j] = Some(Helmholtz::new(&prob.grid, diff[j], 1.0 / dt).map_err(|e| empty(e.into()))?);
    }

    let n_steps = settings.steps();
    let k = settings.sample_every;
    let nodes = prob.grid.nodes();
    let mut st = init.clone();
    if matches!(prob.system, System::PreyPredator(_)) {
        st.i = Field::zeros(&prob.grid);
    }
    let mut traj = Trajectory {
        times: Vec::new(),
        snapshots: Vec::new(),
        monitors: Vec::new(),
        steps: 0,
        final_time: 0.0,
        final_state: st.clone(),
    };
    let mut last_snapshot = f64::NEG_INFINITY;
    let last_sample = n_steps - n_steps % k;
    let mut sample = |traj: &mut Trajectory, step: usize, st: &State| {
        let t = step as f64 * dt;
        traj.monitors.push(record(prob, t, st));
        let keep = match settings.snapshot_ratio {
            None => true,
            Some(r) => t <= 1.0 || t >= last_snapshot * r || step == last_sample,
        };
        if keep {
            traj.times.push(t);
            traj.snapshots.push(st.clone());
            last_snapshot = t;
        }
    };
    sample(&mut traj, 0, &st);

    let mut rhs = [Vec::with_capacity(nodes), Vec::with_capacity(nodes), Vec::with_capacity(nodes)];
    for step in 1..=n_steps {
        for r in rhs.iter_mut() {
            r.clear();
        }
        for node in 0..nodes {
            let f = match prob.system {
                System::Full(p) => p.reaction(st.s[node], st.i[node], st.p[node]),
                System::PreyPredator(q) => {
                    let [fu, fv] = q.reaction(st.s[node], st.p[node]);
                    [fu, 0.0, fv]
                }
            };
            let cur = [st.s[node], st.i[node], st.p[node]];
            for &j in active {
                rhs[j].push(cur[j] / dt + f[j]);
            }
        }
        let mut next = st.clone();
        {
            let targets = [&mut next.s, &mut next.i, &mut next.p];
            for (j, target) in targets.into_iter().enumerate() {
                if let Some(op) = &ops[j] {
                    op.solve_in_place(&mut rhs[j]).map_err(|e| Aborted {
                        error: e.into(),
                        partial: traj.clone(),
                    })?;
                    target.copy_from_slice(&rhs[j]);
                }
            }
        }
        let t = step as f64 * dt;
        if let Err(error) = check_state(&next, t, active) {
            return Err(Aborted { error, partial: traj });
        }
        st = next;
        traj.steps = step;
        traj.final_time = t;
        if step % k == 0 {
            sample(&mut traj, step, &st);
        }
    }
    traj.final_state = st;
    Ok(traj)
}

/// Step-size guide `0.2 / Λ` with `Λ = a + k·prey_bound + ℓ·P_bound + ρ`.
pub fn suggested_dt(p: &Parameters, prey_bound: f64, predator_bound: f64) -> f64 {
    0.2 / (p.a + p.k * prey_bound + p.ell * predator_bound + p.rho)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConvergenceReport {
    pub converged: bool,
    pub terminal_distance: f64,
    /// Earliest snapshot time after which the distance stays ≤ tol.
    pub first_passage: Option<f64>,
}

/// Relative slack allowed when checking that distances do not grow.
pub const MONOTONE_SLACK: f64 = 0.1;

/// Converged when the sup distance to `target` is ≤ `tol` over the last
/// `window` snapshots and does not grow there by more than 10% per sample.
pub fn detect_convergence(traj: &Trajectory, target: &State, tol: f64, window: usize) -> ConvergenceReport {
    let dist: Vec<f64> = traj.snapshots.iter().map(|s| s.sup_distance(target)).collect();
    let terminal_distance = dist.last().copied().unwrap_or(f64::INFINITY);
    let first_passage = match dist.iter().rposition(|d| !(*d <= tol)) {
        None if !dist.is_empty() => Some(traj.times[0]),
        None => None,
        Some(i) if i + 1 < dist.len() => Some(traj.times[i + 1]),
        Some(_) => None,
    };
    let window = window.max(1);
    let converged = dist.len() >= window && {
        let tail = &dist[dist.len() - window..];
        tail.iter().all(|d| *d <= tol)
            && tail
                .windows(2)
                .all(|w| w[1] <= w[0] * (1.0 + MONOTONE_SLACK) + 1e-12 * tol)
    };
    ConvergenceReport {
        converged,
        terminal_distance,
        first_passage,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;
    use crate::model::{equilibria, EquilibriumKind};

    fn ps_a() -> Parameters {
        Parameters::special(2.0, 0.5, 1.0, 4.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let g = Grid::new(1.0, 50, Boundary::Neumann).unwrap();
        let e = equilibria(&ps_a()).get(EquilibriumKind::EStar).point.unwrap();
        let init = State::constant(&g, e);
        let traj = integrate(&Problem::full(g, ps_a()), &init, &RunSettings::new(50.0, 1e-2, 100)).unwrap();
        assert!(traj.final_state.sup_distance(&init) < 1e-8);
        let rep = detect_convergence(&traj, &init, 1e-8, 3);
        assert!(rep.converged);
        assert_eq!(rep.first_passage, Some(0.0));
    }

    #[test]
    fn monitor_count_matches_sampling() {
        let g = Grid::new(1.0, 20, Boundary::Neumann).unwrap();
        let init = State::constant(&g, [0.4, 0.3, 0.2]);
        let traj = integrate(&Problem::full(g, ps_a()), &init, &RunSettings::new(1.0, 1e-2, 7)).unwrap();
        assert_eq!(traj.monitors.len(), 100 / 7 + 1);
        assert_eq!(traj.snapshots.len(), traj.times.len());
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(traj.steps, 100);
    }

    #[test]
    fn geometric_snapshots_thin_out() {
        let g = Grid::new(1.0, 20, Boundary::Neumann).unwrap();
        let init = State::constant(&g, [0.4, 0.3, 0.2]);
        let mut settings = RunSettings::new(100.0, 1e-2, 10);
        settings.snapshot_ratio = Some(1.5);
        let traj = integrate(&Problem::full(g, ps_a()), &init, &settings).unwrap();
        assert_eq!(traj.monitors.len(), 1001);
        assert!(traj.snapshots.len() < 30);
        assert_eq!(*traj.times.last().unwrap(), 100.0);
    }

    #[test]
    fn huge_step_aborts_on_positivity() {
        let g = Grid::new(1.0, 20, Boundary::Neumann).unwrap();
        let init = State::constant(&g, [5.0, 5.0, 5.0]);
        let err = integrate(&Problem::full(g, ps_a()), &init, &RunSettings::new(10.0, 1.0, 1)).unwrap_err();
        assert!(matches!(err.error, SimError::Positivity { .. } | SimError::NonFinite { .. }));
    }

    #[test]
    fn rejects_bad_settings() {
        let g = Grid::new(1.0, 20, Boundary::Neumann).unwrap();
        let init = State::constant(&g, [0.4, 0.3, 0.2]);
        let prob = Problem::full(g, ps_a());
        assert!(integrate(&prob, &init, &RunSettings::new(1.0, 0.0, 1)).is_err());
        assert!(integrate(&prob, &init, &RunSettings::new(1.0, 0.1, 0)).is_err());
        let neg = State::constant(&g, [-0.1, 0.3, 0.2]);
        assert!(integrate(&prob, &neg, &RunSettings::new(1.0, 0.1, 1)).is_err());
    }

    #[test]
    fn lyapunov_values_at_reference_states() {
        let g = Grid::new(2.0, 40, Boundary::Neumann).unwrap();
        let q = PreyPredatorParams {
            a: 2.0,
            b: 1.0,
            c: 1.5,
            k: 3.0,
            h: 3.0,
            d: 1.0,
            big_d: 1.0,
        };
        let u = Field::constant(&g, 2.0);
        assert!(lyapunov_v(&g, &q, &u, &Field::zeros(&g)).unwrap().abs() < 1e-14);
        let v0 = Field::constant(&g, 0.7);
        let val = lyapunov_v(&g, &q, &u, &v0).unwrap();
        assert!((val - 1.5 / 3.0 * 0.7 * 2.0).abs() < 1e-13);
        assert!(lyapunov_f(&g, &q, &u, &v0).is_err());

        let q2 = PreyPredatorParams { h: 1.0, ..q };
        let (h, vt) = (q2.h, q2.coexistence_predator());
        let f0 = lyapunov_f(&g, &q2, &Field::constant(&g, h), &Field::constant(&g, vt)).unwrap();
        assert!(f0.abs() < 1e-14);
    }

    #[test]
    fn two_distinct_targets_cannot_both_converge() {
        let g = Grid::new(1.0, 20, Boundary::Neumann).unwrap();
        let e = equilibria(&ps_a()).get(EquilibriumKind::EStar).point.unwrap();
        let init = State::constant(&g, e);
        let traj = integrate(&Problem::full(g, ps_a()), &init, &RunSettings::new(1.0, 1e-2, 10)).unwrap();
        let other = State::constant(&g, [1.5, 0.0, 0.0]);
        let tol = 0.4 * init.sup_distance(&other);
        let a = detect_convergence(&traj, &init, tol, 3).converged;
        let b = detect_convergence(&traj, &other, tol, 3).converged;
        assert!(!(a && b));
    }
}
