//! Scenario engine: predict the long-time limit, build the target state,
//! simulate from perturbed data and score the agreement. Sweeps repeat a
//! scenario along one parameter axis.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{SimError, SteadyError};
use crate::grid::{Boundary, Field, Grid};
use crate::model::{
    bound_constants, classify_dirichlet, classify_neumann, equilibria, Attractor, EigenBundle,
    EquilibriumKind, Parameters, PreyPredatorParams, RegimePrediction, State,
};
use crate::rng::SplitMix64;
use crate::simulate::{detect_convergence, integrate, Problem, RunSettings, Trajectory};
use crate::steady;

/// Relative distance to a threshold inside which a scenario is `boundary`.
pub const BOUNDARY_BAND: f64 = 0.02;
/// Slack on the prey sup bound.
pub const PREY_BOUND_SLACK: f64 = 1e-6;
/// Relative slack on the mass cap.
pub const MASS_CAP_RTOL: f64 = 1e-6;
/// Per-sample tolerance `1e-8 (1 + |L|)` on Lyapunov monotonicity.
pub const LYAPUNOV_RTOL: f64 = 1e-8;
/// Factor applied to the perturbed data for far-field starts.
pub const FAR_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum InitialData {
    /// target·(1 + 0.5 cos(πx/l)) + 0.05 plus small seeded modes
    /// (Dirichlet: seeded sine bumps).
    Perturbed,
    /// 10 × the perturbed data.
    Far,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Verdict {
    Pass,
    Fail,
    /// Within the boundary band of a threshold; not scored.
    Boundary,
    /// No prediction available; not scored.
    Unresolved,
    /// Behaviour recorded without a convergence claim; not scored.
    Observed,
}

impl Verdict {
    /// Counts against an exit status.
    pub fn is_failure(self) -> bool {
        self == Verdict::Fail
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub params: Parameters,
    pub grid: Grid,
    pub run: RunSettings,
    pub tol: f64,
    /// Snapshots that must lie within `tol` for convergence.
    pub window: usize,
    pub seed: u64,
    pub initial: InitialData,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ScenarioReport {
    pub name: String,
    pub boundary: Boundary,
    pub initial: InitialData,
    pub predicted: String,
    pub justification: String,
    pub boundary_case: bool,
    pub eigen: Option<EigenBundle>,
    pub target: String,
    /// Nearest candidate steady state to the terminal state, if within tol.
    pub observed: Option<String>,
    pub terminal_distance: Option<f64>,
    pub first_passage: Option<f64>,
    pub converged: bool,
    pub violations: Vec<String>,
    pub abort: Option<String>,
    pub steps: usize,
    pub horizon: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VerifyError {
    Invalid(&'static str),
    Steady(SteadyError),
    Sim(SimError),
}

impl core::fmt::Display for VerifyError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            VerifyError::Invalid(what) => write!(f, "invalid scenario: {what}"),
            VerifyError::Steady(e) => write!(f, "steady-state solve failed: {e}"),
            VerifyError::Sim(e) => write!(f, "simulation failed: {e}"),
        }
    }
}

impl core::error::Error for VerifyError {}

impl From<SteadyError> for VerifyError {
    fn from(e: SteadyError) -> Self {
        VerifyError::Steady(e)
    }
}

impl From<SimError> for VerifyError {
    fn from(e: SimError) -> Self {
        VerifyError::Sim(e)
    }
}

fn near(x: f64, t: f64) -> bool {
    (x - t).abs() <= BOUNDARY_BAND * t.abs()
}

/// Inside the 2% band of a Neumann threshold in `a` (or k ≈ c).
pub fn neumann_near_threshold(p: &Parameters) -> bool {
    near(p.a, p.predator_threshold())
        || near(p.a, p.endemic_threshold())
        || p.infection_threshold().is_some_and(|t| near(p.a, t))
        || near(p.k, p.c)
}

/// A deciding eigenvalue within 2% of λ₀ of zero.
pub fn dirichlet_near_threshold(eig: &EigenBundle) -> bool {
    let band = |v: f64, l0: f64| v.abs() <= BOUNDARY_BAND * l0;
    band(eig.logistic, eig.lambda0_prey)
        || eig.infection.is_some_and(|v| band(v, eig.lambda0_prey))
        || eig.predation.is_some_and(|v| band(v, eig.lambda0_predator))
}

/// Candidate long-time states with their names.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidates(pub Vec<(String, State)>);

impl Candidates {
    pub fn get(&self, name: &str) -> Option<&State> {
        self.0.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    /// Name of the candidate nearest to `st`, when it lies within `tol`.
    pub fn nearest(&self, st: &State, tol: f64) -> Option<String> {
        self.0
            .iter()
            .map(|(n, c)| (n, c.sup_distance(st)))
            .filter(|(_, d)| *d <= tol)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(n, _)| n.clone())
    }
}

fn neumann_candidates(g: &Grid, p: &Parameters) -> Candidates {
    Candidates(
        equilibria(p)
            .existing()
            .map(|(kind, point)| (kind.name().to_string(), State::constant(g, point)))
            .collect(),
    )
}

fn dirichlet_candidates(g: &Grid, p: &Parameters) -> Result<Candidates, SteadyError> {
    let mut out = vec![(Attractor::Extinction.name().to_string(), State::zeros(g))];
    if let Some(s) = steady::solve_s_star(g, p)?.solution {
        out.push((
            Attractor::SStar00.name().to_string(),
            State {
                s,
                i: Field::zeros(g),
                p: Field::zeros(g),
            },
        ));
        if let Some(si) = steady::solve_si(g, p)? {
            out.push((
                Attractor::STildeITilde0.name().to_string(),
                State {
                    s: si.s_tilde,
                    i: si.i_tilde,
                    p: Field::zeros(g),
                },
            ));
        }
        if let Some(pp) = steady::solve_prey_predator(g, p)? {
            out.push((
                "Shat0Phat".to_string(),
                State {
                    s: pp.s_hat,
                    i: Field::zeros(g),
                    p: pp.p_hat,
                },
            ));
        }
        if p.is_special_case() {
            let full = steady::solve_full(g, p)?;
            if let Some(st) = full.state(g) {
                out.push(("positive".to_string(), st));
            }
        }
    }
    Ok(Candidates(out))
}

/// Prediction, eigenvalues (Dirichlet only) and candidate states.
pub fn predict(g: &Grid, p: &Parameters) -> Result<(RegimePrediction, Option<EigenBundle>, Candidates), VerifyError> {
    match g.bc() {
        Boundary::Neumann => {
            let pred = classify_neumann(p).unwrap_or(RegimePrediction {
                attractor: Attractor::Unresolved,
                justification: "general (gamma, sigma): no convergence claim",
                boundary_case: false,
            });
            let mut pred = pred;
            pred.boundary_case |= neumann_near_threshold(p);
            Ok((pred, None, neumann_candidates(g, p)))
        }
        Boundary::Dirichlet => {
            let eig = steady::existence_conditions(g, p)?;
            let mut pred = classify_dirichlet(p, &eig).unwrap_or(RegimePrediction {
                attractor: Attractor::Unresolved,
                justification: "general (gamma, sigma): no convergence claim",
                boundary_case: false,
            });
            pred.boundary_case |= dirichlet_near_threshold(&eig);
            Ok((pred, Some(eig), dirichlet_candidates(g, p)?))
        }
    }
}

fn predicted_target<'c>(pred: &RegimePrediction, cands: &'c Candidates) -> Option<(&'c str, &'c State)> {
    let name = match pred.attractor.equilibrium() {
        Some(kind) => kind.name(),
        None => pred.attractor.name(),
    };
    cands.0.iter().find(|(n, _)| n == name).map(|(n, s)| (n.as_str(), s))
}

/// Seeded positive initial data around `target`.
pub fn initial_state(g: &Grid, target: &State, seed: u64, initial: InitialData) -> State {
    let mut rng = SplitMix64::new(seed);
    let l = g.length();
    let factor = match initial {
        InitialData::Perturbed => 1.0,
        InitialData::Far => FAR_FACTOR,
    };
    let mut make = |base: &Field| -> Field {
        match g.bc() {
            Boundary::Neumann => {
                let eps = [rng.uniform(-0.01, 0.01), rng.uniform(-0.01, 0.01), rng.uniform(-0.01, 0.01)];
                let mut out = Field::zeros(g);
                for (i, v) in out.iter_mut().enumerate() {
                    let t = PI * g.x(i) / l;
                    let modes: f64 = eps
                        .iter()
                        .enumerate()
                        .map(|(m, e)| e * libm::cos((m + 2) as f64 * t))
                        .sum();
                    *v = factor * (base[i] * (1.0 + 0.5 * libm::cos(t)) + 0.05 + modes);
                }
                out
            }
            Boundary::Dirichlet => {
                let alpha = rng.uniform(0.5, 1.5) * base.max().max(1.0);
                let eps = [rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1)];
                Field::from_fn(g, |x| {
                    let t = PI * x / l;
                    let modes: f64 = eps
                        .iter()
                        .enumerate()
                        .map(|(m, e)| e * libm::cos((m + 1) as f64 * t))
                        .sum();
                    factor * libm::sin(t) * alpha * (1.0 + modes)
                })
            }
        }
    };
    State {
        s: make(&target.s),
        i: make(&target.i),
        p: make(&target.p),
    }
}

/// Prey sup bound and (for d = D) mass cap along the monitors.
pub fn monitor_violations(p: &Parameters, g: &Grid, init: &State, traj: &Trajectory) -> Vec<String> {
    let bounds = bound_constants(p, g, init);
    let mut out = Vec::new();
    let mass_applies = p.d == p.big_d && p.is_special_case();
    for m in &traj.monitors {
        if m.prey_sup > bounds.prey_bound + PREY_BOUND_SLACK {
            out.push(format!(
                "prey bound at t={}: {} > {}",
                m.t, m.prey_sup, bounds.prey_bound
            ));
            break;
        }
    }
    if mass_applies {
        for m in &traj.monitors {
            if let Some(w) = m.mass_w {
                if w > bounds.mass_cap * (1.0 + MASS_CAP_RTOL) {
                    out.push(format!("mass cap at t={}: {} > {}", m.t, w, bounds.mass_cap));
                    break;
                }
            }
        }
    }
    out
}

fn describe(name: &str, st: &State) -> String {
    let constant = st.fields().iter().all(|f| f.max() == f.min());
    if constant {
        format!("{name} = ({}, {}, {})", st.s[0], st.i[0], st.p[0])
    } else {
        format!("{name} (computed steady state)")
    }
}

/// State the seeded initial data is built around: the predicted target,
/// or the last candidate when nothing is predicted.
fn start_point<'c>(pred: &RegimePrediction, cands: &'c Candidates) -> &'c State {
    predicted_target(pred, cands)
        .map(|(_, s)| s)
        .or_else(|| cands.0.last().map(|(_, s)| s))
        .expect("E0 or extinction is always a candidate")
}

/// The seeded initial data a scenario with these settings starts from.
pub fn default_initial(g: &Grid, p: &Parameters, seed: u64, initial: InitialData) -> Result<State, VerifyError> {
    let (pred, _, cands) = predict(g, p)?;
    Ok(initial_state(g, start_point(&pred, &cands), seed, initial))
}

pub fn run_scenario(sc: &Scenario) -> Result<ScenarioReport, VerifyError> {
    if !(sc.tol > 0.0) {
        return Err(VerifyError::Invalid("tol must be > 0"));
    }
    sc.params.validate().map_err(|_| VerifyError::Invalid("invalid parameters"))?;
    let g = &sc.grid;
    let p = &sc.params;
    let (pred, eigen, cands) = predict(g, p)?;
    let target = predicted_target(&pred, &cands);

    let init = initial_state(g, start_point(&pred, &cands), sc.seed, sc.initial);

    let mut report = ScenarioReport {
        name: sc.name.clone(),
        boundary: g.bc(),
        initial: sc.initial,
        predicted: pred.attractor.name().to_string(),
        justification: pred.justification.to_string(),
        boundary_case: pred.boundary_case,
        eigen,
        target: target.map_or_else(|| "none".to_string(), |(n, s)| describe(n, s)),
        observed: None,
        terminal_distance: None,
        first_passage: None,
        converged: false,
        violations: Vec::new(),
        abort: None,
        steps: 0,
        horizon: sc.run.horizon,
        verdict: Verdict::Fail,
    };

    let traj = match integrate(&Problem::full(*g, *p), &init, &sc.run) {
        Ok(t) => t,
        Err(ab) => {
            report.abort = Some(format!("{}", ab.error));
            report.steps = ab.partial.steps;
            report.verdict = if pred.boundary_case {
                Verdict::Boundary
            } else {
                Verdict::Fail
            };
            return Ok(report);
        }
    };
    report.steps = traj.steps;
    report.violations = monitor_violations(p, g, &init, &traj);
    report.observed = cands.nearest(&traj.final_state, sc.tol);
    if let Some((_, t)) = target {
        let conv = detect_convergence(&traj, t, sc.tol, sc.window);
        report.terminal_distance = Some(conv.terminal_distance);
        report.first_passage = conv.first_passage;
        report.converged = conv.converged;
    }
    let scored = report.converged && report.violations.is_empty();
    report.verdict = if pred.boundary_case {
        Verdict::Boundary
    } else if pred.attractor == Attractor::Unresolved {
        if g.bc() == Boundary::Dirichlet {
            Verdict::Observed
        } else {
            Verdict::Unresolved
        }
    } else if scored {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    if !report.violations.is_empty() && report.verdict != Verdict::Boundary {
        report.verdict = Verdict::Fail;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EscapeReport {
    pub equilibrium: String,
    pub radius: f64,
    pub escaped: bool,
    /// First snapshot time outside the ball.
    pub exit_time: Option<f64>,
    pub max_distance: f64,
    pub abort: Option<String>,
}

/// Starts `1e-3` away from a constant equilibrium (positive perturbation)
/// and reports whether the trajectory leaves the `radius` ball.
pub fn escape(g: &Grid, p: &Parameters, kind: EquilibriumKind, run: &RunSettings, radius: f64) -> Result<EscapeReport, VerifyError> {
    if g.bc() != Boundary::Neumann {
        return Err(VerifyError::Invalid("escape tests use constant equilibria (Neumann)"));
    }
    let point = equilibria(p)
        .get(kind)
        .point
        .ok_or(VerifyError::Invalid("equilibrium does not exist"))?;
    let centre = State::constant(g, point);
    let l = g.length();
    let bump = |c: f64| Field::from_fn(g, |x| c + 1e-3 * (1.0 + 0.5 * libm::cos(PI * x / l)));
    let init = State {
        s: bump(point[0]),
        i: bump(point[1]),
        p: bump(point[2]),
    };
    let (traj, abort) = match integrate(&Problem::full(*g, *p), &init, run) {
        Ok(t) => (t, None),
        Err(ab) => (ab.partial, Some(format!("{}", ab.error))),
    };
    let dist: Vec<f64> = traj.snapshots.iter().map(|s| s.sup_distance(&centre)).collect();
    let exit = dist.iter().position(|d| *d > radius);
    Ok(EscapeReport {
        equilibrium: kind.name().to_string(),
        radius,
        escaped: exit.is_some(),
        exit_time: exit.map(|i| traj.times[i]),
        max_distance: dist.iter().copied().fold(0.0, f64::max),
        abort,
    })
}

/// Existing constant equilibria other than the predicted Neumann attractor.
pub fn non_attracting(p: &Parameters) -> Vec<EquilibriumKind> {
    let attractor = classify_neumann(p).ok().and_then(|r| r.attractor.equilibrium());
    equilibria(p)
        .existing()
        .map(|(k, _)| k)
        .filter(|k| Some(*k) != attractor)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LyapunovReport {
    pub functional: String,
    pub limit: [f64; 2],
    pub terminal_distance: f64,
    /// Largest increase between consecutive samples, relative to 1 + |L|.
    pub worst_increase: f64,
    pub monotone: bool,
    pub limit_reached: bool,
    pub min_u: f64,
    pub min_v: f64,
}

/// Runs the two-species system and checks the Lyapunov functional
/// (V when h ≥ a, F when h < a) and the terminal state against
/// (a, 0) / (h, b(a - h)/c).
pub fn run_prey_predator(
    g: &Grid,
    q: &PreyPredatorParams,
    init: &State,
    run: &RunSettings,
    tol: f64,
) -> Result<LyapunovReport, VerifyError> {
    if g.bc() != Boundary::Neumann {
        return Err(VerifyError::Invalid("the two-species checks use Neumann data"));
    }
    let traj = integrate(&Problem::prey_predator(*g, *q), init, run).map_err(|ab| VerifyError::Sim(ab.error))?;
    let use_v = q.h >= q.a;
    let values: Vec<Option<f64>> = traj
        .monitors
        .iter()
        .map(|m| if use_v { m.v } else { m.f })
        .collect();
    let mut worst = f64::NEG_INFINITY;
    let mut monotone = values.iter().all(Option::is_some);
    for w in values.windows(2) {
        if let [Some(a), Some(b)] = w {
            let inc = (b - a) / (1.0 + a.abs());
            worst = worst.max(inc);
            if b - a > LYAPUNOV_RTOL * (1.0 + a.abs()) {
                monotone = false;
            }
        }
    }
    let limit = q.limit();
    let target = State::constant(g, [limit[0], 0.0, limit[1]]);
    let terminal_distance = traj.final_state.sup_distance(&target);
    Ok(LyapunovReport {
        functional: if use_v { "V" } else { "F" }.to_string(),
        limit,
        terminal_distance,
        worst_increase: worst,
        monotone,
        limit_reached: terminal_distance <= tol,
        min_u: traj.monitors.iter().map(|m| m.min_s).fold(f64::INFINITY, f64::min),
        min_v: traj.monitors.iter().map(|m| m.min_p).fold(f64::INFINITY, f64::min),
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SweepRow {
    pub value: f64,
    pub predicted: String,
    pub observed: Option<String>,
    pub distance: Option<f64>,
    pub passed: bool,
    pub boundary: bool,
    pub verdict: Option<Verdict>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Transition {
    /// Consecutive axis values bracketing the change.
    pub between: [f64; 2],
    pub from: String,
    pub to: String,
    /// Switch point of the prediction located by bisection.
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SweepTable {
    pub axis: String,
    pub rows: Vec<SweepRow>,
    pub predicted_transitions: Vec<Transition>,
    pub observed_transitions: Vec<Transition>,
}

impl SweepTable {
    pub fn all_passed(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.passed || r.boundary || r.verdict.is_some_and(|v| !v.is_failure()))
    }
}

/// Scenario at one axis value.
pub fn sweep_point(base: &Scenario, axis: &str, value: f64) -> Result<Scenario, VerifyError> {
    let params = base
        .params
        .with(axis, value)
        .map_err(|_| VerifyError::Invalid("unknown sweep axis"))?;
    let mut sc = base.clone();
    sc.params = params;
    sc.name = format!("{}[{}={}]", base.name, axis, value);
    Ok(sc)
}

fn predicted_name(g: &Grid, p: &Parameters) -> Option<&'static str> {
    match g.bc() {
        Boundary::Neumann => classify_neumann(p).ok().map(|r| r.attractor.name()),
        Boundary::Dirichlet => {
            let eig = steady::analyze(g, p, false).ok()?.eigen;
            classify_dirichlet(p, &eig).ok().map(|r| r.attractor.name())
        }
    }
}

/// Bisection for the axis value where the predicted attractor changes.
pub fn locate_threshold(base: &Scenario, axis: &str, lo: f64, hi: f64) -> Option<f64> {
    let at = |v: f64| -> Option<&'static str> {
        let p = base.params.with(axis, v).ok()?;
        p.validate().ok()?;
        predicted_name(&base.grid, &p)
    };
    let left = at(lo)?;
    if at(hi)? == left {
        return None;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b || (b - a) <= 1e-13 * b.abs().max(a.abs()) {
            break;
        }
        if at(m)? == left {
            a = m;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Assembles a sweep table from per-value outcomes (in input order) and
/// annotates transitions.
pub fn sweep_table(
    base: &Scenario,
    axis: &str,
    values: &[f64],
    outcomes: Vec<Result<ScenarioReport, VerifyError>>,
) -> SweepTable {
    let mut rows: Vec<SweepRow> = values
        .iter()
        .zip(outcomes)
        .map(|(&value, out)| match out {
            Ok(r) => SweepRow {
                value,
                predicted: r.predicted.clone(),
                observed: r.observed.clone(),
                distance: r.terminal_distance,
                passed: r.verdict == Verdict::Pass,
                boundary: r.verdict == Verdict::Boundary,
                verdict: Some(r.verdict),
                error: None,
            },
            Err(e) => SweepRow {
                value,
                predicted: "error".to_string(),
                observed: None,
                distance: None,
                passed: false,
                boundary: false,
                verdict: None,
                error: Some(format!("{e}")),
            },
        })
        .collect();
    let transitions = |key: &dyn Fn(&SweepRow) -> String, locate: bool| -> Vec<Transition> {
        rows.windows(2)
            .filter(|w| key(&w[0]) != key(&w[1]))
            .map(|w| Transition {
                between: [w[0].value, w[1].value],
                from: key(&w[0]),
                to: key(&w[1]),
                threshold: if locate {
                    locate_threshold(base, axis, w[0].value, w[1].value)
                } else {
                    None
                },
            })
            .collect()
    };
    let predicted_transitions = transitions(&|r| r.predicted.clone(), true);
    let observed_transitions = transitions(&|r| r.observed.clone().unwrap_or_else(|| "none".to_string()), false);
    // rows inside the band of a located threshold are not scored
    for row in rows.iter_mut() {
        if predicted_transitions
            .iter()
            .filter_map(|t| t.threshold)
            .any(|t| near(row.value, t))
        {
            row.boundary = true;
            if row.verdict == Some(Verdict::Fail) {
                row.verdict = Some(Verdict::Boundary);
            }
        }
    }
    SweepTable {
        axis: axis.to_string(),
        rows,
        predicted_transitions,
        observed_transitions,
    }
}

/// Sequential sweep; values must be finite and sorted.
pub fn sweep(base: &Scenario, axis: &str, values: &[f64]) -> Result<SweepTable, VerifyError> {
    check_sweep_values(values)?;
    let outcomes = values
        .iter()
        .map(|&v| sweep_point(base, axis, v).and_then(|sc| run_scenario(&sc)))
        .collect();
    Ok(sweep_table(base, axis, values, outcomes))
}

pub fn check_sweep_values(values: &[f64]) -> Result<(), VerifyError> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(VerifyError::Invalid("sweep values must be finite"));
    }
    if values.windows(2).any(|w| w[0] > w[1]) {
        return Err(VerifyError::Invalid("sweep values must be sorted"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(p: Parameters, bc: Boundary) -> Scenario {
        Scenario {
            name: "t".to_string(),
            params: p,
            grid: Grid::new(1.0, 40, bc).unwrap(),
            run: RunSettings::new(60.0, 1e-2, 10),
            tol: 1e-3,
            window: 5,
            seed: 7,
            initial: InitialData::Perturbed,
        }
    }

    fn ps_a() -> Parameters {
        Parameters::special(2.0, 0.5, 1.0, 4.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn perturbed_data_is_positive() {
        let g = Grid::new(1.0, 40, Boundary::Neumann).unwrap();
        let target = State::constant(&g, [0.2, 0.0, 0.0]);
        let st = initial_state(&g, &target, 3, InitialData::Perturbed);
        assert!(st.fields().iter().all(|f| f.min() > 0.0));
        let far = initial_state(&g, &target, 3, InitialData::Far);
        assert!((far.s[5] - 10.0 * st.s[5]).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_data() {
        let g = Grid::new(1.0, 40, Boundary::Dirichlet).unwrap();
        let t = State::zeros(&g);
        assert_eq!(
            initial_state(&g, &t, 11, InitialData::Perturbed),
            initial_state(&g, &t, 11, InitialData::Perturbed)
        );
    }

    #[test]
    fn ps_a_short_run_passes() {
        let r = run_scenario(&base(ps_a(), Boundary::Neumann)).unwrap();
        assert_eq!(r.predicted, "Estar");
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        assert_eq!(r.observed.as_deref(), Some("Estar"));
    }

    #[test]
    fn empty_sweep_is_empty() {
        let t = sweep(&base(ps_a(), Boundary::Neumann), "a", &[]).unwrap();
        assert!(t.rows.is_empty() && t.predicted_transitions.is_empty());
    }

    #[test]
    fn unsorted_sweep_rejected() {
        assert!(sweep(&base(ps_a(), Boundary::Neumann), "a", &[2.0, 1.0]).is_err());
    }

    #[test]
    fn thresholds_located_by_bisection() {
        let b = base(ps_a(), Boundary::Neumann);
        let t = locate_threshold(&b, "a", 1.0, 2.0).unwrap();
        assert!((t - 1.5).abs() < 1e-10);
        let t = locate_threshold(&b, "a", 3.5, 4.5).unwrap();
        assert!((t - 4.0).abs() < 1e-10);
    }

    #[test]
    fn non_attracting_lists_the_others() {
        let ks = non_attracting(&ps_a());
        assert!(ks.contains(&EquilibriumKind::E0));
        assert!(!ks.contains(&EquilibriumKind::EStar));
    }
}
