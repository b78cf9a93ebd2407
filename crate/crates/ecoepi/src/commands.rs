//! One function per subcommand. Each gathers the blocks it needs first, so
//! a config error leaves the output directory untouched.

use std::fs;
use std::path::Path;

use ecoepi_core::eigen::{principal_eigenvalue, Potential};
use ecoepi_core::error::{SimError, SteadyError};
use ecoepi_core::simulate::{integrate, Problem, System, Trajectory};
use ecoepi_core::steady::solve_target;
use ecoepi_core::verify::{
    default_initial, escape, initial_state, non_attracting, run_prey_predator, run_scenario,
    sweep_point, sweep_table, EscapeReport, LyapunovReport, ScenarioReport,
    Verdict, VerifyError,
};
use ecoepi_core::{Boundary, Field, State};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Config, PotentialConfig};
use crate::error::CliError;
use crate::output;

fn prepare_out(out: &Path, cfg: &Config) -> Result<(), CliError> {
    fs::create_dir_all(out)?;
    fs::write(out.join("config.json"), cfg.to_json() + "\n")?;
    Ok(())
}

fn steady_error(e: SteadyError) -> CliError {
    match e {
        SteadyError::Model(m) => CliError::Config(m.to_string()),
        SteadyError::InvalidArgument(m) => CliError::Config(m.to_string()),
        other => CliError::Solver(other.to_string()),
    }
}

fn verify_error(e: VerifyError) -> CliError {
    match e {
        VerifyError::Invalid(m) => CliError::Config(m.to_string()),
        VerifyError::Steady(s) => steady_error(s),
        VerifyError::Sim(s) => CliError::Solver(s.to_string()),
    }
}

#[derive(Serialize)]
struct EigenSummary {
    lambda: f64,
    iterations: usize,
    residual: f64,
}

pub fn cmd_eigen(cfg: &Config, out: &Path) -> Result<(), CliError> {
    let g = cfg.require_grid()?;
    if g.bc() != Boundary::Dirichlet {
        return Err(CliError::Config("eigen needs a dirichlet grid".into()));
    }
    let spec = cfg
        .eigen
        .as_ref()
        .ok_or_else(|| CliError::Config("missing \"eigen\" block".into()))?;
    let q = match &spec.q {
        PotentialConfig::Constant(c) => Potential::Constant(*c),
        PotentialConfig::Nodal(v) => Potential::Nodal(v),
    };
    prepare_out(out, cfg)?;
    let r = principal_eigenvalue(&g, spec.d, q).map_err(|e| CliError::Solver(e.to_string()))?;
    println!("lambda={}", output::num(r.lambda));
    output::write_phi(&out.join("phi.csv"), &g, &r.phi)?;
    output::write_json(
        &out.join("eigen.json"),
        &EigenSummary {
            lambda: r.lambda,
            iterations: r.iterations,
            residual: r.residual,
        },
    )
}

pub fn cmd_steady(cfg: &Config, out: &Path) -> Result<(), CliError> {
    let p = cfg.require_params()?;
    let g = cfg.require_grid()?;
    if g.bc() != Boundary::Dirichlet {
        return Err(CliError::Config("steady needs a dirichlet grid".into()));
    }
    let target = cfg
        .steady
        .ok_or_else(|| CliError::Config("missing \"steady\" block".into()))?
        .target;
    prepare_out(out, cfg)?;
    let report = solve_target(&g, &p, target).map_err(steady_error)?;
    output::write_json(&out.join("steady.json"), &report)?;
    if report.exists() {
        output::write_columns(
            &out.join("steady.csv"),
            &g,
            &[("S", report.s.as_ref()), ("I", report.i.as_ref()), ("P", report.p.as_ref())],
        )?;
    }
    match report.residual {
        Some(r) => println!("exists=true residual={}", output::num(r)),
        None => println!("exists=false"),
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    steps: usize,
    final_time: f64,
    monitors: usize,
    snapshots: usize,
    abort: Option<String>,
    terminal: Option<&'a ecoepi_core::simulate::MonitorRecord>,
}

pub fn cmd_simulate(cfg: &Config, out: &Path) -> Result<(), CliError> {
    let g = cfg.require_grid()?;
    let run = cfg.require_run()?;
    let system = match (cfg.params, cfg.prey_predator) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "simulate takes either \"params\" or \"prey_predator\", not both".into(),
            ))
        }
        (Some(p), None) => System::Full(p.0),
        (None, Some(q)) => System::PreyPredator(q),
        (None, None) => return Err(CliError::Config("missing \"params\" block".into())),
    };
    let constant = cfg.simulate.as_ref().and_then(|s| s.constant.clone());
    if g.bc() == Boundary::Dirichlet && constant.is_some() {
        return Err(CliError::Config("constant initial data is only meaningful for neumann grids".into()));
    }
    let init = match (system, constant) {
        (System::Full(_), Some(c)) => {
            let point: [f64; 3] = c
                .try_into()
                .map_err(|_| CliError::Config("simulate.constant needs [S, I, P]".into()))?;
            State::constant(&g, point)
        }
        (System::PreyPredator(_), Some(c)) => {
            let [u, v]: [f64; 2] = c
                .try_into()
                .map_err(|_| CliError::Config("simulate.constant needs [u, v] for prey_predator".into()))?;
            State::constant(&g, [u, 0.0, v])
        }
        (System::Full(p), None) => default_initial(&g, &p, run.seed, run.initial).map_err(verify_error)?,
        (System::PreyPredator(q), None) => {
            let around = match g.bc() {
                Boundary::Neumann => {
                    let [u, v] = q.limit();
                    State::constant(&g, [u, 0.0, v])
                }
                Boundary::Dirichlet => State::zeros(&g),
            };
            let mut st = initial_state(&g, &around, run.seed, run.initial);
            st.i = Field::zeros(&g);
            st
        }
    };
    prepare_out(out, cfg)?;
    let prob = Problem { grid: g, system };
    let (traj, abort): (Trajectory, Option<SimError>) = match integrate(&prob, &init, &run.settings()) {
        Ok(t) => (t, None),
        Err(ab) => (ab.partial, Some(ab.error)),
    };
    output::write_trajectory(&out.join("traj.csv"), &g, &traj)?;
    output::write_monitors(&out.join("monitors.csv"), &traj.monitors)?;
    output::write_json(
        &out.join("simulate.json"),
        &SimulateSummary {
            steps: traj.steps,
            final_time: traj.final_time,
            monitors: traj.monitors.len(),
            snapshots: traj.snapshots.len(),
            abort: abort.as_ref().map(|e| e.to_string()),
            terminal: traj.monitors.last(),
        },
    )?;
    match abort {
        None => {
            println!("completed t={} steps={}", output::num(traj.final_time), traj.steps);
            Ok(())
        }
        Some(e @ (SimError::Positivity { .. } | SimError::NonFinite { .. })) => {
            let t = match e {
                SimError::Positivity { t, .. } | SimError::NonFinite { t, .. } => t,
                _ => unreachable!(),
            };
            println!("aborted t={}", output::num(t));
            Err(CliError::Positivity(e.to_string()))
        }
        Some(SimError::InvalidInput(m)) => Err(CliError::Config(m.to_string())),
        Some(e) => Err(CliError::Solver(e.to_string())),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioOutcome {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ScenarioReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub escapes: Vec<EscapeReport>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovOutcome {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<LyapunovReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub boundary: usize,
    pub unresolved: usize,
    pub observed: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub scenarios: Vec<ScenarioOutcome>,
    pub lyapunov: Vec<LyapunovOutcome>,
    pub summary: Summary,
}

/// Runs every scenario and Lyapunov check of a config, in order.
pub fn verify_config(cfg: &Config) -> Result<VerifyReport, CliError> {
    let scenarios = match &cfg.scenarios {
        Some(list) => list
            .iter()
            .map(|s| Ok((s.scenario(cfg.run)?, s.escape)))
            .collect::<Result<Vec<_>, CliError>>()?,
        None if cfg.params.is_some() => vec![(cfg.base_scenario("base")?, false)],
        None => Vec::new(),
    };
    let mut summary = Summary::default();
    let mut outcomes = Vec::new();
    for (sc, want_escape) in scenarios {
        let mut outcome = ScenarioOutcome {
            name: sc.name.clone(),
            report: None,
            error: None,
            escapes: Vec::new(),
            passed: false,
        };
        match run_scenario(&sc) {
            Ok(r) => {
                let scored = r.verdict == Verdict::Pass;
                if want_escape && scored && sc.grid.bc() == Boundary::Neumann {
                    for kind in non_attracting(&sc.params) {
                        match escape(&sc.grid, &sc.params, kind, &sc.run, 1e-2) {
                            Ok(e) => outcome.escapes.push(e),
                            Err(e) => outcome.error = Some(e.to_string()),
                        }
                    }
                }
                let escapes_ok = outcome.escapes.iter().all(|e| e.escaped) && outcome.error.is_none();
                match r.verdict {
                    Verdict::Pass if escapes_ok => summary.pass += 1,
                    Verdict::Pass | Verdict::Fail => summary.fail += 1,
                    Verdict::Boundary => summary.boundary += 1,
                    Verdict::Unresolved => summary.unresolved += 1,
                    Verdict::Observed => summary.observed += 1,
                }
                outcome.passed = !r.verdict.is_failure() && escapes_ok;
                outcome.report = Some(r);
            }
            Err(e) => {
                summary.fail += 1;
                outcome.error = Some(e.to_string());
            }
        }
        outcomes.push(outcome);
    }
    let mut lyapunov = Vec::new();
    for ly in cfg.lyapunov.iter().flatten() {
        let run = ly.run.or(cfg.run).ok_or_else(|| CliError::Config("lyapunov: no run block".into()))?;
        let g = ly.grid.build()?;
        let around = {
            let [u, v] = ly.params.limit();
            State::constant(&g, [u, 0.0, v.max(0.2 * u)])
        };
        let mut init = initial_state(&g, &around, run.seed, run.initial);
        init.i = Field::zeros(&g);
        let outcome = match run_prey_predator(&g, &ly.params, &init, &run.settings(), run.tol) {
            Ok(r) => {
                let passed = r.monotone && r.limit_reached && r.min_u > 0.0 && r.min_v > 0.0;
                LyapunovOutcome {
                    name: ly.name.clone(),
                    report: Some(r),
                    error: None,
                    passed,
                }
            }
            Err(e) => LyapunovOutcome {
                name: ly.name.clone(),
                report: None,
                error: Some(e.to_string()),
                passed: false,
            },
        };
        if outcome.passed {
            summary.pass += 1;
        } else {
            summary.fail += 1;
        }
        lyapunov.push(outcome);
    }
    Ok(VerifyReport {
        scenarios: outcomes,
        lyapunov,
        summary,
    })
}

pub fn cmd_verify(cfg: &Config, out: &Path) -> Result<(), CliError> {
    if cfg.scenarios.is_none() && cfg.params.is_none() && cfg.lyapunov.is_none() {
        return Err(CliError::Config("verify needs \"scenarios\", \"lyapunov\" or a \"params\" block".into()));
    }
    if cfg.scenarios.is_none() && cfg.params.is_some() {
        cfg.base_scenario("base")?;
    }
    prepare_out(out, cfg)?;
    let report = verify_config(cfg)?;
    output::write_json(&out.join("verify.json"), &report)?;
    for s in &report.scenarios {
        let verdict = s
            .report
            .as_ref()
            .map_or("error", |r| verdict_name(r.verdict, s.passed));
        println!("{} {}", verdict, s.name);
    }
    for l in &report.lyapunov {
        println!("{} {}", if l.passed { "pass" } else { "fail" }, l.name);
    }
    let sm = &report.summary;
    println!(
        "pass={} fail={} boundary={} unresolved={} observed={}",
        sm.pass, sm.fail, sm.boundary, sm.unresolved, sm.observed
    );
    if sm.fail > 0 {
        return Err(CliError::Verification(format!("{} check(s) failed", sm.fail)));
    }
    Ok(())
}

fn verdict_name(v: Verdict, passed: bool) -> &'static str {
    match v {
        Verdict::Pass if passed => "pass",
        Verdict::Pass | Verdict::Fail => "fail",
        Verdict::Boundary => "boundary",
        Verdict::Unresolved => "unresolved",
        Verdict::Observed => "observed",
    }
}

pub fn cmd_sweep(cfg: &Config, out: &Path, threads: Option<usize>) -> Result<(), CliError> {
    let base = cfg.base_scenario("sweep")?;
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("missing \"sweep\" block".into()))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("threads: {e}")))?;
    prepare_out(out, cfg)?;
    let outcomes: Vec<Result<ScenarioReport, VerifyError>> = pool.install(|| {
        spec.values
            .par_iter()
            .map(|&v| sweep_point(&base, &spec.axis, v).and_then(|sc| run_scenario(&sc)))
            .collect()
    });
    let table = sweep_table(&base, &spec.axis, &spec.values, outcomes);
    output::write_sweep(&out.join("sweep.csv"), &table)?;
    output::write_json(&out.join("sweep.json"), &table)?;
    for t in &table.predicted_transitions {
        match t.threshold {
            Some(x) => println!("transition {} -> {} at {}={}", t.from, t.to, spec.axis, output::num(x)),
            None => println!("transition {} -> {} between {} and {}", t.from, t.to, t.between[0], t.between[1]),
        }
    }
    if !table.all_passed() {
        return Err(CliError::Verification("sweep has failing rows".into()));
    }
    Ok(())
}
