//! The acceptance suite. Each criterion prints one `PASS` / `FAIL` line;
//! the process fails if any criterion does.
//!
//! Runs without the libtest harness so the lines are always shown.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::thread;

use ecoepi_core::eigen::{lambda0, principal_eigenvalue, Potential};
use ecoepi_core::rng::SplitMix64;
use ecoepi_core::simulate::{integrate, Problem, RunSettings};
use ecoepi_core::steady::{
    newton_full, newton_si, solve_logistic, solve_target, system_residual, uniqueness_probe, ProbeProblem,
    SteadyTarget,
};
use ecoepi_core::verify::{escape, non_attracting, run_scenario, InitialData, Scenario, Verdict};
use ecoepi_core::{Boundary, Field, Grid, Parameters, PreyPredatorParams, State};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn special(v: [f64; 7]) -> Parameters {
    Parameters::special(v[0], v[1], v[2], v[3], v[4], v[5], v[6], 1.0, 1.0).unwrap()
}

fn sup(a: &Field, b: &Field) -> f64 {
    a.sup_distance(b)
}

fn eigenvalues() -> Outcome {
    let g = Grid::new(PI, 400, Boundary::Dirichlet).unwrap();
    let l = lambda0(&g, 1.0).map_err(|e| e.to_string())?;
    let mut problems = Vec::new();
    if (l - 1.0).abs() > 1e-4 {
        problems.push(format!("lambda0 on (0,pi) = {l}"));
    }

    let g = Grid::new(1.0, 200, Boundary::Dirichlet).unwrap();
    let mut rng = SplitMix64::new(2024);
    let mut worst_shift = 0.0_f64;
    let mut monotone = 0;
    for _ in 0..20 {
        let amp = rng.uniform(0.5, 20.0);
        let phase: Vec<f64> = (0..4).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let q = Field::from_fn(&g, |x| {
            amp * phase.iter().enumerate().map(|(m, c)| c * ((m + 1) as f64 * PI * x).cos()).sum::<f64>()
        });
        let d = rng.uniform(0.2, 3.0);
        let shift = rng.uniform(-10.0, 10.0);
        let base = principal_eigenvalue(&g, d, &q).map_err(|e| e.to_string())?.lambda;
        let moved: Vec<f64> = q.iter().map(|v| v + shift).collect();
        let lam_shift = principal_eigenvalue(&g, d, moved.as_slice()).map_err(|e| e.to_string())?.lambda;
        worst_shift = worst_shift.max((lam_shift - base - shift).abs());

        let bump = rng.uniform(0.1, 3.0);
        let raised: Vec<f64> = q.iter().enumerate().map(|(i, v)| v + bump * (PI * g.x(i)).sin()).collect();
        let lam_q = principal_eigenvalue(&g, d, raised.as_slice()).map_err(|e| e.to_string())?.lambda;
        let lam_d = principal_eigenvalue(&g, d * 1.25, &q).map_err(|e| e.to_string())?.lambda;
        if lam_q > base && lam_d > base {
            monotone += 1;
        }
    }
    if worst_shift > 1e-9 {
        problems.push(format!("shift identity error {worst_shift:e}"));
    }
    if monotone != 20 {
        problems.push(format!("monotone on {monotone}/20 potentials"));
    }
    check(
        problems.is_empty(),
        if problems.is_empty() {
            format!("lambda0(0,pi)={l:.9}, shift error {worst_shift:.1e}, monotone 20/20")
        } else {
            problems.join("; ")
        },
    )
}

fn logistic_threshold() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for d in [0.5, 1.0, 2.0] {
        let g = Grid::new(1.0, 200, Boundary::Dirichlet).unwrap();
        let threshold = d * PI * PI;
        let step = 0.05 * threshold;
        let values: Vec<f64> = (0..21).map(|j| threshold * 0.5 + step * j as f64).collect();
        let mut exists = Vec::new();
        for &r in &values {
            let s = solve_logistic(&g, d, Potential::Constant(r), 1.0).map_err(|e| e.to_string())?;
            exists.push(s.solution.is_some());
        }
        let scored = |r: f64| (r / threshold - 1.0).abs() >= 0.02;
        let wrong = values.iter().zip(&exists).filter(|(r, e)| scored(**r) && **e != (**r > threshold)).count();
        let flip = exists.windows(2).position(|w| w[0] != w[1]);
        let flip_ok = exists.windows(2).filter(|w| w[0] != w[1]).count() == 1
            && flip.is_some_and(|i| values[i] <= threshold + step && values[i + 1] >= threshold - step);
        ok &= wrong == 0 && flip_ok;
        lines.push(format!(
            "d={d}: flip between {:?}, {wrong} misclassified",
            flip.map(|i| (values[i], values[i + 1]))
        ));
    }
    check(ok, lines.join("; "))
}

const COEXISTENCE: [[f64; 7]; 5] = [
    [30.0, 1.0, 1.0, 5.0, 1.0, 1.0, 1.0],
    [25.0, 1.0, 1.0, 6.0, 1.0, 1.0, 2.0],
    [35.0, 1.0, 2.0, 8.0, 1.0, 1.0, 1.0],
    [40.0, 1.0, 1.0, 6.0, 1.0, 1.0, 3.0],
    [45.0, 1.0, 1.0, 5.0, 1.0, 1.0, 2.0],
];

fn decomposition() -> Outcome {
    let g = Grid::new(1.0, 200, Boundary::Dirichlet).unwrap();
    let mut worst_si = 0.0_f64;
    let mut worst_full = 0.0_f64;
    let mut worst_res = 0.0_f64;
    let mut checked = 0;
    for v in COEXISTENCE {
        let p = special(v);
        let s_star = solve_target(&g, &p, SteadyTarget::SStar).map_err(|e| e.to_string())?;
        let si = solve_target(&g, &p, SteadyTarget::Si).map_err(|e| e.to_string())?;
        if si.exists_predicted {
            let (s, i) = (si.s.clone().ok_or("SI predicted but not found")?, si.i.clone().ok_or("no I")?);
            let s0: Vec<f64> = s.iter().map(|x| 0.7 * x).collect();
            let i0: Vec<f64> = i.iter().map(|x| 1.2 * x).collect();
            let r = newton_si(&g, &p, &s0, &i0).map_err(|e| e.to_string())?;
            let sum = Field::new(r.component::<2>(0)).zip_map(&Field::new(r.component::<2>(1)), |a, b| a + b);
            worst_si = worst_si.max(sup(&sum, s_star.s.as_ref().unwrap()));
            let st = State { s: Field::new(r.component::<2>(0)), i: Field::new(r.component::<2>(1)), p: Field::zeros(&g) };
            worst_res = worst_res.max(system_residual(&g, &p, &st).map_err(|e| e.to_string())?);
            checked += 1;
        }
        let pair = solve_target(&g, &p, SteadyTarget::PreyPredator).map_err(|e| e.to_string())?;
        let full = solve_target(&g, &p, SteadyTarget::Full).map_err(|e| e.to_string())?;
        if full.exists_predicted {
            let st = full.state(&g).ok_or("full predicted but not found")?;
            let guess = State { s: st.s.map(|x| 0.8 * x), i: st.i.map(|x| 1.2 * x), p: st.p.map(|x| 0.9 * x) };
            let r = newton_full(&g, &p, &guess).map_err(|e| e.to_string())?;
            let solved = State {
                s: Field::new(r.component::<3>(0)),
                i: Field::new(r.component::<3>(1)),
                p: Field::new(r.component::<3>(2)),
            };
            let prey = solved.s.zip_map(&solved.i, |a, b| a + b);
            let err = sup(&prey, pair.s.as_ref().unwrap()) + sup(&solved.p, pair.p.as_ref().unwrap());
            worst_full = worst_full.max(err);
            worst_res = worst_res.max(system_residual(&g, &p, &solved).map_err(|e| e.to_string())?);
            worst_res = worst_res.max(full.residual.unwrap_or(f64::INFINITY));
            checked += 1;
        }
    }
    check(
        checked == 10 && worst_si <= 1e-9 && worst_full <= 1e-9 && worst_res <= 1e-9,
        format!("{checked}/10 problems, SI identity {worst_si:.1e}, full identity {worst_full:.1e}, residual {worst_res:.1e}"),
    )
}

fn uniqueness() -> Outcome {
    let g = Grid::new(1.0, 200, Boundary::Dirichlet).unwrap();
    let mut worst = 0.0_f64;
    let mut bad = Vec::new();
    for (n, v) in COEXISTENCE.iter().enumerate() {
        let p = special(*v);
        let s_star = solve_target(&g, &p, SteadyTarget::SStar).map_err(|e| e.to_string())?;
        let si = solve_target(&g, &p, SteadyTarget::Si).map_err(|e| e.to_string())?;
        let pair = solve_target(&g, &p, SteadyTarget::PreyPredator).map_err(|e| e.to_string())?;
        let full = solve_target(&g, &p, SteadyTarget::Full).map_err(|e| e.to_string())?;
        let cases = [
            (ProbeProblem::Logistic, vec![s_star.s.clone()]),
            (ProbeProblem::Si, vec![si.s.clone(), si.i.clone()]),
            (ProbeProblem::PreyPredator, vec![pair.s.clone(), pair.p.clone()]),
            (ProbeProblem::Full, vec![full.s.clone(), full.i.clone(), full.p.clone()]),
        ];
        for (problem, reference) in cases {
            let Some(reference) = reference.into_iter().collect::<Option<Vec<Field>>>() else {
                bad.push(format!("set {n} {problem:?}: no reference solution"));
                continue;
            };
            let r = uniqueness_probe(&g, &p, problem, &reference, 5, 100 + n as u64).map_err(|e| e.to_string())?;
            let to_reference = r
                .solutions
                .iter()
                .flat_map(|sol| sol.iter().zip(&reference).map(|(a, b)| sup(a, b)))
                .fold(0.0_f64, f64::max);
            worst = worst.max(r.spread).max(to_reference);
            if r.positive != 5 || r.spread > 1e-7 || to_reference > 1e-7 {
                bad.push(format!("set {n} {problem:?}: {}/5 positive, spread {:.1e}", r.positive, r.spread));
            }
        }
    }
    check(bad.is_empty(), if bad.is_empty() { format!("5 sets x 4 problems x 5 starts, spread {worst:.1e}") } else { bad.join("; ") })
}

fn neumann_scenario(name: &str, v: [f64; 7], initial: InitialData) -> Scenario {
    Scenario {
        name: name.to_string(),
        params: special(v),
        grid: Grid::new(1.0, 200, Boundary::Neumann).unwrap(),
        run: RunSettings::new(200.0, 1e-3, 100),
        tol: 1e-3,
        window: 10,
        seed: 7,
        initial,
    }
}

const NEUMANN: [(&str, [f64; 7], &str); 4] = [
    ("PS-B", [1.2, 1.0, 1.0, 1.5, 1.0, 1.0, 1.0], "E1"),
    ("PS-C", [3.0, 0.5, 1.0, 2.0, 1.0, 1.0, 1.0], "EI"),
    ("PS-D", [2.0, 0.5, 1.0, 3.0, 1.0, 1.0, 2.0], "EP"),
    ("PS-A", [2.0, 0.5, 1.0, 4.0, 1.0, 1.0, 1.0], "Estar"),
];

fn neumann_stability() -> Outcome {
    let results: Vec<Result<(String, bool), String>> = thread::scope(|s| {
        let handles: Vec<_> = NEUMANN
            .iter()
            .flat_map(|(name, v, expect)| {
                [InitialData::Perturbed, InitialData::Far].map(|init| {
                    s.spawn(move || {
                        let sc = neumann_scenario(name, *v, init);
                        let r = run_scenario(&sc).map_err(|e| e.to_string())?;
                        let d = r.terminal_distance.unwrap_or(f64::INFINITY);
                        let ok = r.predicted == *expect && r.verdict == Verdict::Pass && d <= 1e-3;
                        Ok((format!("{name}/{init:?}->{} {d:.1e}", r.predicted), ok))
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut ok = true;
    let mut notes = Vec::new();
    for r in results {
        let (note, pass) = r?;
        ok &= pass;
        notes.push(note);
    }
    let run = RunSettings::new(200.0, 1e-3, 100);
    let g = Grid::new(1.0, 200, Boundary::Neumann).unwrap();
    let mut escaped = 0;
    let mut total = 0;
    for (name, v, _) in NEUMANN {
        let p = special(v);
        for kind in non_attracting(&p) {
            let e = escape(&g, &p, kind, &run, 1e-2).map_err(|e| e.to_string())?;
            total += 1;
            if e.escaped {
                escaped += 1;
            } else {
                notes.push(format!("{name}: stayed near {}", e.equilibrium));
                ok = false;
            }
        }
    }
    notes.push(format!("escaped {escaped}/{total}"));
    check(ok, notes.join(", "))
}

fn dirichlet_trichotomy() -> Outcome {
    let cases = [
        ("i", [6.0, 1.0, 1.0, 2.0, 1.0, 1.0, 1.0], "extinction"),
        ("ii", [20.0, 1.0, 1.0, 0.5, 1.0, 1.0, 20.0], "Sstar00"),
        ("iii", [20.0, 1.0, 1.0, 5.0, 1.0, 1.0, 20.0], "StildeItilde0"),
    ];
    let results: Vec<Result<(String, bool), String>> = thread::scope(|s| {
        let handles: Vec<_> = cases
            .iter()
            .map(|(clause, v, expect)| {
                s.spawn(move || {
                    let sc = Scenario {
                        name: (*clause).to_string(),
                        params: special(*v),
                        grid: Grid::new(1.0, 200, Boundary::Dirichlet).unwrap(),
                        run: RunSettings::new(300.0, 1e-3, 100),
                        tol: 5e-3,
                        window: 10,
                        seed: 7,
                        initial: InitialData::Perturbed,
                    };
                    let r = run_scenario(&sc).map_err(|e| e.to_string())?;
                    let d = r.terminal_distance.unwrap_or(f64::INFINITY);
                    let ok = r.predicted == *expect && r.verdict == Verdict::Pass && d <= 5e-3;
                    Ok((format!("({clause})->{} {d:.1e}", r.predicted), ok))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut ok = true;
    let mut notes = Vec::new();
    for r in results {
        let (note, pass) = r?;
        ok &= pass;
        notes.push(note);
    }
    check(ok, notes.join(", "))
}

fn monitors() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let g = Grid::new(1.0, 200, Boundary::Neumann).unwrap();
    let mut worst_prey = f64::NEG_INFINITY;
    for (name, v, _) in NEUMANN {
        let p = special(v);
        let init = State {
            s: Field::from_fn(&g, |x| 1.5 + (PI * x).cos()),
            i: Field::from_fn(&g, |x| 0.8 - 0.6 * (2.0 * PI * x).cos()),
            p: Field::from_fn(&g, |x| 0.6 + 0.4 * (3.0 * PI * x).cos()),
        };
        let prey0 = init.s.iter().zip(init.i.iter()).fold(0.0_f64, |m, (s, i)| m.max(s + i));
        let cap = prey0.max((p.a - p.b) / p.c);
        let traj = integrate(&Problem::full(g, p), &init, &RunSettings::new(50.0, 1e-3, 100)).map_err(|a| a.error.to_string())?;
        for m in &traj.monitors {
            worst_prey = worst_prey.max(m.prey_sup - cap);
            if !(m.min_s > 0.0 && m.min_i.unwrap_or(1.0) > 0.0 && m.min_p > 0.0) {
                ok = false;
                notes.push(format!("{name}: nonpositive at t={}", m.t));
                break;
            }
        }
    }
    if worst_prey > 1e-6 {
        ok = false;
    }
    notes.push(format!("prey bound excess {worst_prey:.1e}"));

    let pairs = [
        ("V", PreyPredatorParams { a: 2.0, b: 1.0, c: 1.0, k: 1.0, h: 3.0, d: 1.0, big_d: 1.0 }),
        ("F", PreyPredatorParams { a: 2.0, b: 1.0, c: 1.0, k: 2.0, h: 1.0, d: 1.0, big_d: 1.0 }),
        ("F", PreyPredatorParams { a: 3.0, b: 0.5, c: 2.0, k: 1.5, h: 1.0, d: 0.5, big_d: 2.0 }),
    ];
    for (which, q) in pairs {
        let init = State {
            s: Field::from_fn(&g, |x| 1.0 + 0.8 * (PI * x).cos()),
            i: Field::zeros(&g),
            p: Field::from_fn(&g, |x| 0.5 + 0.3 * (2.0 * PI * x).cos()),
        };
        let traj = integrate(&Problem::prey_predator(g, q), &init, &RunSettings::new(200.0, 1e-3, 100))
            .map_err(|a| a.error.to_string())?;
        let series: Vec<f64> = traj
            .monitors
            .iter()
            .map(|m| if which == "V" { m.v } else { m.f })
            .collect::<Option<Vec<f64>>>()
            .ok_or("functional missing from monitors")?;
        let worst_rise = series.windows(2).map(|w| (w[1] - w[0]) / (1.0 + w[0].abs())).fold(f64::NEG_INFINITY, f64::max);
        let limit = if q.h >= q.a { [q.a, 0.0] } else { [q.h, q.b * (q.a - q.h) / q.c] };
        let fin = &traj.final_state;
        let dist = sup(&fin.s, &Field::constant(&g, limit[0])).max(sup(&fin.p, &Field::constant(&g, limit[1])));
        let pass = worst_rise <= 1e-8 && dist <= 1e-3;
        ok &= pass;
        notes.push(format!("{which}(h={}, a={}): rise {worst_rise:.1e}, limit {dist:.1e}", q.h, q.a));
    }
    check(ok, notes.join(", "))
}

fn oracle() -> Outcome {
    fn rk4(p: &Parameters, mut y: [f64; 3], horizon: f64, dt: f64) -> [f64; 3] {
        let f = |y: [f64; 3]| {
            let [s, i, x] = y;
            let n = s + i;
            [
                p.a * n - p.b * s - p.c * n * s - p.k * i * s - p.ell * s * x,
                p.k * i * s - p.b * i - p.c * n * i - p.gamma * i * x,
                p.theta * s * x + p.sigma * i * x - p.rho * x,
            ]
        };
        let add = |y: [f64; 3], h: f64, k: [f64; 3]| [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2]];
        for _ in 0..(horizon / dt).round() as usize {
            let k1 = f(y);
            let k2 = f(add(y, dt / 2.0, k1));
            let k3 = f(add(y, dt / 2.0, k2));
            let k4 = f(add(y, dt, k3));
            for j in 0..3 {
                y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
        y
    }
    let sets = [
        (special([2.0, 0.5, 1.0, 4.0, 1.0, 1.0, 1.0]), [1.0, 0.3, 0.4]),
        (special([3.0, 0.5, 1.0, 2.0, 1.0, 1.0, 1.0]), [0.5, 0.5, 0.2]),
        (
            Parameters { a: 2.5, b: 0.4, c: 0.8, k: 3.0, ell: 1.2, gamma: 0.7, theta: 0.9, sigma: 0.5, rho: 0.6, d: 1.0, big_d: 2.0 },
            [0.8, 0.2, 0.6],
        ),
    ];
    let g = Grid::new(1.0, 8, Boundary::Neumann).unwrap();
    let dt = 1e-5;
    let mut worst = 0.0_f64;
    for (p, y0) in sets {
        let traj = integrate(&Problem::full(g, p), &State::constant(&g, y0), &RunSettings::new(10.0, dt, 100_000))
            .map_err(|a| a.error.to_string())?;
        let reference = rk4(&p, y0, 10.0, dt / 10.0);
        for (j, f) in traj.final_state.fields().iter().enumerate() {
            worst = worst.max(sup(f, &Field::constant(&g, reference[j])));
        }
    }
    check(worst <= 1e-5, format!("3 sets, worst gap {worst:.1e} at T=10"))
}

fn determinism() -> Outcome {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/acceptance_suite.json");
    let dirs = [tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?];
    let statuses: Vec<_> = thread::scope(|s| {
        let handles: Vec<_> = dirs
            .iter()
            .map(|dir| {
                let config = &config;
                s.spawn(move || {
                    Command::new(env!("CARGO_BIN_EXE_ecoepi"))
                        .args(["verify", "--config"])
                        .arg(config)
                        .arg("--out")
                        .arg(dir.path())
                        .output()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for st in &statuses {
        let out = st.as_ref().map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("verify exited with {:?}", out.status.code()));
        }
    }
    let a = std::fs::read(dirs[0].path().join("verify.json")).map_err(|e| e.to_string())?;
    let b = std::fs::read(dirs[1].path().join("verify.json")).map_err(|e| e.to_string())?;
    check(a == b, format!("bundled suite twice, verify.json {} bytes, identical: {}", a.len(), a == b))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("eigenvalue accuracy", eigenvalues),
        ("logistic existence threshold", logistic_threshold),
        ("decomposition identities", decomposition),
        ("uniqueness probe", uniqueness),
        ("Neumann global stability", neumann_stability),
        ("Dirichlet trichotomy", dirichlet_trichotomy),
        ("monitors", monitors),
        ("ODE oracle", oracle),
        ("determinism", determinism),
    ];
    let results: Vec<Outcome> = thread::scope(|s| {
        let handles: Vec<_> = criteria.iter().map(|(_, f)| s.spawn(f)).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err("panicked".to_string())))
            .collect()
    });
    let mut failed = 0;
    for (n, ((name, _), r)) in criteria.iter().zip(&results).enumerate() {
        match r {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", n + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", n + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
