//! Spatially constant data on a Neumann grid stays constant, so the PDE run
//! must agree with a classical RK4 integration of the reaction ODE.

use ecoepi_core::simulate::{integrate, Problem, RunSettings};
use ecoepi_core::{Boundary, Grid, Parameters, State};

#[allow(clippy::too_many_arguments)]
fn ode_rhs(y: [f64; 3], a: f64, b: f64, c: f64, k: f64, ell: f64, gamma: f64, theta: f64, sigma: f64, rho: f64) -> [f64; 3] {
    let [s, i, p] = y;
    let n = s + i;
    [
        a * n - b * s - c * n * s - k * i * s - ell * s * p,
        k * i * s - b * i - c * n * i - gamma * i * p,
        theta * s * p + sigma * i * p - rho * p,
    ]
}

fn rk4(p: &Parameters, y0: [f64; 3], horizon: f64, dt: f64) -> [f64; 3] {
    let f = |y: [f64; 3]| ode_rhs(y, p.a, p.b, p.c, p.k, p.ell, p.gamma, p.theta, p.sigma, p.rho);
    let axpy = |y: [f64; 3], h: f64, k: [f64; 3]| [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2]];
    let steps = (horizon / dt).round() as usize;
    let mut y = y0;
    for _ in 0..steps {
        let k1 = f(y);
        let k2 = f(axpy(y, 0.5 * dt, k1));
        let k3 = f(axpy(y, 0.5 * dt, k2));
        let k4 = f(axpy(y, dt, k3));
        for j in 0..3 {
            y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    y
}

/// Largest deviation from the RK4 reference at T = 10 and the largest
/// spatial spread of any field at the end.
fn run(p: &Parameters, y0: [f64; 3], dt: f64) -> (f64, f64) {
    let g = Grid::new(1.0, 6, Boundary::Neumann).unwrap();
    let traj = integrate(&Problem::full(g, *p), &State::constant(&g, y0), &RunSettings::new(10.0, dt, 10_000)).unwrap();
    let reference = rk4(p, y0, 10.0, dt / 10.0);
    let mut gap = 0.0_f64;
    let mut spread = 0.0_f64;
    for (j, f) in traj.final_state.fields().iter().enumerate() {
        spread = spread.max(f.max() - f.min());
        for v in f.iter() {
            gap = gap.max((v - reference[j]).abs());
        }
    }
    (gap, spread)
}

#[test]
fn constant_data_matches_rk4_reference() {
    let sets = [
        (Parameters::special(2.0, 0.5, 1.0, 4.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap(), [1.0, 0.3, 0.4]),
        (Parameters::special(3.0, 0.5, 1.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap(), [0.5, 0.5, 0.2]),
        (
            Parameters { a: 2.5, b: 0.4, c: 0.8, k: 3.0, ell: 1.2, gamma: 0.7, theta: 0.9, sigma: 0.5, rho: 0.6, d: 1.0, big_d: 2.0 },
            [0.8, 0.2, 0.6],
        ),
    ];
    for (p, y0) in sets {
        let (gap, spread) = run(&p, y0, 1e-5);
        assert!(gap <= 1e-5, "gap {gap:e} for {p:?}");
        assert!(spread <= 1e-12, "spread {spread:e}");
    }
}

#[test]
fn error_is_first_order_in_dt() {
    let p = Parameters::special(3.0, 0.5, 1.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
    let (coarse, _) = run(&p, [0.5, 0.5, 0.2], 2e-4);
    let (fine, _) = run(&p, [0.5, 0.5, 0.2], 1e-4);
    let ratio = coarse / fine;
    assert!((1.7..=2.3).contains(&ratio), "ratio {ratio}");
}
