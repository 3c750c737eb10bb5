use std::f64::consts::PI;

use cod_core::grid::{Grid, GridFunction};
use cod_core::oracles::{crank_nicolson, crank_nicolson_observed};
use cod_core::tdse::{
    cod_step, hamiltonian_apply, mean_position, propagate, propagate_observed, PropagatorStep, TdseSetup,
};
use cod_core::C64;

fn smooth_setup() -> TdseSetup {
    let grid = Grid::periodic(-PI, 2.0 * PI, 32).unwrap();
    let psi = GridFunction::from_fn(grid, |x| C64::new(x.cos().exp(), 0.3 * x.sin()));
    TdseSetup::time_independent(grid, |x| 1.0 - x.cos(), psi).unwrap()
}

fn taylor(setup: &TdseSetup, psi: &GridFunction, dt: f64, n: usize) -> GridFunction {
    let mut sum = psi.clone();
    let mut term = psi.clone();
    for k in 1..=n {
        let h = hamiltonian_apply(setup, &term, 0.0).unwrap();
        term = h.scaled(C64::new(0.0, -dt / k as f64));
        sum = sum.add(&term).unwrap();
    }
    sum
}

#[test]
fn step_equals_taylor_polynomial() {
    let s = smooth_setup();
    for n in 1..=5 {
        let step = PropagatorStep::new(0.05, n).unwrap();
        let out = cod_step(&s, &step, s.psi0(), 0.0).unwrap();
        let expect = taylor(&s, s.psi0(), 0.05, n);
        let err = out.sup_distance(&expect).unwrap();
        assert!(err < 1e-12, "n={n} err={err:e}");
    }
}

fn local_error(s: &TdseSetup, n: usize, dt: f64) -> f64 {
    let out = cod_step(s, &PropagatorStep::new(dt, n).unwrap(), s.psi0(), 0.0).unwrap();
    let truth = crank_nicolson(s, dt / 64.0, dt).unwrap();
    let fine = truth.solution;
    out.sup_distance(&fine).unwrap()
}

#[test]
fn step_order_against_crank_nicolson() {
    let s = smooth_setup();
    for n in 1..=3 {
        let e1 = local_error(&s, n, 0.04);
        let e2 = local_error(&s, n, 0.02);
        let order = (e1 / e2).log2();
        println!("n={n} e1={e1:e} e2={e2:e} order={order}");
        assert!((order - (n + 1) as f64).abs() <= 0.3, "n={n} order={order}");
    }
}

#[test]
fn free_particle_phases() {
    let grid = Grid::periodic(0.0, 2.0 * PI, 16).unwrap();
    let psi0 = |x: f64| C64::new(0.0, x).exp() + C64::new(0.0, -2.0 * x).exp() * 0.5 + 0.25;
    let s = TdseSetup::time_independent(grid, |_| 0.0, GridFunction::from_fn(grid, psi0)).unwrap();
    let (psi, report) = propagate(&s, &PropagatorStep::new(1e-2, 4).unwrap(), 1.0).unwrap();
    let norm = GridFunction::from_fn(grid, psi0).norms().l2;
    let exact = GridFunction::from_fn(grid, |x| {
        (C64::new(0.0, x - 0.5).exp() + C64::new(0.0, -2.0 * x - 2.0).exp() * 0.5 + 0.25) / norm
    });
    let err = psi.sup_distance(&exact).unwrap();
    assert!(err < 1e-7, "{err:e}");
    assert!(report.max_drift < 1e-7);
}

#[test]
fn harmonic_period_matches_crank_nicolson() {
    let grid = Grid::periodic(-15.0, 30.0, 128).unwrap();
    let x0 = 2.0;
    let psi = GridFunction::from_real_fn(grid, |x| (-(x - x0) * (x - x0) / 2.0).exp());
    let s = TdseSetup::time_independent(grid, |x| 0.5 * x * x, psi).unwrap();
    let dt = 0.01;
    let t_final = 8.0;
    let mut cod = Vec::new();
    propagate_observed(&s, &PropagatorStep::new(dt, 4).unwrap(), t_final, |r, psi| {
        cod.push((r.t, mean_position(psi)))
    })
    .unwrap();
    let mut cn = Vec::new();
    crank_nicolson_observed(&s, dt, t_final, |k, psi| cn.push((k as f64 * dt, mean_position(psi)))).unwrap();
    let period = |series: &[(f64, f64)]| {
        // first upward zero crossing after the initial downward one
        let mut down = None;
        for w in series.windows(2) {
            let ((t0, a), (t1, b)) = (w[0], w[1]);
            if down.is_none() && a > 0.0 && b <= 0.0 {
                down = Some(t0 + (t1 - t0) * a / (a - b));
            } else if let Some(d) = down {
                if a > 0.0 && b <= 0.0 {
                    return t0 + (t1 - t0) * a / (a - b) - d;
                }
            }
        }
        f64::NAN
    };
    let (pc, po) = (period(&cod), period(&cn));
    println!("cod period {pc} cn period {po}");
    assert!((pc - po).abs() / po < 0.01);
    assert!((pc - 2.0 * PI).abs() / (2.0 * PI) < 0.01);
    assert!((po - 2.0 * PI).abs() / (2.0 * PI) < 0.005);
}
