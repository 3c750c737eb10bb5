use cod_core::engine::{self, StopPolicy, StopReason};
use cod_core::grid::{Grid, GridFunction};
use cod_core::oracles::rk4_oscillator;
use cod_core::oscillator::{
    asymptotic_exponent, build_scheme, power_series_solution, solve, term_bound, upper_estimate,
    OscillatorProblem,
};
use cod_core::C64;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn ivp(grid: Grid, omega_sq: impl Fn(f64) -> f64, a: f64, b: f64) -> OscillatorProblem {
    OscillatorProblem::initial_value(GridFunction::from_real_fn(grid, omega_sq), c(a), c(b)).unwrap()
}

type Frequency = fn(f64) -> f64;

fn slow_omega(t: f64) -> f64 {
    1.0 - 0.5 * t.sin()
}

#[test]
fn two_term_sum_is_within_delta() {
    let grid = Grid::spanning(0.0, 1.0, 1001).unwrap();
    let run = solve(&ivp(grid, slow_omega, 1.0, 0.0), &StopPolicy::new(1e-12, 60).unwrap()).unwrap();
    assert_eq!(run.stop_reason, StopReason::Converged);
    let two = GridFunction::from_real_fn(grid, |t| 1.0 - 0.5 * (t * t - t + t.sin()));
    let delta = run.partial_sum.sup_distance(&two).unwrap();
    assert!(delta <= 0.0273, "{delta}");
    assert!(delta > 0.02, "{delta}");
}

#[test]
fn terms_obey_factorial_bound() {
    let grid = Grid::spanning(0.0, 1.0, 1001).unwrap();
    let scheme = build_scheme(&ivp(grid, slow_omega, 1.0, 0.0)).unwrap();
    let h = grid.step();
    for (n, term) in engine::terms(&scheme).take(9).enumerate().skip(1) {
        let term = term.unwrap();
        for (i, t) in grid.points().enumerate() {
            assert!(term[i].norm() <= term_bound(n, 1.0, 1.5, t) + 10.0 * h * h, "n={n} t={t}");
        }
    }
}

#[test]
fn constant_frequency_closed_forms() {
    let grid = Grid::spanning(0.0, 1.0, 10001).unwrap();
    let policy = StopPolicy::new(1e-10, 12).unwrap();
    for (w, exact) in [(1.0, f64::cos as fn(f64) -> f64), (-1.0, f64::cosh)] {
        let run = solve(&ivp(grid, |_| w, 1.0, 0.0), &policy).unwrap();
        assert!(run.terms_used <= 12);
        let err = run.partial_sum.sup_distance(&GridFunction::from_real_fn(grid, exact)).unwrap();
        assert!(err <= 1e-8, "w={w} err={err:e}");
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

/// `(p/q)` reduced.
fn rational(p: i64, q: i64) -> (i64, i64) {
    let g = gcd(p, q);
    (p / g, q / g)
}

#[test]
fn power_series_coefficients_are_exact_rationals() {
    // alpha = k / 2
    for k in [0i64, 1, 2, 4] {
        let alpha = k as f64 / 2.0;
        let s = power_series_solution(alpha, 3).unwrap();
        // (alpha+1)(alpha+2) = (k+2)(k+4)/4
        let d1 = rational((k + 2) * (k + 4), 4);
        // (2 alpha + 3)(2 alpha + 4) = (k+3)(k+4)
        let d2 = rational(d1.0 * (k + 3) * (k + 4), d1.1);
        for (coef, (num, den)) in [(s.coefficients[1], d1), (s.coefficients[2], d2)] {
            // coef = den / num
            let back = coef * num as f64 / den as f64;
            assert!((back - 1.0).abs() <= 4.0 * f64::EPSILON, "alpha={alpha}");
        }
    }
    let s = power_series_solution(0.0, 3).unwrap();
    assert_eq!((s.coefficients[1], s.coefficients[2]), (0.5, 1.0 / 24.0));
    let s = power_series_solution(1.0, 3).unwrap();
    assert_eq!(s.coefficients[1], 1.0 / 6.0);
    assert!((s.coefficients[2] - 1.0 / 180.0).abs() < 1e-18);
}

#[test]
fn power_series_cod_and_rk4_agree() {
    let grid = Grid::spanning(0.0, 1.0, 10001).unwrap();
    for alpha in [0.0, 0.5, 1.0, 2.0] {
        let w = move |t: f64| -t.powf(alpha);
        let run = solve(&ivp(grid, w, 1.0, 0.0), &StopPolicy::new(1e-14, 60).unwrap()).unwrap();
        assert_eq!(run.stop_reason, StopReason::Converged);
        let series = GridFunction::from_real_fn(grid, |t| power_series_solution(alpha, 30).unwrap().eval(t));
        let rk = rk4_oscillator(|t| c(w(t)), c(1.0), c(0.0), grid);
        assert!(rk.error_estimate <= 1e-9);
        let e1 = run.partial_sum.sup_distance(&series).unwrap();
        let e2 = run.partial_sum.sup_distance(&rk.solution).unwrap();
        let e3 = series.sup_distance(&rk.solution).unwrap();
        assert!(e1.max(e2).max(e3) <= 1e-6, "alpha={alpha} {e1:e} {e2:e} {e3:e}");
    }
}

#[test]
fn rk4_self_check_order_on_smooth_frequencies() {
    let grid = Grid::spanning(0.0, 1.0, 11).unwrap();
    for alpha in [0.0, 1.0, 2.0] {
        let rk = rk4_oscillator(|t| c(-t.powf(alpha)), c(1.0), c(0.0), grid);
        assert!((rk.observed_order - 4.0).abs() <= 0.3, "alpha={alpha} order={}", rk.observed_order);
    }
}

#[test]
fn upper_estimate_dominates() {
    let grid = Grid::spanning(0.0, 4.0, 4001).unwrap();
    for alpha in [0.0, 0.5, 1.0, 2.0] {
        let s = power_series_solution(alpha, 80).unwrap();
        for t in grid.points().skip(1) {
            assert!(s.eval(t) <= upper_estimate(alpha, t), "alpha={alpha} t={t}");
        }
    }
}

#[test]
fn alpha_one_against_rk4_on_wider_window() {
    let grid = Grid::spanning(0.0, 2.0, 201).unwrap();
    let rk = rk4_oscillator(|t| c(-t), c(1.0), c(0.0), grid);
    let s = power_series_solution(1.0, 25).unwrap();
    let series = GridFunction::from_real_fn(grid, |t| s.eval(t));
    let err = series.sup_distance(&rk.solution).unwrap();
    assert!(err <= 1e-7, "{err:e}");
}

#[test]
fn logarithmic_growth_rate() {
    for alpha in [0.0, 0.5, 1.0, 2.0] {
        let s = power_series_solution(alpha, 400).unwrap();
        let ratio = s.eval(30.0).ln() / asymptotic_exponent(alpha, 30.0);
        assert!((ratio - 1.0).abs() < 0.05, "alpha={alpha} ratio={ratio}");
    }
}

#[test]
fn cod_matches_rk4_for_assorted_frequencies() {
    let grid = Grid::spanning(0.0, 1.0, 2001).unwrap();
    let h = grid.step();
    let cases: [(Frequency, f64, f64); 4] = [
        (slow_omega, 1.0, 0.0),
        (|t| 2.0 + t.cos(), 0.5, 1.0),
        (|t| -t * t, 1.0, -1.0),
        (|t| (0.5 * t).exp(), 0.0, 1.0),
    ];
    for (w, a, b) in cases {
        let run = solve(&ivp(grid, w, a, b), &StopPolicy::default()).unwrap();
        let rk = rk4_oscillator(|t| c(w(t)), c(a), c(b), grid);
        let tol = f64::max(1e-6, 10.0 * h * h * rk.solution.norms().sup);
        let err = run.partial_sum.sup_distance(&rk.solution).unwrap();
        assert!(err <= tol, "{err:e}");
    }
}

#[test]
fn telescoping_defect() {
    let grid = Grid::spanning(0.0, 1.0, 501).unwrap();
    let scheme = build_scheme(&ivp(grid, slow_omega, 1.0, 0.5)).unwrap();
    let h = grid.step();
    for n in 1..=3 {
        let c = engine::telescoping_check(&scheme, n).unwrap();
        assert!(c.gap <= 10.0 * h * h * c.curvature + 1e-9, "N={n} {c:?}");
    }
}

#[test]
fn series_is_linear_in_initial_data() {
    let grid = Grid::spanning(0.0, 1.0, 201).unwrap();
    let policy = StopPolicy::fixed_terms(8).unwrap();
    let f = |a: f64, b: f64| solve(&ivp(grid, slow_omega, a, b), &policy).unwrap().partial_sum;
    let combo = f(1.0, 0.0).scaled(c(2.0)).add(&f(0.0, 1.0).scaled(c(-3.0))).unwrap();
    assert!(f(2.0, -3.0).sup_distance(&combo).unwrap() < 1e-13);
}

#[test]
fn terms_follow_the_recurrence_exactly() {
    use cod_core::CodScheme;
    let grid = Grid::spanning(0.0, 1.0, 101).unwrap();
    let scheme = build_scheme(&ivp(grid, slow_omega, 1.0, 0.2)).unwrap();
    let terms: Vec<_> = engine::terms(&scheme).take(5).map(|t| t.unwrap()).collect();
    for w in terms.windows(2) {
        assert_eq!(scheme.cycle_map(&w[0]).unwrap(), w[1]);
    }
}
