//! Oscillator Cauchy problem `f'' + w^2(t) f = 0`, `f(t_a) = a`, `f'(t_b) = b`.
//!
//! Components: `G = d^2/dt^2`, `V = -w^2(t)`, `psi_g = a + b (t - t_a)` and
//! `G^-1 = int_{t_a}^t dt1 int_{t_b}^{t1} dt2`, so each term is obtained from
//! the previous one by two cumulative integrations (inner from `t_b`, outer
//! from `t_a`) of `-w^2 * term`.
//!
//! With `t_a != t_b` the truncated series is not guaranteed to honour
//! `f'(t_b) = b` term by term; that case is accepted but experimental.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::engine::{self, CodScheme, Field, SeriesRun, StopPolicy};
use crate::error::{invalid, Error, Result};
use crate::grid::{cumulative_integral, second_derivative, GridFunction};
use crate::C64;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone)]
pub struct OscillatorProblem {
    pub omega_sq: GridFunction,
    pub t_a: f64,
    pub t_b: f64,
    pub a: C64,
    pub b: C64,
}

impl OscillatorProblem {
    pub fn new(omega_sq: GridFunction, t_a: f64, t_b: f64, a: C64, b: C64) -> Result<Self> {
        for limit in [t_a, t_b] {
            if omega_sq.grid().index_of(limit).is_none() {
                return Err(Error::LimitNotOnGrid { limit });
            }
        }
        Ok(OscillatorProblem { omega_sq, t_a, t_b, a, b })
    }

    /// Standard initial value problem `f(t0) = a`, `f'(t0) = b` at the grid start.
    pub fn initial_value(omega_sq: GridFunction, a: C64, b: C64) -> Result<Self> {
        let t0 = omega_sq.grid().start();
        Self::new(omega_sq, t0, t0, a, b)
    }
}

/// The component choice above, ready for [`engine::run_cod`].
#[derive(Debug, Clone)]
pub struct OscillatorScheme {
    omega_sq: GridFunction,
    t_a: f64,
    t_b: f64,
    generating: GridFunction,
    label: String,
}

/// Tolerance on `|G psi_g|` used by [`build_scheme`]: round-off of a second
/// difference of a linear function.
pub fn default_generating_tol(psi_g: &GridFunction) -> f64 {
    let h = psi_g.grid().step();
    1e3 * f64::EPSILON * (1.0 + psi_g.sup_norm()) / (h * h)
}

pub fn build_scheme(p: &OscillatorProblem) -> Result<OscillatorScheme> {
    let grid = *p.omega_sq.grid();
    let generating = GridFunction::from_fn(grid, |t| p.a + p.b * (t - p.t_a));
    let tol = default_generating_tol(&generating);
    build_scheme_with_tol(p, tol)
}

/// As [`build_scheme`] with a caller-supplied tolerance for `G psi_g = 0`.
pub fn build_scheme_with_tol(p: &OscillatorProblem, generating_tol: f64) -> Result<OscillatorScheme> {
    let grid = *p.omega_sq.grid();
    for limit in [p.t_a, p.t_b] {
        if grid.index_of(limit).is_none() {
            return Err(Error::LimitNotOnGrid { limit });
        }
    }
    let generating = GridFunction::from_fn(grid, |t| p.a + p.b * (t - p.t_a));
    let scheme = OscillatorScheme {
        omega_sq: p.omega_sq.clone(),
        t_a: p.t_a,
        t_b: p.t_b,
        generating,
        label: format!("oscillator t_a={} t_b={}", p.t_a, p.t_b),
    };
    engine::check_generating(&scheme, generating_tol)?;
    Ok(scheme)
}

impl OscillatorScheme {
    pub fn omega_sq(&self) -> &GridFunction {
        &self.omega_sq
    }

    fn double_integral(&self, f: &GridFunction) -> Result<GridFunction> {
        cumulative_integral(&cumulative_integral(f, self.t_b)?, self.t_a)
    }
}

impl CodScheme for OscillatorScheme {
    type Field = GridFunction;

    fn label(&self) -> &str {
        &self.label
    }

    fn generating(&self) -> &GridFunction {
        &self.generating
    }

    fn cycle_map(&self, f: &GridFunction) -> Result<GridFunction> {
        self.double_integral(&self.potential(f)?)
    }

    fn potential(&self, f: &GridFunction) -> Result<GridFunction> {
        self.omega_sq.zip_with(f, |w, v| -w * v)
    }

    fn defect_op(&self, f: &GridFunction) -> Result<GridFunction> {
        second_derivative(f)?.add(&self.omega_sq.mul(f)?)
    }

    fn g_inverse(&self, f: &GridFunction) -> Option<Result<GridFunction>> {
        Some(self.double_integral(f))
    }
}

/// Builds the scheme and sums the series.
pub fn solve(p: &OscillatorProblem, policy: &StopPolicy) -> Result<SeriesRun<GridFunction>> {
    engine::run_cod(&build_scheme(p)?, policy)
}

/// `|a| C^n t^{2n} / (2n)!`, the size bound of the `n`-th term for
/// `t_a = t_b = 0`, `b = 0` and `|w^2| <= C` on `[0, t]`. Evaluated in log space.
pub fn term_bound(n: usize, a_abs: f64, c_max: f64, t: f64) -> f64 {
    if n == 0 {
        return a_abs;
    }
    if a_abs == 0.0 || c_max == 0.0 || t == 0.0 {
        return 0.0;
    }
    let log_fact: f64 = (2..=2 * n).map(|k| (k as f64).ln()).sum();
    let nf = n as f64;
    (a_abs.ln() + nf * c_max.ln() + 2.0 * nf * t.ln() - log_fact).exp()
}

/// Closed-form series for `w^2(t) = -t^alpha`, `a = 1`, `b = 0`,
/// `t_a = t_b = 0`: `f(t) = sum_n c_n t^{n (alpha + 2)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeriesSolution {
    pub alpha: f64,
    /// `c_0 = 1`, `c_{n+1} = c_n / ((e_n + alpha + 1)(e_n + alpha + 2))`.
    /// Entries underflow to zero beyond a few dozen terms for large `alpha`;
    /// evaluation does not read them.
    pub coefficients: Vec<f64>,
    /// `e_n = n (alpha + 2)`.
    pub exponents: Vec<f64>,
}

pub fn power_series_solution(alpha: f64, n_terms: usize) -> Result<PowerSeriesSolution> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(invalid("alpha must be greater than -1"));
    }
    if n_terms < 1 {
        return Err(invalid("n_terms must be at least 1"));
    }
    let mut coefficients = Vec::with_capacity(n_terms);
    let mut exponents = Vec::with_capacity(n_terms);
    let mut c = 1.0;
    for n in 0..n_terms {
        let e = n as f64 * (alpha + 2.0);
        coefficients.push(c);
        exponents.push(e);
        c /= (e + alpha + 1.0) * (e + alpha + 2.0);
    }
    Ok(PowerSeriesSolution { alpha, coefficients, exponents })
}

impl PowerSeriesSolution {
    pub fn n_terms(&self) -> usize {
        self.coefficients.len()
    }

    /// `sum_{n < n_terms} c_n t^{e_n}` for `t >= 0`, accumulated through the
    /// term ratio `t^{alpha+2} / ((e_n + alpha + 1)(e_n + alpha + 2))` with
    /// compensated summation.
    pub fn eval(&self, t: f64) -> f64 {
        let a = self.alpha;
        let x = t.max(0.0).powf(a + 2.0);
        let mut sum = NeumaierSum::default();
        let mut term = 1.0;
        for n in 0..self.n_terms() {
            sum.add(term);
            let e = self.exponents[n];
            term *= x / ((e + a + 1.0) * (e + a + 2.0));
        }
        sum.value()
    }
}

/// `1 + t^{alpha+2} / ((alpha+1)(alpha+2)) * exp(2 t^{alpha/2+1} / (alpha+2))`,
/// an upper bound of the `w^2 = -t^alpha` solution for `t > 0`.
pub fn upper_estimate(alpha: f64, t: f64) -> f64 {
    1.0 + t.powf(alpha + 2.0) / ((alpha + 1.0) * (alpha + 2.0)) * asymptotic_exponent(alpha, t).exp()
}

/// `2 t^{alpha/2+1} / (alpha+2)`: the solution grows like `exp` of this.
pub fn asymptotic_exponent(alpha: f64, t: f64) -> f64 {
    2.0 * t.powf(0.5 * alpha + 1.0) / (alpha + 2.0)
}

#[derive(Debug, Default, Clone, Copy)]
struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::StopReason;
    use crate::grid::Grid;

    fn unit_grid(step: f64) -> Grid {
        Grid::with_step(0.0, 1.0, step).unwrap()
    }

    fn problem(step: f64, w2: impl Fn(f64) -> f64) -> OscillatorProblem {
        let g = unit_grid(step);
        OscillatorProblem::initial_value(
            GridFunction::from_real_fn(g, w2),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
        )
        .unwrap()
    }

    #[test]
    fn zero_frequency_returns_linear_generating_function() {
        let g = unit_grid(1e-2);
        let p = OscillatorProblem::initial_value(
            GridFunction::zeros(g),
            C64::new(2.0, 1.0),
            C64::new(-0.5, 0.0),
        )
        .unwrap();
        let run = solve(&p, &StopPolicy::new(1e-12, 10).unwrap()).unwrap();
        for (i, t) in g.points().enumerate() {
            assert_eq!(run.partial_sum[i], C64::new(2.0 - 0.5 * t, 1.0));
        }
    }

    #[test]
    fn first_term_for_unit_frequency() {
        let s = build_scheme(&problem(1e-2, |_| 1.0)).unwrap();
        let t1 = s.cycle_map(s.generating()).unwrap();
        for (i, t) in s.generating().grid().points().enumerate() {
            assert!((t1[i].re + t * t / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn two_term_sum_matches_closed_form() {
        let p = problem(1e-3, |t| 1.0 - 0.5 * t.sin());
        let run = solve(&p, &StopPolicy::fixed_terms(1).unwrap()).unwrap();
        for (i, t) in p.omega_sq.grid().points().enumerate() {
            let expect = 1.0 - 0.5 * (t * t - t + t.sin());
            assert!((run.partial_sum[i].re - expect).abs() < 1e-6);
        }
    }

    #[test]
    fn unit_frequency_converges_to_cosine() {
        let p = problem(1e-4, |_| 1.0);
        let run = solve(&p, &StopPolicy::new(1e-10, 40).unwrap()).unwrap();
        assert_eq!(run.stop_reason, StopReason::Converged);
        assert!(run.terms_used <= 12);
        let exact = GridFunction::from_real_fn(*p.omega_sq.grid(), f64::cos);
        assert!(run.partial_sum.sup_distance(&exact).unwrap() <= 1e-8);
    }

    #[test]
    fn off_grid_limits_are_rejected() {
        let g = unit_grid(0.1);
        let w = GridFunction::zeros(g);
        let one = C64::new(1.0, 0.0);
        assert!(matches!(
            OscillatorProblem::new(w, 0.05, 0.0, one, one),
            Err(Error::LimitNotOnGrid { .. })
        ));
    }

    #[test]
    fn bad_generating_tolerance_is_reported() {
        let p = problem(1e-2, |_| 1.0);
        // G psi_g is round-off sized; a negative tolerance can never pass
        assert!(matches!(
            build_scheme_with_tol(&p, -1.0),
            Err(Error::GeneratingNotAnnihilated { .. })
        ));
    }

    #[test]
    fn term_bound_values() {
        assert_eq!(term_bound(1, 1.0, 1.0, 1.0), 0.5);
        assert!((term_bound(3, 1.0, 1.5, 1.0) - 3.375 / 720.0).abs() < 1e-15);
        assert_eq!(term_bound(4, 1.0, 1.5, 0.0), 0.0);
        // large n stays finite and tiny instead of overflowing
        let big = term_bound(200, 1.0, 2.0, 3.0);
        assert!(big.is_finite() && big < 1e-100);
    }

    #[test]
    fn power_series_coefficients() {
        for alpha in [0.0, 0.5, 1.0, 2.0, -0.5] {
            let s = power_series_solution(alpha, 3).unwrap();
            let c1 = 1.0 / ((alpha + 1.0) * (alpha + 2.0));
            let c2 = c1 / ((2.0 * alpha + 3.0) * (2.0 * alpha + 4.0));
            assert_eq!(s.coefficients[0], 1.0);
            assert!((s.coefficients[1] - c1).abs() <= 1e-15 * c1);
            assert!((s.coefficients[2] - c2).abs() <= 1e-15 * c2);
            assert_eq!(s.exponents[2], 2.0 * (alpha + 2.0));
        }
        assert!(power_series_solution(-1.0, 5).is_err());
        assert!(power_series_solution(0.0, 0).is_err());
    }

    #[test]
    fn alpha_zero_series_is_cosh() {
        let s = power_series_solution(0.0, 25).unwrap();
        assert!((s.eval(1.0) - 1f64.cosh()).abs() < 1e-14);
        assert!((s.eval(1.0) - 1.5430806).abs() < 1e-7);
        assert_eq!(s.eval(0.0), 1.0);
    }

    #[test]
    fn upper_estimate_values() {
        assert!((upper_estimate(0.0, 1.0) - (1.0 + 0.5 * core::f64::consts::E)).abs() < 1e-14);
        assert!((upper_estimate(0.0, 1.0) - 2.35914).abs() < 1e-5);
        assert_eq!(asymptotic_exponent(0.0, 7.0), 7.0);
    }
}
