//! `[m^2 + d^2/dx^2 - A e^x] psi = 0` (stationary Schrodinger equation with
//! an exponential potential, scaled so that `2E = m^2`).
//!
//! Components: `G = m^2 + d^2/dx^2`, `V = A e^x`, `psi_g = e^{imx}`. The
//! inverse of `G` is itself a nested series over `G0 = d^2/dx^2` (integrals
//! from `-inf`) and `V0 = -m^2`. On an exponential monomial `e^{lambda x}`
//! every operator involved is diagonal, so the nested series collapses to the
//! geometric sum
//!
//! ```text
//! G^-1 e^{lambda x} = e^{lambda x} / lambda^2 * sum_k (-m^2 / lambda^2)^k
//!                   = e^{lambda x} / (lambda^2 + m^2)
//! ```
//!
//! and the outer series becomes
//! `psi_p = e^{imx} [1 + sum_n A^n e^{nx} prod_{k<=n} 1/(k^2 + 2imk)]`.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::grid::{second_derivative, Grid, GridFunction};
use crate::C64;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpPotentialProblem {
    /// `2E = m^2`.
    pub m: f64,
    /// `A`.
    pub amplitude: f64,
    pub c1: C64,
    pub c2: C64,
}

impl ExpPotentialProblem {
    pub fn new(m: f64, amplitude: f64, c1: C64, c2: C64) -> Result<Self> {
        if !m.is_finite() || !amplitude.is_finite() {
            return Err(invalid("m and A must be finite"));
        }
        Ok(ExpPotentialProblem { m, amplitude, c1, c2 })
    }
}

/// `1 / (lambda^2 + m^2)`: the resummed action of `G^-1` on `e^{lambda x}`.
pub fn resolvent_ratio(m: f64, lambda: C64) -> Result<C64> {
    let den = lambda * lambda + m * m;
    if den.norm() <= f64::MIN_POSITIVE {
        return Err(Error::OnShellPole);
    }
    Ok(den.inv())
}

/// Partial sum `sum_{k=0}^{K} r^k` of the nested geometric series with
/// ratio `r = -m^2 / lambda^2`.
pub fn nested_geometric_sum(m: f64, lambda: C64, k_max: usize) -> C64 {
    let r = -(m * m) / (lambda * lambda);
    let mut term = C64::new(1.0, 0.0);
    let mut sum = C64::new(0.0, 0.0);
    for _ in 0..=k_max {
        sum += term;
        term *= r;
    }
    sum
}

/// Truncated particular solution `psi_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpSeriesSolution {
    pub m: f64,
    pub amplitude: f64,
    /// `P_0 = 1`, `P_n = prod_{k=1}^{n} 1 / (k^2 + 2imk)`.
    pub product_coeffs: Vec<C64>,
}

pub fn particular_solution(p: &ExpPotentialProblem, n_terms: usize) -> Result<ExpSeriesSolution> {
    if n_terms < 1 {
        return Err(invalid("n_terms must be at least 1"));
    }
    if p.m == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let mut coeffs = Vec::with_capacity(n_terms + 1);
    let mut prod = C64::new(1.0, 0.0);
    coeffs.push(prod);
    for n in 1..=n_terms {
        // G^-1 V maps e^{(n-1+im)x} to A e^{(n+im)x} / ((n+im)^2 + m^2)
        prod *= resolvent_ratio(p.m, C64::new(n as f64, p.m))?;
        coeffs.push(prod);
    }
    Ok(ExpSeriesSolution { m: p.m, amplitude: p.amplitude, product_coeffs: coeffs })
}

impl ExpSeriesSolution {
    pub fn n_terms(&self) -> usize {
        self.product_coeffs.len() - 1
    }

    /// `1 + sum_n A^n e^{nx} P_n`, the bracket multiplying `e^{imx}`.
    fn envelope(&self, x: f64, conjugate: bool) -> C64 {
        let z = self.amplitude * x.exp();
        let mut power = 1.0;
        let mut sum = C64::new(0.0, 0.0);
        for p in &self.product_coeffs {
            let c = if conjugate { p.conj() } else { *p };
            sum += c * power;
            power *= z;
        }
        sum
    }

    pub fn eval(&self, x: f64) -> C64 {
        C64::new(0.0, self.m * x).exp() * self.envelope(x, false)
    }

    /// Coefficient-wise conjugate series (`m -> -m`); equals `conj(psi_p(x))`
    /// for real `x`.
    pub fn eval_conjugate(&self, x: f64) -> C64 {
        C64::new(0.0, -self.m * x).exp() * self.envelope(x, true)
    }

    pub fn sample(&self, grid: Grid) -> GridFunction {
        GridFunction::from_fn(grid, |x| self.eval(x))
    }

    /// `sum_{n>N} |A e^x|^n / (n!)^2`, an upper bound of the truncation error
    /// at `x` from `|P_n| <= 1/(n!)^2`.
    pub fn tail_bound(&self, x: f64) -> f64 {
        let z = (self.amplitude * x.exp()).abs();
        let n0 = self.n_terms() + 1;
        let mut term = 1.0;
        for k in 1..=n0 {
            term *= z / (k * k) as f64;
        }
        let mut sum = 0.0;
        let mut k = n0;
        while term > f64::MIN_POSITIVE && term > 1e-18 * sum {
            sum += term;
            k += 1;
            term *= z / (k * k) as f64;
        }
        sum
    }
}

/// `psi = C1 psi_p + C2 psi_p*`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralSolution {
    pub c1: C64,
    pub c2: C64,
    pub series: ExpSeriesSolution,
}

pub fn general_solution(p: &ExpPotentialProblem, n_terms: usize) -> Result<GeneralSolution> {
    Ok(GeneralSolution { c1: p.c1, c2: p.c2, series: particular_solution(p, n_terms)? })
}

impl GeneralSolution {
    pub fn eval(&self, x: f64) -> C64 {
        self.c1 * self.series.eval(x) + self.c2 * self.series.eval_conjugate(x)
    }

    pub fn sample(&self, grid: Grid) -> GridFunction {
        GridFunction::from_fn(grid, |x| self.eval(x))
    }
}

/// Discrete residual `psi'' + (m^2 - A e^x) psi` of sampled values.
pub fn residual(psi: &GridFunction, m: f64, amplitude: f64) -> Result<GridFunction> {
    let d2 = second_derivative(psi)?;
    let mut out = d2;
    for (i, x) in psi.grid().points().enumerate() {
        out[i] += psi[i] * (m * m - amplitude * x.exp());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn resolvent_ratio_examples() {
        for m in [0.5, 1.0, 2.0] {
            let r = resolvent_ratio(m, c(1.0, m)).unwrap();
            assert!((r - c(1.0, 2.0 * m).inv()).norm() < 1e-15);
            for n in 2..6 {
                let nf = n as f64;
                let r = resolvent_ratio(m, c(nf, m)).unwrap();
                assert!((r - c(nf * nf, 2.0 * m * nf).inv()).norm() < 1e-15);
            }
        }
        assert_eq!(resolvent_ratio(0.0, c(1.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(resolvent_ratio(1.0, c(0.0, 1.0)), Err(Error::OnShellPole));
    }

    #[test]
    fn first_product_coefficient() {
        let p = ExpPotentialProblem::new(1.0, 1.0, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let s = particular_solution(&p, 4).unwrap();
        assert!((s.product_coeffs[1] - c(0.2, -0.4)).norm() < 1e-15);
    }

    #[test]
    fn products_decrease_below_inverse_factorial_squared() {
        let p = ExpPotentialProblem::new(0.7, 2.0, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let s = particular_solution(&p, 20).unwrap();
        let mut fact = 1.0;
        for n in 1..=20 {
            fact *= n as f64;
            let pn = s.product_coeffs[n].norm();
            assert!(pn < s.product_coeffs[n - 1].norm());
            assert!(pn <= 1.0 / (fact * fact) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn zero_amplitude_is_plane_wave() {
        let p = ExpPotentialProblem::new(1.3, 0.0, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let s = particular_solution(&p, 10).unwrap();
        for x in [-2.0, 0.0, 0.7] {
            assert!((s.eval(x) - c(0.0, 1.3 * x).exp()).norm() < 1e-15);
        }
        let q = ExpPotentialProblem::new(1.3, 0.0, c(0.5, 0.0), c(0.5, 0.0)).unwrap();
        let g = general_solution(&q, 10).unwrap();
        for x in [-2.0, 0.0, 0.7] {
            assert!((g.eval(x) - c((1.3 * x).cos(), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn conjugate_series_matches_pointwise_conjugate() {
        let p = ExpPotentialProblem::new(1.0, -1.5, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let s = particular_solution(&p, 25).unwrap();
        for x in [-3.0, 0.0, 1.0] {
            assert!((s.eval_conjugate(x) - s.eval(x).conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_energy_is_rejected() {
        let p = ExpPotentialProblem::new(0.0, 1.0, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(particular_solution(&p, 3), Err(Error::ZeroEnergy));
    }

    #[test]
    fn geometric_sum_reaches_resolvent() {
        for m in [0.5, 1.0, 2.0] {
            let lambda = c(1.0, m);
            let sum = nested_geometric_sum(m, lambda, 200);
            let expect = lambda * lambda / c(1.0, 2.0 * m);
            assert!((sum - expect).norm() < 1e-12);
        }
    }
}
