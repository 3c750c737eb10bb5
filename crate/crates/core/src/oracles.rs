//! Reference solvers used only to validate the series solvers.
//!
//! None of these touch the series code paths: the oscillator oracle is a
//! classic RK4 on `(f, f')`, the TDSE oracle is Crank-Nicolson with dense
//! spectral differentiation matrices and an LU solve, and the wave oracle is
//! explicit leapfrog with the dense spectral second-derivative matrix. Each
//! reports a step-halving error estimate and the observed order of accuracy.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::tdse::{step_count, TdseSetup};
use crate::wave::{SpaceTimeField, WaveProblem};
use crate::C64;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult<S> {
    pub solution: S,
    pub method: &'static str,
    pub step_used: f64,
    /// Richardson estimate `|y_h - y_{h/2}| / (2^p - 1)` of the returned solution's error.
    pub error_estimate: f64,
    /// `log2(|y_h - y_{h/2}| / |y_{h/2} - y_{h/4}|)`.
    pub observed_order: f64,
}

/// `log2(coarse / fine)` for errors at step ratio 2.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

fn sup_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Target of the RK4 step-halving estimate.
pub const RK4_TARGET: f64 = 1e-9;

/// `f'' + w^2(t) f = 0`, `f(t0) = a`, `f'(t0) = b` with `t0` the grid start.
/// Each grid interval is split into substeps, doubling their number until
/// the Richardson estimate is at most [`RK4_TARGET`].
pub fn rk4_oscillator(
    omega_sq: impl Fn(f64) -> C64,
    a: C64,
    b: C64,
    grid: Grid,
) -> OracleResult<GridFunction> {
    let run = |sub: usize| -> Vec<C64> {
        let h = grid.step() / sub as f64;
        let rhs = |t: f64, f: C64, g: C64| (g, -omega_sq(t) * f);
        let mut out = Vec::with_capacity(grid.count());
        let (mut f, mut g) = (a, b);
        out.push(f);
        for i in 1..grid.count() {
            let t0 = grid.point(i - 1);
            for j in 0..sub {
                let t = t0 + j as f64 * h;
                let (k1f, k1g) = rhs(t, f, g);
                let (k2f, k2g) = rhs(t + 0.5 * h, f + k1f * (0.5 * h), g + k1g * (0.5 * h));
                let (k3f, k3g) = rhs(t + 0.5 * h, f + k2f * (0.5 * h), g + k2g * (0.5 * h));
                let (k4f, k4g) = rhs(t + h, f + k3f * h, g + k3g * h);
                f += (k1f + k2f * 2.0 + k3f * 2.0 + k4f) * (h / 6.0);
                g += (k1g + k2g * 2.0 + k3g * 2.0 + k4g) * (h / 6.0);
            }
            out.push(f);
        }
        out
    };
    let mut sub = 1;
    let mut y1 = run(sub);
    let mut y2 = run(2 * sub);
    let mut y4 = run(4 * sub);
    let mut d12 = sup_diff(&y1, &y2);
    let mut d24 = sup_diff(&y2, &y4);
    while d24 / 15.0 > RK4_TARGET && sub < 1 << 14 {
        sub *= 2;
        y1 = y2;
        y2 = y4;
        y4 = run(4 * sub);
        d12 = sup_diff(&y1, &y2);
        d24 = sup_diff(&y2, &y4);
    }
    OracleResult {
        solution: GridFunction::new(grid, y4).expect("length matches grid"),
        method: "rk4",
        step_used: grid.step() / (4 * sub) as f64,
        error_estimate: d24 / 15.0,
        observed_order: observed_order(d12, d24),
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: alloc::vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(x).fold(C64::new(0.0, 0.0), |acc, (a, b)| acc + a * b))
            .collect()
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: C64, other: &DenseMatrix, b: C64) -> DenseMatrix {
        let data = self.data.iter().zip(&other.data).map(|(x, y)| a * x + b * y).collect();
        DenseMatrix { n: self.n, data }
    }
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(m: &DenseMatrix) -> Result<Self> {
        let n = m.n;
        let mut lu = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = lu.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| lu[i * n + k].norm().total_cmp(&lu[j * n + k].norm()))
                .unwrap_or(k);
            if lu[p * n + k].norm() <= 1e-14 * scale {
                return Err(Error::SingularMatrix);
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                for j in k + 1..n {
                    let v = lu[k * n + j];
                    lu[i * n + j] -= factor * v;
                }
            }
        }
        Ok(Lu { n, lu, perm })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let v = self.lu[i * n + j] * x[j];
                x[i] -= v;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let v = self.lu[i * n + j] * x[j];
                x[i] -= v;
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }
}

/// Periodic spectral first and second derivative matrices on `n` (even)
/// equispaced points of a box of length `period`, from the closed forms of
/// the trigonometric interpolant.
pub fn spectral_diff_matrices(n: usize, period: f64) -> Result<(DenseMatrix, DenseMatrix)> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(invalid("differentiation matrices need an even n >= 4"));
    }
    let h = 2.0 * core::f64::consts::PI / n as f64;
    let scale = 2.0 * core::f64::consts::PI / period;
    let mut d1 = DenseMatrix::zeros(n);
    let mut d2 = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                let v = -core::f64::consts::PI * core::f64::consts::PI / (3.0 * h * h) - 1.0 / 6.0;
                d2.set(i, j, C64::new(v * scale * scale, 0.0));
                continue;
            }
            let m = i as i64 - j as i64;
            let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let half = 0.5 * m as f64 * h;
            d1.set(i, j, C64::new(0.5 * sign / half.tan() * scale, 0.0));
            let s = half.sin();
            d2.set(i, j, C64::new(-sign / (2.0 * s * s) * scale * scale, 0.0));
        }
    }
    Ok((d1, d2))
}

/// Dense `H(t) = 1/2 (-D2 + 2iA D1 + A^2) + diag U(x, t)`.
fn dense_hamiltonian(setup: &TdseSetup, d1: &DenseMatrix, d2: &DenseMatrix, t: f64) -> DenseMatrix {
    let a = setup.vector_potential_at(t);
    let mut h = d2.combine(C64::new(-0.5, 0.0), d1, C64::new(0.0, a));
    for (i, x) in setup.grid().points().enumerate() {
        let d = h.get(i, i) + 0.5 * a * a + setup.potential_at(x, t);
        h.set(i, i, d);
    }
    h
}

/// Crank-Nicolson propagation with `H` taken at the step midpoint.
fn cn_run(
    setup: &TdseSetup,
    mats: &(DenseMatrix, DenseMatrix),
    dt: f64,
    n_steps: usize,
    mut observe: impl FnMut(usize, &[C64]),
) -> Result<Vec<C64>> {
    let n = setup.grid().count();
    let id = DenseMatrix::identity(n);
    let half = C64::new(0.0, 0.5 * dt);
    let one = C64::new(1.0, 0.0);
    let build = |t: f64| -> Result<(DenseMatrix, Lu)> {
        let h = dense_hamiltonian(setup, &mats.0, &mats.1, t);
        let explicit = id.combine(one, &h, -half);
        let implicit = Lu::factor(&id.combine(one, &h, half))?;
        Ok((explicit, implicit))
    };
    let cached = if setup.is_time_dependent() { None } else { Some(build(0.0)?) };
    let mut psi = setup.psi0().values().to_vec();
    for s in 0..n_steps {
        let fresh;
        let (explicit, implicit) = match &cached {
            Some(c) => c,
            None => {
                fresh = build((s as f64 + 0.5) * dt)?;
                &fresh
            }
        };
        psi = implicit.solve(&explicit.mul_vec(&psi));
        if !psi.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        observe(s + 1, &psi);
    }
    Ok(psi)
}

/// Crank-Nicolson from `t = 0` to `t_final` with step `dt`; the error
/// estimate and observed order come from rerunning at `dt/2` and `dt/4`, and
/// the returned solution is the `dt/4` run.
pub fn crank_nicolson(setup: &TdseSetup, dt: f64, t_final: f64) -> Result<OracleResult<GridFunction>> {
    let n_steps = step_count(t_final, dt)?;
    let grid = *setup.grid();
    let mats = spectral_diff_matrices(grid.count(), grid.period())?;
    let y1 = cn_run(setup, &mats, dt, n_steps, |_, _| {})?;
    let y2 = cn_run(setup, &mats, dt / 2.0, 2 * n_steps, |_, _| {})?;
    let y4 = cn_run(setup, &mats, dt / 4.0, 4 * n_steps, |_, _| {})?;
    let (d12, d24) = (sup_diff(&y1, &y2), sup_diff(&y2, &y4));
    Ok(OracleResult {
        solution: GridFunction::new(grid, y4)?,
        method: "crank-nicolson",
        step_used: dt / 4.0,
        error_estimate: d24 / 3.0,
        observed_order: observed_order(d12, d24),
    })
}

/// A single Crank-Nicolson run calling `observe(step, psi)` after every step.
pub fn crank_nicolson_observed(
    setup: &TdseSetup,
    dt: f64,
    t_final: f64,
    mut observe: impl FnMut(usize, &GridFunction),
) -> Result<GridFunction> {
    let n_steps = step_count(t_final, dt)?;
    let grid = *setup.grid();
    let mats = spectral_diff_matrices(grid.count(), grid.period())?;
    let out = cn_run(setup, &mats, dt, n_steps, |s, psi| {
        observe(s, &GridFunction::new(grid, psi.to_vec()).expect("length matches grid"))
    })?;
    GridFunction::new(grid, out)
}

/// Largest leapfrog step for the spectral second-derivative matrix,
/// `2 sqrt(eps_min) / k_max`.
pub fn leapfrog_step_limit(p: &WaveProblem) -> f64 {
    let x = p.epsilon.grid();
    let k_max = core::f64::consts::PI / x.step();
    2.0 * p.epsilon_min().sqrt() / k_max
}

/// Leapfrog for `eps A_tt = D2 A` with `substeps` steps per `t_grid` interval.
/// `energy` receives the staggered energy after every step.
fn leapfrog_run(
    p: &WaveProblem,
    d2: &DenseMatrix,
    t_grid: &Grid,
    substeps: usize,
    mut energy: impl FnMut(f64),
) -> Result<Vec<C64>> {
    let x = *p.epsilon.grid();
    let nx = x.count();
    let dt = t_grid.step() / substeps as f64;
    let limit = leapfrog_step_limit(p);
    if dt > limit {
        return Err(Error::CflViolation { dt, limit });
    }
    let eps: Vec<f64> = p.epsilon.values().iter().map(|v| v.re).collect();
    let h = x.step();
    let stagger = |prev: &[C64], cur: &[C64]| -> f64 {
        let lap = d2.mul_vec(prev);
        let mut e = 0.0;
        for i in 0..nx {
            let v = (cur[i] - prev[i]) / dt;
            e += eps[i] * v.norm_sqr() - (cur[i].conj() * lap[i]).re;
        }
        e * h
    };
    let mut out = Vec::with_capacity(nx * t_grid.count());
    let mut prev: Vec<C64> = p.s.values().to_vec();
    out.extend_from_slice(&prev);
    let acc0 = d2.mul_vec(&prev);
    let mut cur: Vec<C64> = (0..nx)
        .map(|i| prev[i] + (p.r[i] * dt + acc0[i] * (0.5 * dt * dt)) / eps[i])
        .collect();
    energy(stagger(&prev, &cur));
    let mut k = 1;
    for row in 1..t_grid.count() {
        while k < row * substeps {
            let lap = d2.mul_vec(&cur);
            let next: Vec<C64> =
                (0..nx).map(|i| cur[i] * 2.0 - prev[i] + lap[i] * (dt * dt / eps[i])).collect();
            prev = core::mem::replace(&mut cur, next);
            k += 1;
            energy(stagger(&prev, &cur));
        }
        out.extend_from_slice(&cur);
    }
    Ok(out)
}

/// Leapfrog oracle sampled on `t_grid`; `substeps` steps per output interval,
/// with the error estimate and observed order from `2 * substeps` and
/// `4 * substeps`. The returned solution is the finest run.
pub fn leapfrog_wave(
    p: &WaveProblem,
    t_grid: Grid,
    substeps: usize,
) -> Result<OracleResult<SpaceTimeField>> {
    if substeps < 1 {
        return Err(invalid("substeps must be at least 1"));
    }
    let x = *p.epsilon.grid();
    let (_, d2) = spectral_diff_matrices(x.count(), x.period())?;
    let y1 = leapfrog_run(p, &d2, &t_grid, substeps, |_| {})?;
    let y2 = leapfrog_run(p, &d2, &t_grid, 2 * substeps, |_| {})?;
    let y4 = leapfrog_run(p, &d2, &t_grid, 4 * substeps, |_| {})?;
    let (d12, d24) = (sup_diff(&y1, &y2), sup_diff(&y2, &y4));
    let error_estimate = d24 / 3.0;
    Ok(OracleResult {
        solution: SpaceTimeField::new(x, t_grid, y4)?,
        method: "leapfrog",
        step_used: t_grid.step() / (4 * substeps) as f64,
        error_estimate,
        observed_order: observed_order(d12, d24),
    })
}

/// Staggered leapfrog energy after every step of a single run.
pub fn leapfrog_energy_history(p: &WaveProblem, t_grid: Grid, substeps: usize) -> Result<Vec<f64>> {
    let x = *p.epsilon.grid();
    let (_, d2) = spectral_diff_matrices(x.count(), x.period())?;
    let mut history = Vec::new();
    leapfrog_run(p, &d2, &t_grid, substeps, |e| history.push(e))?;
    Ok(history)
}
