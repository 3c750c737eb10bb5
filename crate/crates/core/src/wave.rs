//! Wave equation in a static dispersive medium, `d/dt (eps(x) dA/dt) = d^2A/dx^2`,
//! on a periodic `x` grid and a time window starting at `t = 0`.
//!
//! Components: `G = d/dt (eps d/dt)`, `G^-1 = int dt eps^-1 int dt` (both
//! integrals from `t = 0`), `V = d^2/dx^2` (spectral) and
//! `psi_g = S(x) + t R(x) / eps(x)`, so that `A(0) = S` and `eps dA/dt(0) = R`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::engine::{self, CodScheme, Field, SeriesRun, StopPolicy};
use crate::error::{invalid, Error, Result};
use crate::fft::{self, Direction};
use crate::grid::{cumulative_trapezoid_into, second_difference_into, sup, Grid, GridFunction};
use crate::C64;
#[allow(unused_imports)]
use num_traits::Float;

/// Largest accepted number of samples along either axis.
pub const MAX_AXIS: usize = 2048;

/// Samples on a `(t, x)` rectangle, stored row-major with one row per time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    x_grid: Grid,
    t_grid: Grid,
    values: Vec<C64>,
}

impl SpaceTimeField {
    pub fn new(x_grid: Grid, t_grid: Grid, values: Vec<C64>) -> Result<Self> {
        check_axes(&x_grid, &t_grid)?;
        if values.len() != x_grid.count() * t_grid.count() {
            return Err(invalid("value count does not match the grids"));
        }
        Ok(SpaceTimeField { x_grid, t_grid, values })
    }

    pub fn zeros(x_grid: Grid, t_grid: Grid) -> Result<Self> {
        let n = x_grid.count() * t_grid.count();
        Self::new(x_grid, t_grid, alloc::vec![C64::new(0.0, 0.0); n])
    }

    /// Samples `f(x, t)`.
    pub fn from_fn(x_grid: Grid, t_grid: Grid, f: impl Fn(f64, f64) -> C64) -> Result<Self> {
        let mut values = Vec::with_capacity(x_grid.count() * t_grid.count());
        for t in t_grid.points() {
            values.extend(x_grid.points().map(|x| f(x, t)));
        }
        Self::new(x_grid, t_grid, values)
    }

    pub fn x_grid(&self) -> &Grid {
        &self.x_grid
    }

    pub fn t_grid(&self) -> &Grid {
        &self.t_grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn rows(&self) -> usize {
        self.t_grid.count()
    }

    pub fn cols(&self) -> usize {
        self.x_grid.count()
    }

    pub fn at(&self, it: usize, ix: usize) -> C64 {
        self.values[it * self.cols() + ix]
    }

    pub fn row_values(&self, it: usize) -> &[C64] {
        let n = self.cols();
        &self.values[it * n..(it + 1) * n]
    }

    /// Row `it` as a function of `x`.
    pub fn row(&self, it: usize) -> GridFunction {
        GridFunction::new(self.x_grid, self.row_values(it).to_vec()).expect("row length matches x grid")
    }

    /// The row at time `t`, which must be a grid time.
    pub fn snapshot(&self, t: f64) -> Result<GridFunction> {
        let it = self.t_grid.index_of(t).ok_or(Error::LimitNotOnGrid { limit: t })?;
        Ok(self.row(it))
    }

    pub fn same_layout(&self, other: &SpaceTimeField) -> bool {
        self.x_grid.matches(&other.x_grid) && self.t_grid.matches(&other.t_grid)
    }

    pub fn sup_distance(&self, other: &SpaceTimeField) -> Result<f64> {
        if !self.same_layout(other) {
            return Err(Error::GridMismatch);
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    fn with_values(&self, values: Vec<C64>) -> Self {
        SpaceTimeField { x_grid: self.x_grid, t_grid: self.t_grid, values }
    }

    /// Applies `op(column_in, column_out)` to every time column.
    fn map_columns(&self, op: impl Fn(&[C64], &mut [C64])) -> Self {
        let (nt, nx) = (self.rows(), self.cols());
        let mut out = alloc::vec![C64::new(0.0, 0.0); nt * nx];
        let mut col = alloc::vec![C64::new(0.0, 0.0); nt];
        let mut res = alloc::vec![C64::new(0.0, 0.0); nt];
        for ix in 0..nx {
            for (it, c) in col.iter_mut().enumerate() {
                *c = self.values[it * nx + ix];
            }
            op(&col, &mut res);
            for (it, r) in res.iter().enumerate() {
                out[it * nx + ix] = *r;
            }
        }
        self.with_values(out)
    }

    /// Spectral `d^2/dx^2` of every row.
    pub fn second_x_derivative(&self) -> Self {
        let nx = self.cols();
        let period = self.x_grid.period();
        let factors: Vec<f64> = (0..nx)
            .map(|j| {
                let k = fft::wavenumber(j, nx, period);
                -k * k / nx as f64
            })
            .collect();
        let mut values = self.values.clone();
        for row in values.chunks_mut(nx) {
            fft::transform(row, Direction::Forward);
            for (c, f) in row.iter_mut().zip(&factors) {
                *c *= *f;
            }
            fft::transform(row, Direction::Inverse);
        }
        self.with_values(values)
    }
}

impl Field for SpaceTimeField {
    fn sup_norm(&self) -> f64 {
        sup(&self.values)
    }

    fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    fn axpy(&mut self, a: C64, x: &Self) {
        for (v, w) in self.values.iter_mut().zip(&x.values) {
            *v += a * w;
        }
    }

    fn zeros_like(&self) -> Self {
        self.with_values(alloc::vec![C64::new(0.0, 0.0); self.values.len()])
    }
}

fn check_axes(x_grid: &Grid, t_grid: &Grid) -> Result<()> {
    if x_grid.count() > MAX_AXIS || t_grid.count() > MAX_AXIS {
        return Err(invalid("grids are limited to 2048 samples per axis"));
    }
    if x_grid.count() < 4 || !x_grid.count().is_multiple_of(2) {
        return Err(invalid("x grid needs an even number of at least 4 samples"));
    }
    if t_grid.count() < 4 {
        return Err(Error::TooFewPoints { needed: 4, got: t_grid.count() });
    }
    if t_grid.start() != 0.0 {
        return Err(invalid("time grid must start at t = 0"));
    }
    Ok(())
}

/// Permittivity and initial data on a common periodic `x` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveProblem {
    pub epsilon: GridFunction,
    /// `A(x, 0)`.
    pub s: GridFunction,
    /// `eps dA/dt (x, 0)`, which equals `dA/dt` for `eps = 1`.
    pub r: GridFunction,
}

impl WaveProblem {
    pub fn new(epsilon: GridFunction, s: GridFunction, r: GridFunction) -> Result<Self> {
        if !epsilon.grid().matches(s.grid()) || !epsilon.grid().matches(r.grid()) {
            return Err(Error::GridMismatch);
        }
        for v in epsilon.values() {
            if !(v.re > 0.0) || v.im != 0.0 || !v.re.is_finite() {
                return Err(invalid("permittivity must be real and positive"));
            }
        }
        Ok(WaveProblem { epsilon, s, r })
    }

    pub fn epsilon_min(&self) -> f64 {
        self.epsilon.values().iter().map(|v| v.re).fold(f64::INFINITY, f64::min)
    }

    pub fn epsilon_max(&self) -> f64 {
        self.epsilon.values().iter().map(|v| v.re).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct WaveScheme {
    epsilon: Vec<f64>,
    generating: SpaceTimeField,
    label: String,
}

/// Tolerance on `|G psi_g|`: round-off of a second time difference of a
/// function linear in `t`.
pub fn default_generating_tol(psi_g: &SpaceTimeField, eps_max: f64) -> f64 {
    let h = psi_g.t_grid().step();
    1e3 * f64::EPSILON * (1.0 + psi_g.sup_norm()) * eps_max / (h * h)
}

pub fn build_wave_scheme(p: &WaveProblem, x_grid: Grid, t_grid: Grid) -> Result<WaveScheme> {
    check_axes(&x_grid, &t_grid)?;
    if !p.epsilon.grid().matches(&x_grid) {
        return Err(Error::GridMismatch);
    }
    let epsilon: Vec<f64> = p.epsilon.values().iter().map(|v| v.re).collect();
    let nx = x_grid.count();
    let mut values = Vec::with_capacity(nx * t_grid.count());
    for t in t_grid.points() {
        for (ix, e) in epsilon.iter().enumerate() {
            values.push(p.s[ix] + p.r[ix] * (t / e));
        }
    }
    let generating = SpaceTimeField::new(x_grid, t_grid, values)?;
    let scheme = WaveScheme {
        epsilon,
        label: format!("wave nx={} nt={}", nx, t_grid.count()),
        generating,
    };
    let tol = default_generating_tol(&scheme.generating, p.epsilon_max());
    engine::check_generating(&scheme, tol)?;
    Ok(scheme)
}

impl WaveScheme {
    pub fn epsilon(&self) -> &[f64] {
        &self.epsilon
    }

    fn check(&self, f: &SpaceTimeField) -> Result<()> {
        if f.same_layout(&self.generating) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    fn inverse(&self, f: &SpaceTimeField) -> SpaceTimeField {
        let h = f.t_grid().step();
        let nx = f.cols();
        let inner = f.map_columns(|col, out| cumulative_trapezoid_into(col, h, 0, out));
        let mut scaled = inner;
        for row in scaled.values.chunks_mut(nx) {
            for (v, e) in row.iter_mut().zip(&self.epsilon) {
                *v /= *e;
            }
        }
        scaled.map_columns(|col, out| cumulative_trapezoid_into(col, h, 0, out))
    }
}

impl CodScheme for WaveScheme {
    type Field = SpaceTimeField;

    fn label(&self) -> &str {
        &self.label
    }

    fn generating(&self) -> &SpaceTimeField {
        &self.generating
    }

    fn cycle_map(&self, f: &SpaceTimeField) -> Result<SpaceTimeField> {
        self.check(f)?;
        Ok(self.inverse(&f.second_x_derivative()))
    }

    fn potential(&self, f: &SpaceTimeField) -> Result<SpaceTimeField> {
        self.check(f)?;
        Ok(f.second_x_derivative())
    }

    fn defect_op(&self, f: &SpaceTimeField) -> Result<SpaceTimeField> {
        self.check(f)?;
        let h = f.t_grid().step();
        let nx = f.cols();
        let mut out = f.map_columns(|col, out| second_difference_into(col, h, out));
        for row in out.values.chunks_mut(nx) {
            for (v, e) in row.iter_mut().zip(&self.epsilon) {
                *v *= *e;
            }
        }
        out.axpy(C64::new(-1.0, 0.0), &f.second_x_derivative());
        Ok(out)
    }

    fn g_inverse(&self, f: &SpaceTimeField) -> Option<Result<SpaceTimeField>> {
        Some(self.check(f).map(|_| self.inverse(f)))
    }
}

/// Builds the scheme and sums the series; the caller inspects
/// `run.stop_reason` for divergence.
pub fn solve_wave(
    p: &WaveProblem,
    x_grid: Grid,
    t_grid: Grid,
    policy: &StopPolicy,
) -> Result<SeriesRun<SpaceTimeField>> {
    engine::run_cod(&build_wave_scheme(p, x_grid, t_grid)?, policy)
}

/// Hint printed when a run diverges.
pub fn divergence_hint(p: &WaveProblem, x_grid: &Grid, t_max: f64) -> String {
    let k_max = core::f64::consts::PI / x_grid.step();
    format!(
        "series diverged: t_max * k_max / sqrt(eps_min) = {:.3}; shorten the time window or coarsen x",
        t_max * k_max / p.epsilon_min().sqrt()
    )
}

/// Deviations of the initial rows from the data: `(sup |A(0) - S|,
/// sup |eps dA/dt(0) - R|)`, the derivative from the one-sided second order
/// difference.
pub fn initial_condition_errors(field: &SpaceTimeField, p: &WaveProblem) -> Result<(f64, f64)> {
    if !field.x_grid().matches(p.s.grid()) {
        return Err(Error::GridMismatch);
    }
    let h = field.t_grid().step();
    let mut s_err: f64 = 0.0;
    let mut r_err: f64 = 0.0;
    for ix in 0..field.cols() {
        s_err = s_err.max((field.at(0, ix) - p.s[ix]).norm());
        let d = (field.at(0, ix) * -3.0 + field.at(1, ix) * 4.0 - field.at(2, ix)) / (2.0 * h);
        r_err = r_err.max((d * p.epsilon[ix].re - p.r[ix]).norm());
    }
    Ok((s_err, r_err))
}
