//! Uniform grids and the discrete calculus the solvers are assembled from.

use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::engine::Field;
use crate::error::{Error, Result};
use crate::fft::{self, Direction};
use crate::C64;
#[allow(unused_imports)]
use num_traits::Float;

/// Relative tolerance (in units of the step) for snapping coordinates to grid points.
const SNAP_TOL: f64 = 1e-9;

/// Uniform grid `start + i * step`, `0 <= i < count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    start: f64,
    step: f64,
    count: usize,
}

impl Grid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !start.is_finite() || !step.is_finite() {
            return Err(Error::InvalidGrid("start and step must be finite"));
        }
        if step <= 0.0 {
            return Err(Error::InvalidGrid("step must be positive"));
        }
        if count < 2 {
            return Err(Error::InvalidGrid("count must be at least 2"));
        }
        Ok(Grid { start, step, count })
    }

    /// Grid with `count` points spanning the closed interval `[start, end]`.
    pub fn spanning(start: f64, end: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidGrid("count must be at least 2"));
        }
        Grid::new(start, (end - start) / (count - 1) as f64, count)
    }

    /// Grid on `[start, end]` with a step as close as possible to `step`.
    pub fn with_step(start: f64, end: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(end > start) {
            return Err(Error::InvalidGrid("need end > start and step > 0"));
        }
        let intervals = ((end - start) / step).round().max(1.0) as usize;
        Grid::spanning(start, end, intervals + 1)
    }

    /// Periodic grid of `count` points on `[start, start + period)`; the
    /// right end point is excluded.
    pub fn periodic(start: f64, period: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidGrid("count must be at least 2"));
        }
        Grid::new(start, period / count as f64, count)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Last grid point.
    pub fn end(&self) -> f64 {
        self.point(self.count - 1)
    }

    /// Length of the periodic cell `step * count`.
    pub fn period(&self) -> f64 {
        self.step * self.count as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.point(i))
    }

    /// Index of the grid point equal to `x`, if there is one.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let pos = (x - self.start) / self.step;
        let i = pos.round();
        if (pos - i).abs() <= SNAP_TOL && i >= 0.0 && (i as usize) < self.count {
            Some(i as usize)
        } else {
            None
        }
    }

    /// Index of the grid point nearest to `x`, clamped to the grid.
    pub fn nearest_index(&self, x: f64) -> usize {
        let pos = ((x - self.start) / self.step).round();
        if pos <= 0.0 {
            0
        } else {
            (pos as usize).min(self.count - 1)
        }
    }

    /// Same point set up to round-off in start and step.
    pub fn matches(&self, other: &Grid) -> bool {
        self.count == other.count
            && (self.step - other.step).abs() <= SNAP_TOL * self.step
            && (self.start - other.start).abs() <= SNAP_TOL * self.step
    }
}

/// Complex samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<C64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(Error::GridMismatch);
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction { grid, values: alloc::vec![C64::new(0.0, 0.0); grid.count()] }
    }

    pub fn constant(grid: Grid, value: C64) -> Self {
        GridFunction { grid, values: alloc::vec![value; grid.count()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> C64) -> Self {
        GridFunction { grid, values: grid.points().map(f).collect() }
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| C64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        GridFunction { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Pointwise combination of two functions on the same grid.
    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if !self.grid.matches(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(GridFunction { grid: self.grid, values })
    }

    pub fn mul(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scaled(&self, c: C64) -> Self {
        self.map(|v| v * c)
    }

    pub fn norms(&self) -> Norms {
        norms(self)
    }

    /// `max_i |f_i - g_i|`.
    pub fn sup_distance(&self, other: &GridFunction) -> Result<f64> {
        Ok(self.sub(other)?.norms().sup)
    }
}

impl Index<usize> for GridFunction {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.values[i]
    }
}

impl IndexMut<usize> for GridFunction {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.values[i]
    }
}

impl Field for GridFunction {
    fn sup_norm(&self) -> f64 {
        sup(&self.values)
    }

    fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    fn axpy(&mut self, a: C64, x: &Self) {
        assert_eq!(self.values.len(), x.values.len(), "axpy on mismatched grids");
        for (y, &xv) in self.values.iter_mut().zip(&x.values) {
            *y += a * xv;
        }
    }

    fn zeros_like(&self) -> Self {
        GridFunction::zeros(self.grid)
    }
}

/// Sup and weighted L2 norms of a grid function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub sup: f64,
    /// `sqrt(step * sum |f_i|^2)`.
    pub l2: f64,
}

pub fn norms(f: &GridFunction) -> Norms {
    let sum_sq: f64 = f.values.iter().map(|v| v.norm_sqr()).sum();
    Norms { sup: sup(&f.values), l2: (f.grid.step() * sum_sq).sqrt() }
}

pub(crate) fn sup(values: &[C64]) -> f64 {
    values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `g(x_i) = integral of f from lower_limit to x_i` by the composite trapezoid
/// rule, walking outwards from the lower limit in both directions.
pub fn cumulative_integral(f: &GridFunction, lower_limit: f64) -> Result<GridFunction> {
    let i0 = f.grid.index_of(lower_limit).ok_or(Error::LimitNotOnGrid { limit: lower_limit })?;
    let mut out = GridFunction::zeros(f.grid);
    cumulative_trapezoid_into(&f.values, f.grid.step(), i0, &mut out.values);
    Ok(out)
}

/// Cumulative trapezoid of `values` with spacing `h`, anchored at index `i0`.
pub(crate) fn cumulative_trapezoid_into(values: &[C64], h: f64, i0: usize, out: &mut [C64]) {
    let half = 0.5 * h;
    out[i0] = C64::new(0.0, 0.0);
    for i in i0..values.len().saturating_sub(1) {
        out[i + 1] = out[i] + (values[i] + values[i + 1]) * half;
    }
    for i in (1..=i0).rev() {
        out[i - 1] = out[i] - (values[i - 1] + values[i]) * half;
    }
}

/// Second difference: central in the interior, one-sided at the two end
/// points (five-point third order stencil, `2 f0 - 5 f1 + 4 f2 - f3` with four
/// samples, the interior value with three).
pub fn second_derivative(f: &GridFunction) -> Result<GridFunction> {
    let n = f.len();
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: n });
    }
    let mut out = GridFunction::zeros(f.grid);
    second_difference_into(&f.values, f.grid.step(), &mut out.values);
    Ok(out)
}

pub(crate) fn second_difference_into(v: &[C64], h: f64, out: &mut [C64]) {
    let n = v.len();
    let inv = 1.0 / (h * h);
    for i in 1..n - 1 {
        out[i] = (v[i - 1] - v[i] * 2.0 + v[i + 1]) * inv;
    }
    if n >= 5 {
        let w = [35.0 / 12.0, -104.0 / 12.0, 114.0 / 12.0, -56.0 / 12.0, 11.0 / 12.0];
        out[0] = w.iter().enumerate().map(|(k, c)| v[k] * *c).sum::<C64>() * inv;
        out[n - 1] = w.iter().enumerate().map(|(k, c)| v[n - 1 - k] * *c).sum::<C64>() * inv;
    } else if n == 4 {
        out[0] = (v[0] * 2.0 - v[1] * 5.0 + v[2] * 4.0 - v[3]) * inv;
        out[n - 1] = (v[n - 1] * 2.0 - v[n - 2] * 5.0 + v[n - 3] * 4.0 - v[n - 4]) * inv;
    } else {
        out[0] = out[1];
        out[n - 1] = out[1];
    }
}

/// First difference: central in the interior, one-sided second order at the ends.
pub fn first_derivative(f: &GridFunction) -> Result<GridFunction> {
    let n = f.len();
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: n });
    }
    let v = &f.values;
    let inv = 1.0 / (2.0 * f.grid.step());
    let mut out = GridFunction::zeros(f.grid);
    for i in 1..n - 1 {
        out.values[i] = (v[i + 1] - v[i - 1]) * inv;
    }
    out.values[0] = (v[0] * -3.0 + v[1] * 4.0 - v[2]) * inv;
    out.values[n - 1] = (v[n - 1] * 3.0 - v[n - 2] * 4.0 + v[n - 3]) * inv;
    Ok(out)
}

/// Fourier coefficients of a periodic grid function.
///
/// `coeffs[j]` multiplies `exp(i k_j (x - start))` with `k_j` from
/// [`Spectrum::wavenumber`]; the forward transform carries the `1/N` factor so
/// a unit plane wave has a unit coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub period: f64,
    pub coeffs: Vec<C64>,
}

impl Spectrum {
    /// `2 pi j / period` with `j` in the symmetric range `[-N/2, N/2)`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        fft::wavenumber(j, self.coeffs.len(), self.period)
    }

    pub fn wavenumbers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.coeffs.len()).map(|j| self.wavenumber(j))
    }
}

/// Forward transform of samples on a periodic grid (right end point excluded).
pub fn dft(f: &GridFunction) -> Spectrum {
    let mut coeffs = f.values.clone();
    fft::transform(&mut coeffs, Direction::Forward);
    let scale = 1.0 / coeffs.len() as f64;
    coeffs.iter_mut().for_each(|c| *c *= scale);
    Spectrum { period: f.grid.period(), coeffs }
}

/// Inverse of [`dft`] onto `grid`.
pub fn idft(s: &Spectrum, grid: Grid) -> Result<GridFunction> {
    if s.coeffs.len() != grid.count() {
        return Err(Error::GridMismatch);
    }
    let mut values = s.coeffs.clone();
    fft::transform(&mut values, Direction::Inverse);
    GridFunction::new(grid, values)
}
