//! Stationary Schrodinger equation `[Laplacian + 2(E - U)] psi = 0` on
//! periodic 1D and 2D (square) grids.
//!
//! Two component choices are offered:
//!
//! - [`Variant::Laplace`]: `G = Laplacian`, `V = -2(E - U)`, with
//!   `G^-1 = -F^-1 k^-2 F`. The `k = 0` mode is mapped to zero, so
//!   `G G^-1` is the identity only on mean-free fields.
//! - [`Variant::Resolvent`]: `G = 2E + Laplacian`, `V = 2U`, with
//!   `G^-1 = F^-1 (2E - k^2)^-1 F`, which is bounded for `E < 0`.
//!
//! On a periodic grid the only fields annihilated by the Laplacian are
//! constants, and `2E + Laplacian` has a kernel only when `2E` hits a grid
//! `k^2`. The source-driven form (`psi_g = 0`, `D psi = phi`) is therefore the
//! practical entry point for the resolvent variant.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::engine::{self, CodScheme, Field, SeriesRun, StopPolicy};
use crate::error::{invalid, Error, Result};
use crate::fft::{self, Direction};
use crate::grid::{sup, Grid, GridFunction};
use crate::C64;
#[allow(unused_imports)]
use num_traits::Float;

/// Complex samples on a periodic 1D line or 2D square box.
///
/// 2D values are row-major: `values[i * n + j]` sits at `(x_i, y_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    n: usize,
    dims: usize,
    start: f64,
    box_length: f64,
    values: Vec<C64>,
}

impl PeriodicField {
    fn check(n: usize, box_length: f64) -> Result<()> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(invalid("periodic size must be even and at least 4"));
        }
        if !(box_length > 0.0) || !box_length.is_finite() {
            return Err(invalid("box length must be positive"));
        }
        Ok(())
    }

    pub fn new_1d(start: f64, box_length: f64, values: Vec<C64>) -> Result<Self> {
        let n = values.len();
        Self::check(n, box_length)?;
        Ok(PeriodicField { n, dims: 1, start, box_length, values })
    }

    pub fn new_2d(n: usize, start: f64, box_length: f64, values: Vec<C64>) -> Result<Self> {
        Self::check(n, box_length)?;
        if values.len() != n * n {
            return Err(Error::GridMismatch);
        }
        Ok(PeriodicField { n, dims: 2, start, box_length, values })
    }

    pub fn from_fn_1d(n: usize, start: f64, box_length: f64, f: impl Fn(f64) -> C64) -> Result<Self> {
        Self::check(n, box_length)?;
        let h = box_length / n as f64;
        let values = (0..n).map(|i| f(start + i as f64 * h)).collect();
        Ok(PeriodicField { n, dims: 1, start, box_length, values })
    }

    pub fn from_fn_2d(
        n: usize,
        start: f64,
        box_length: f64,
        f: impl Fn(f64, f64) -> C64,
    ) -> Result<Self> {
        Self::check(n, box_length)?;
        let h = box_length / n as f64;
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(f(start + i as f64 * h, start + j as f64 * h));
            }
        }
        Ok(PeriodicField { n, dims: 2, start, box_length, values })
    }

    pub fn from_grid_function(f: &GridFunction) -> Result<Self> {
        Self::new_1d(f.grid().start(), f.grid().period(), f.values().to_vec())
    }

    /// 1D fields only.
    pub fn to_grid_function(&self) -> Result<GridFunction> {
        if self.dims != 1 {
            return Err(invalid("only 1D fields convert to grid functions"));
        }
        GridFunction::new(self.grid(), self.values.clone())
    }

    /// Per-axis grid (right end point excluded).
    pub fn grid(&self) -> Grid {
        Grid::periodic(self.start, self.box_length, self.n).expect("validated at construction")
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn shape(&self) -> Vec<usize> {
        alloc::vec![self.n; self.dims]
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn step(&self) -> f64 {
        self.box_length / self.n as f64
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn same_layout(&self, other: &PeriodicField) -> bool {
        self.n == other.n
            && self.dims == other.dims
            && (self.box_length - other.box_length).abs() <= 1e-12 * self.box_length
            && (self.start - other.start).abs() <= 1e-12 * self.box_length
    }

    fn with_values(&self, values: Vec<C64>) -> Self {
        PeriodicField { values, ..*self }
    }

    pub fn zip_with(&self, other: &PeriodicField, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if !self.same_layout(other) {
            return Err(Error::GridMismatch);
        }
        Ok(self.with_values(self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect()))
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn mean(&self) -> C64 {
        self.values.iter().sum::<C64>() / self.values.len() as f64
    }

    /// Cyclic shift by `shift` grid points along every axis.
    pub fn shifted(&self, shift: usize) -> Self {
        let n = self.n;
        let mut values = alloc::vec![C64::new(0.0, 0.0); self.values.len()];
        match self.dims {
            1 => {
                for i in 0..n {
                    values[(i + shift) % n] = self.values[i];
                }
            }
            _ => {
                for i in 0..n {
                    for j in 0..n {
                        values[((i + shift) % n) * n + (j + shift) % n] = self.values[i * n + j];
                    }
                }
            }
        }
        self.with_values(values)
    }

    pub fn sup_distance(&self, other: &PeriodicField) -> Result<f64> {
        Ok(self.zip_with(other, |a, b| a - b)?.sup_norm())
    }

    /// `k^2` of every flattened mode position.
    fn k_squared(&self) -> Vec<f64> {
        let n = self.n;
        let k1: Vec<f64> = (0..n).map(|j| fft::wavenumber(j, n, self.box_length)).collect();
        match self.dims {
            1 => k1.iter().map(|k| k * k).collect(),
            _ => {
                let mut out = Vec::with_capacity(n * n);
                for ki in &k1 {
                    for kj in &k1 {
                        out.push(ki * ki + kj * kj);
                    }
                }
                out
            }
        }
    }

    fn transform(&self, values: &mut [C64], dir: Direction) {
        match self.dims {
            1 => fft::transform(values, dir),
            _ => fft::transform_2d(values, self.n, self.n, dir),
        }
    }

    /// Applies the Fourier multiplier `m(mode index, k^2)`.
    fn fourier_multiply(&self, m: impl Fn(usize, f64) -> Result<C64>) -> Result<Self> {
        let mut coeffs = self.values.clone();
        self.transform(&mut coeffs, Direction::Forward);
        let norm = 1.0 / coeffs.len() as f64;
        for (idx, (c, k2)) in coeffs.iter_mut().zip(self.k_squared()).enumerate() {
            *c *= m(idx, k2)? * norm;
        }
        self.transform(&mut coeffs, Direction::Inverse);
        Ok(self.with_values(coeffs))
    }

    /// Largest `k^2` on the grid.
    pub fn k_squared_max(&self) -> f64 {
        let k = core::f64::consts::PI * self.n as f64 / self.box_length;
        k * k * self.dims as f64
    }
}

impl Field for PeriodicField {
    fn sup_norm(&self) -> f64 {
        sup(&self.values)
    }

    fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    fn axpy(&mut self, a: C64, x: &Self) {
        assert_eq!(self.values.len(), x.values.len(), "axpy on mismatched fields");
        for (y, &xv) in self.values.iter_mut().zip(&x.values) {
            *y += a * xv;
        }
    }

    fn zeros_like(&self) -> Self {
        self.map(|_| C64::new(0.0, 0.0))
    }
}

/// Spectral Laplacian (multiplier `-k^2`).
pub fn laplacian(f: &PeriodicField) -> PeriodicField {
    f.fourier_multiply(|_, k2| Ok(C64::new(-k2, 0.0))).expect("infallible multiplier")
}

/// `-F^-1 k^-2 F` with the zero mode annihilated; the result has zero mean.
pub fn inverse_laplacian(f: &PeriodicField) -> PeriodicField {
    f.fourier_multiply(|_, k2| Ok(if k2 == 0.0 { C64::new(0.0, 0.0) } else { C64::new(-1.0 / k2, 0.0) }))
        .expect("infallible multiplier")
}

/// `(2E + Laplacian)^-1 = F^-1 (2E - k^2)^-1 F`.
pub fn resolvent(f: &PeriodicField, energy: f64) -> Result<PeriodicField> {
    let scale = 1.0 + (2.0 * energy).abs();
    f.fourier_multiply(|idx, k2| {
        let den = 2.0 * energy - k2;
        if den.abs() <= 1e-12 * scale {
            Err(Error::OnShellMode { index: idx })
        } else {
            Ok(C64::new(1.0 / den, 0.0))
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Laplace,
    Resolvent,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Laplace => "laplace",
            Variant::Resolvent => "resolvent",
        }
    }
}

#[derive(Debug, Clone)]
pub struct StationaryScheme {
    potential: PeriodicField,
    energy: f64,
    variant: Variant,
    generating: PeriodicField,
    label: String,
}

/// Round-off level of `G psi_g` for a spectral operator on this grid.
pub fn default_generating_tol(psi_g: &PeriodicField) -> f64 {
    1e3 * f64::EPSILON * (1.0 + psi_g.sup_norm()) * (1.0 + psi_g.k_squared_max())
}

pub fn build_scheme(
    potential: &PeriodicField,
    energy: f64,
    psi_g: &PeriodicField,
    variant: Variant,
) -> Result<StationaryScheme> {
    build_scheme_with_tol(potential, energy, psi_g, variant, default_generating_tol(psi_g))
}

pub fn build_scheme_with_tol(
    potential: &PeriodicField,
    energy: f64,
    psi_g: &PeriodicField,
    variant: Variant,
    generating_tol: f64,
) -> Result<StationaryScheme> {
    if !potential.same_layout(psi_g) {
        return Err(Error::GridMismatch);
    }
    if !energy.is_finite() {
        return Err(invalid("energy must be finite"));
    }
    let scheme = StationaryScheme {
        potential: potential.clone(),
        energy,
        variant,
        generating: psi_g.clone(),
        label: format!("stationary {}D {} E={}", potential.dims(), variant.as_str(), energy),
    };
    engine::check_generating(&scheme, generating_tol)?;
    Ok(scheme)
}

impl StationaryScheme {
    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    fn apply_g_inverse(&self, f: &PeriodicField) -> Result<PeriodicField> {
        match self.variant {
            Variant::Laplace => Ok(inverse_laplacian(f)),
            Variant::Resolvent => resolvent(f, self.energy),
        }
    }
}

impl CodScheme for StationaryScheme {
    type Field = PeriodicField;

    fn label(&self) -> &str {
        &self.label
    }

    fn generating(&self) -> &PeriodicField {
        &self.generating
    }

    fn cycle_map(&self, f: &PeriodicField) -> Result<PeriodicField> {
        self.apply_g_inverse(&self.potential(f)?)
    }

    fn potential(&self, f: &PeriodicField) -> Result<PeriodicField> {
        let e = self.energy;
        match self.variant {
            Variant::Laplace => self.potential.zip_with(f, |u, v| -2.0 * (e - u) * v),
            Variant::Resolvent => self.potential.zip_with(f, |u, v| 2.0 * u * v),
        }
    }

    fn defect_op(&self, f: &PeriodicField) -> Result<PeriodicField> {
        let e = self.energy;
        let lap = laplacian(f);
        let pot = self.potential.zip_with(f, |u, v| 2.0 * (e - u) * v)?;
        lap.zip_with(&pot, |a, b| a + b)
    }

    fn g_inverse(&self, f: &PeriodicField) -> Option<Result<PeriodicField>> {
        Some(self.apply_g_inverse(f))
    }
}

pub fn solve_stationary(
    potential: &PeriodicField,
    energy: f64,
    psi_g: &PeriodicField,
    variant: Variant,
    policy: &StopPolicy,
) -> Result<SeriesRun<PeriodicField>> {
    engine::run_cod(&build_scheme(potential, energy, psi_g, variant)?, policy)
}

/// Particular solution of `[Laplacian + 2(E - U)] psi = phi`.
pub fn solve_stationary_with_source(
    potential: &PeriodicField,
    energy: f64,
    psi_g: &PeriodicField,
    source: &PeriodicField,
    variant: Variant,
    policy: &StopPolicy,
) -> Result<SeriesRun<PeriodicField>> {
    let scheme = build_scheme(potential, energy, psi_g, variant)?;
    engine::run_cod_with_source(&scheme, source, policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<C64> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        (0..n).map(|_| C64::new(next(), next())).collect()
    }

    #[test]
    fn inverse_laplacian_of_sine() {
        let f = PeriodicField::from_fn_1d(32, 0.0, 4.0 * PI, |x| re((0.5 * x).sin())).unwrap();
        let g = inverse_laplacian(&f);
        for (i, v) in g.values().iter().enumerate() {
            let x = i as f64 * f.step();
            assert!((v - re(-(0.5 * x).sin() / 0.25)).norm() < 1e-12);
        }
        let one = PeriodicField::from_fn_1d(16, 0.0, 1.0, |_| re(1.0)).unwrap();
        assert!(inverse_laplacian(&one).sup_norm() < 1e-15);
    }

    #[test]
    fn projector_identity_and_zero_mean() {
        let f = PeriodicField::new_1d(0.0, 7.0, pseudo_random(64, 1)).unwrap();
        let back = laplacian(&inverse_laplacian(&f));
        let mean = f.mean();
        let expect = f.map(|v| v - mean);
        assert!(back.sup_distance(&expect).unwrap() < 1e-10);
        assert!(inverse_laplacian(&f).mean().norm() < 1e-15);
    }

    #[test]
    fn resolvent_round_trip_1d_and_2d() {
        let f = PeriodicField::new_1d(0.0, 5.0, pseudo_random(64, 2)).unwrap();
        let g = resolvent(&f, -1.0).unwrap();
        let back = laplacian(&g).zip_with(&g, |l, v| l - 2.0 * v).unwrap();
        assert!(back.sup_distance(&f).unwrap() < 1e-10);

        let f2 = PeriodicField::new_2d(16, 0.0, 3.0, pseudo_random(256, 3)).unwrap();
        let g2 = resolvent(&f2, -0.5).unwrap();
        let back2 = laplacian(&g2).zip_with(&g2, |l, v| l - v).unwrap();
        assert!(back2.sup_distance(&f2).unwrap() < 1e-10);
    }

    #[test]
    fn resolvent_of_plane_wave() {
        let l = 2.0 * PI;
        let f = PeriodicField::from_fn_1d(16, 0.0, l, |x| C64::new(0.0, x).exp()).unwrap();
        let g = resolvent(&f, -0.5).unwrap();
        let expect = f.map(|v| v / (-1.0 - 1.0));
        assert!(g.sup_distance(&expect).unwrap() < 1e-13);
    }

    #[test]
    fn on_shell_mode_is_an_error() {
        let f = PeriodicField::from_fn_1d(16, 0.0, 2.0 * PI, |_| re(1.0)).unwrap();
        // k = 1 is on the grid, so 2E = 1 is resonant
        assert!(matches!(resolvent(&f, 0.5), Err(Error::OnShellMode { .. })));
    }

    #[test]
    fn field_validation() {
        assert!(PeriodicField::new_1d(0.0, 1.0, alloc::vec![re(0.0); 6]).is_ok());
        assert!(PeriodicField::new_1d(0.0, 1.0, alloc::vec![re(0.0); 5]).is_err());
        assert!(PeriodicField::new_1d(0.0, 1.0, alloc::vec![re(0.0); 2]).is_err());
        assert!(PeriodicField::new_1d(0.0, 0.0, alloc::vec![re(0.0); 8]).is_err());
        assert!(PeriodicField::new_2d(4, 0.0, 1.0, alloc::vec![re(0.0); 15]).is_err());
    }

    #[test]
    fn constant_generating_function_terminates() {
        let u = PeriodicField::from_fn_1d(16, 0.0, 2.0 * PI, |_| re(0.0)).unwrap();
        let c = PeriodicField::from_fn_1d(16, 0.0, 2.0 * PI, |_| re(0.7)).unwrap();
        let e = 0.3;
        let scheme = build_scheme(&u, e, &c, Variant::Laplace).unwrap();
        let run = engine::run_cod(&scheme, &StopPolicy::new(1e-12, 20).unwrap()).unwrap();
        assert_eq!(run.stop_reason, engine::StopReason::Converged);
        assert!(run.partial_sum.sup_distance(&c).unwrap() < 1e-15);
        let d = engine::defect(&scheme, &run).unwrap();
        for v in d.values() {
            assert!((v - re(2.0 * e * 0.7)).norm() < 1e-12);
        }
    }

    #[test]
    fn first_term_for_cosine_potential() {
        let eps = 0.01;
        let k1 = 1.0;
        let u = PeriodicField::from_fn_1d(32, 0.0, 2.0 * PI, |x| re(eps * (k1 * x).cos())).unwrap();
        let one = u.map(|_| re(1.0));
        let scheme = build_scheme(&u, 0.0, &one, Variant::Laplace).unwrap();
        let t1 = scheme.cycle_map(&one).unwrap();
        for (i, v) in t1.values().iter().enumerate() {
            let x = i as f64 * u.step();
            let expect = -2.0 * eps * (k1 * x).cos() / (k1 * k1);
            assert!((v - re(expect)).norm() < 1e-10);
        }
    }
}
