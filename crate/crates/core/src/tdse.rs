//! Time-dependent Schrodinger equation on a 1D periodic grid,
//! `i d/dt psi = H(t) psi` with `H = 1/2 (i d/dx + A(t))^2 + U(x, t)`.
//!
//! Components: `G = i d/dt`, `G^-1 = -i int_{t0}^{t} dt`, `V = H(t)` and
//! `psi_g = psi(t0)`. One propagator step of length `dt` sums the first
//! `n_terms` iterated integrals
//!
//! ```text
//! psi(t + dt) = [1 + (-i) int H + (-i)^2 int H int H + ...] psi(t)
//! ```
//!
//! with no time ordering. The nested integrals are carried on
//! `quadrature_nodes` equispaced sub-nodes of the step and integrated with
//! the cumulative interpolatory rule of that node set, which is exact for
//! integrands of degree `< quadrature_nodes`. For a time-independent `H` and
//! `quadrature_nodes >= n_terms` the step is therefore exactly the degree
//! `n_terms` Taylor polynomial of `exp(-i H dt)`.
//!
//! Spatial derivatives are spectral: `i d/dx` acts on `exp(ikx)` as `-k`, so
//! the kinetic term multiplies mode `k` by `(k - A)^2 / 2`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::fft::{self, Direction};
use crate::grid::{Grid, GridFunction};
use crate::C64;
#[allow(unused_imports)]
use num_traits::Float;

/// `U(x, t)`.
pub type ScalarPotential = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// Spatially uniform vector potential `A(t)`.
pub type VectorPotential = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Norm drift beyond which [`propagate`] aborts.
pub const MAX_NORM_DRIFT: f64 = 0.1;

#[derive(Clone)]
pub struct TdseSetup {
    grid: Grid,
    potential: ScalarPotential,
    vector_potential: VectorPotential,
    psi0: GridFunction,
    time_dependent: bool,
}

impl core::fmt::Debug for TdseSetup {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("TdseSetup")
            .field("grid", &self.grid)
            .field("time_dependent", &self.time_dependent)
            .finish_non_exhaustive()
    }
}

impl TdseSetup {
    /// General setup; `psi0` is rescaled to unit L2 norm.
    pub fn new(
        grid: Grid,
        potential: ScalarPotential,
        vector_potential: VectorPotential,
        psi0: GridFunction,
    ) -> Result<Self> {
        Self::build(grid, potential, vector_potential, psi0, true)
    }

    /// Time-independent `U(x)` and `A = 0`.
    pub fn time_independent(
        grid: Grid,
        potential: impl Fn(f64) -> f64 + Send + Sync + 'static,
        psi0: GridFunction,
    ) -> Result<Self> {
        Self::build(grid, Arc::new(move |x, _| potential(x)), Arc::new(|_| 0.0), psi0, false)
    }

    /// Time-independent `U(x)` and constant `A`.
    pub fn with_constant_field(
        grid: Grid,
        potential: impl Fn(f64) -> f64 + Send + Sync + 'static,
        a0: f64,
        psi0: GridFunction,
    ) -> Result<Self> {
        Self::build(grid, Arc::new(move |x, _| potential(x)), Arc::new(move |_| a0), psi0, false)
    }

    fn build(
        grid: Grid,
        potential: ScalarPotential,
        vector_potential: VectorPotential,
        psi0: GridFunction,
        time_dependent: bool,
    ) -> Result<Self> {
        if !psi0.grid().matches(&grid) {
            return Err(Error::GridMismatch);
        }
        let norm = psi0.norms().l2;
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(invalid("initial state must have a finite nonzero norm"));
        }
        let psi0 = psi0.scaled(C64::new(1.0 / norm, 0.0));
        Ok(TdseSetup { grid, potential, vector_potential, psi0, time_dependent })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn psi0(&self) -> &GridFunction {
        &self.psi0
    }

    pub fn is_time_dependent(&self) -> bool {
        self.time_dependent
    }

    pub fn potential_at(&self, x: f64, t: f64) -> f64 {
        (self.potential)(x, t)
    }

    pub fn vector_potential_at(&self, t: f64) -> f64 {
        (self.vector_potential)(t)
    }

    /// `max_k (k - A)^2 / 2 + max_x |U|` at time `t`.
    pub fn spectral_radius_estimate(&self, t: f64) -> f64 {
        let a = self.vector_potential_at(t);
        let n = self.grid.count();
        let period = self.grid.period();
        let kinetic = (0..n)
            .map(|j| {
                let k = fft::wavenumber(j, n, period);
                0.5 * (k - a) * (k - a)
            })
            .fold(0.0, f64::max);
        let u = self.grid.points().map(|x| self.potential_at(x, t).abs()).fold(0.0, f64::max);
        kinetic + u
    }
}

/// `H(t) psi`.
pub fn hamiltonian_apply(setup: &TdseSetup, psi: &GridFunction, t: f64) -> Result<GridFunction> {
    if !psi.grid().matches(&setup.grid) {
        return Err(Error::GridMismatch);
    }
    let n = setup.grid.count();
    let period = setup.grid.period();
    let a = setup.vector_potential_at(t);
    let mut coeffs = psi.values().to_vec();
    fft::transform(&mut coeffs, Direction::Forward);
    let norm = 1.0 / n as f64;
    for (j, c) in coeffs.iter_mut().enumerate() {
        let k = fft::wavenumber(j, n, period);
        *c *= 0.5 * (k - a) * (k - a) * norm;
    }
    fft::transform(&mut coeffs, Direction::Inverse);
    for (i, (c, x)) in coeffs.iter_mut().zip(setup.grid.points()).enumerate() {
        *c += psi[i] * setup.potential_at(x, t);
    }
    GridFunction::new(setup.grid, coeffs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorStep {
    pub dt: f64,
    pub n_terms: usize,
    pub quadrature_nodes: usize,
}

impl PropagatorStep {
    /// Uses `n_terms + 1` sub-nodes.
    pub fn new(dt: f64, n_terms: usize) -> Result<Self> {
        Self::with_nodes(dt, n_terms, n_terms + 1)
    }

    pub fn with_nodes(dt: f64, n_terms: usize, quadrature_nodes: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(invalid("dt must be positive"));
        }
        if n_terms < 1 {
            return Err(invalid("n_terms must be at least 1"));
        }
        if !(2..=16).contains(&quadrature_nodes) {
            return Err(invalid("quadrature_nodes must be between 2 and 16"));
        }
        Ok(PropagatorStep { dt, n_terms, quadrature_nodes })
    }
}

/// `W[j][l] = int_0^{s_j} L_l(s) ds` for the Lagrange basis on `s_l = l/(q-1)`.
pub(crate) fn cumulative_weights(q: usize) -> Vec<Vec<f64>> {
    let nodes: Vec<f64> = (0..q).map(|l| l as f64 / (q - 1) as f64).collect();
    let mut w = alloc::vec![alloc::vec![0.0; q]; q];
    for l in 0..q {
        // monomial coefficients of L_l, lowest degree first
        let mut poly = alloc::vec![1.0];
        for (m, &sm) in nodes.iter().enumerate() {
            if m == l {
                continue;
            }
            let scale = 1.0 / (nodes[l] - sm);
            let mut next = alloc::vec![0.0; poly.len() + 1];
            for (d, &c) in poly.iter().enumerate() {
                next[d + 1] += c * scale;
                next[d] -= c * sm * scale;
            }
            poly = next;
        }
        for (j, &sj) in nodes.iter().enumerate() {
            let mut acc = 0.0;
            let mut p = sj;
            for (d, &c) in poly.iter().enumerate() {
                acc += c * p / (d + 1) as f64;
                p *= sj;
            }
            w[j][l] = acc;
        }
    }
    w
}

/// One step `psi(t) -> psi(t + dt)`.
pub fn cod_step(
    setup: &TdseSetup,
    step: &PropagatorStep,
    psi: &GridFunction,
    t: f64,
) -> Result<GridFunction> {
    let q = step.quadrature_nodes;
    let weights = cumulative_weights(q);
    step_with_weights(setup, step, &weights, psi, t)
}

fn step_with_weights(
    setup: &TdseSetup,
    step: &PropagatorStep,
    weights: &[Vec<f64>],
    psi: &GridFunction,
    t: f64,
) -> Result<GridFunction> {
    let q = step.quadrature_nodes;
    let dt = step.dt;
    let times: Vec<f64> = (0..q).map(|j| t + dt * j as f64 / (q - 1) as f64).collect();
    let mut result = psi.clone();
    let mut term: Vec<GridFunction> = alloc::vec![psi.clone(); q];
    let minus_i_dt = C64::new(0.0, -dt);
    for n in 1..=step.n_terms {
        let integrand: Vec<GridFunction> = term
            .iter()
            .zip(&times)
            .map(|(f, &tau)| hamiltonian_apply(setup, f, tau))
            .collect::<Result<_>>()?;
        for (j, slot) in term.iter_mut().enumerate() {
            let out = slot.values_mut();
            out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            for (l, g) in integrand.iter().enumerate() {
                let w = minus_i_dt * weights[j][l];
                for (o, &gv) in out.iter_mut().zip(g.values()) {
                    *o += w * gv;
                }
            }
        }
        let end = &term[q - 1];
        for (r, &v) in result.values_mut().iter_mut().zip(end.values()) {
            *r += v;
        }
        if !end.values().iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::BlowUp { term: n });
        }
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub norm: f64,
    pub drift: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PropagationReport {
    pub records: Vec<StepRecord>,
    pub max_drift: f64,
    pub warnings: Vec<String>,
}

/// Number of whole steps of length `dt` in `t_final`.
pub fn step_count(t_final: f64, dt: f64) -> Result<usize> {
    if !(t_final > 0.0) {
        return Err(invalid("t_final must be positive"));
    }
    let n = (t_final / dt).round();
    if n < 1.0 || (n * dt - t_final).abs() > 1e-9 * t_final.max(dt) {
        return Err(invalid("t_final must be a multiple of dt"));
    }
    Ok(n as usize)
}

/// Repeated [`cod_step`] from `t = 0` to `t_final`.
pub fn propagate(
    setup: &TdseSetup,
    step: &PropagatorStep,
    t_final: f64,
) -> Result<(GridFunction, PropagationReport)> {
    propagate_observed(setup, step, t_final, |_, _| {})
}

/// As [`propagate`], calling `observe(record, psi)` after every step.
pub fn propagate_observed(
    setup: &TdseSetup,
    step: &PropagatorStep,
    t_final: f64,
    mut observe: impl FnMut(&StepRecord, &GridFunction),
) -> Result<(GridFunction, PropagationReport)> {
    let n_steps = step_count(t_final, step.dt)?;
    let mut report = PropagationReport::default();
    let rho = setup.spectral_radius_estimate(0.0);
    if step.dt * rho >= 1.0 {
        report.warnings.push(format!(
            "dt * spectral radius = {:.3} >= 1; high modes are outside the accurate range",
            step.dt * rho
        ));
    }
    let weights = cumulative_weights(step.quadrature_nodes);
    let mut psi = setup.psi0.clone();
    for s in 1..=n_steps {
        let t0 = (s - 1) as f64 * step.dt;
        psi = step_with_weights(setup, step, &weights, &psi, t0)?;
        let norm = psi.norms().l2;
        let drift = (norm - 1.0).abs();
        let record = StepRecord { step: s, t: s as f64 * step.dt, norm, drift };
        report.max_drift = report.max_drift.max(drift);
        observe(&record, &psi);
        report.records.push(record);
        if !(drift <= MAX_NORM_DRIFT) {
            return Err(Error::Unstable { step: s, drift });
        }
    }
    Ok((psi, report))
}

/// `<x>` of a state on a grid centred so that the packet does not wrap.
pub fn mean_position(psi: &GridFunction) -> f64 {
    let h = psi.grid().step();
    let weight: f64 = psi.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * h;
    let first: f64 = psi
        .grid()
        .points()
        .zip(psi.values())
        .map(|(x, v)| x * v.norm_sqr())
        .sum::<f64>()
        * h;
    first / weight
}
