//! Cyclic operator decomposition (COD) series solvers.
//!
//! A linear problem `D psi = 0` is split as `D = G - V`, where `G` has a known
//! inverse and a non-trivial kernel element `psi_g` (the generating function).
//! The solution is then the series
//!
//! ```text
//! psi = [I + G^-1 V + (G^-1 V)^2 + ...] psi_g
//! ```
//!
//! evaluated term by term with the recurrence `term_{n+1} = G^-1 V term_n`.
//!
//! The crate is `no_std` and only needs `alloc`. It provides:
//!
//! - [`grid`]: uniform grids, cumulative trapezoid integration, finite
//!   differences, norms and the discrete Fourier transform.
//! - [`engine`]: the generic series iteration with stop policy, divergence
//!   detection and defect (residual) evaluation.
//! - [`oscillator`]: `f'' + w^2(t) f = 0` Cauchy problems, the factorial term
//!   bound and the closed-form `w^2 = -t^alpha` power series.
//! - [`schrodinger_exp`]: closed-form series for the exponential potential.
//! - [`spectral`]: periodic 1D/2D fields, the Fourier inverse Laplacian and the
//!   resolvent `(2E + Laplacian)^-1`.
//! - [`tdse`]: short-step propagator for the time-dependent Schrodinger equation.
//! - [`wave`]: the wave equation in a static dispersive medium.
//! - [`oracles`]: independent reference solvers (RK4, Crank-Nicolson,
//!   leapfrog) used only for validation.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod engine;
pub mod error;
pub mod fft;
pub mod grid;
pub mod oracles;
pub mod oscillator;
pub mod schrodinger_exp;
pub mod spectral;
pub mod tdse;
pub mod wave;

pub use engine::{CodScheme, Field, SeriesRun, StopPolicy, StopReason};
pub use error::{Error, Result};
pub use grid::{Grid, GridFunction};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;
