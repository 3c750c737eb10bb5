use alloc::string::String;
use core::fmt;

/// Errors reported by the solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grid parameters violate `step > 0`, `count >= 2` or are not finite.
    InvalidGrid(&'static str),
    /// An integration limit does not coincide with a grid point.
    LimitNotOnGrid { limit: f64 },
    /// Two operands live on different grids.
    GridMismatch,
    /// Not enough samples for the requested stencil.
    TooFewPoints { needed: usize, got: usize },
    /// A series term contained NaN or infinity.
    BlowUp { term: usize },
    /// The source-driven series needs the inverse of `G`.
    MissingInverse,
    /// `G psi_g` is not zero within the construction tolerance.
    GeneratingNotAnnihilated { residual: f64, tol: f64 },
    /// A parameter is out of its admissible range.
    InvalidParameter(String),
    /// `lambda^2 + m^2 = 0` in the exponential-potential resolvent.
    OnShellPole,
    /// `2E = k^2` for some grid wavenumber.
    OnShellMode { index: usize },
    /// `m = 0` makes the exponential-potential product undefined.
    ZeroEnergy,
    /// TDSE norm drift exceeded the abort threshold.
    Unstable { step: usize, drift: f64 },
    /// Leapfrog time step exceeds the stability limit.
    CflViolation { dt: f64, limit: f64 },
    /// A dense linear solve hit a zero pivot.
    SingularMatrix,
    /// A result contained NaN or infinity.
    NonFinite,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGrid(why) => write!(f, "invalid grid: {why}"),
            Error::LimitNotOnGrid { limit } => write!(f, "limit not on grid: {limit}"),
            Error::GridMismatch => write!(f, "grid mismatch"),
            Error::TooFewPoints { needed, got } => {
                write!(f, "too few grid points: need {needed}, got {got}")
            }
            Error::BlowUp { term } => write!(f, "series blow-up at term {term}"),
            Error::MissingInverse => write!(f, "scheme has no inverse operator for the source term"),
            Error::GeneratingNotAnnihilated { residual, tol } => write!(
                f,
                "generating function is not annihilated: |G psi_g| = {residual:e} > {tol:e}"
            ),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::OnShellPole => write!(f, "on-shell pole"),
            Error::OnShellMode { index } => write!(f, "on-shell mode at index {index}"),
            Error::ZeroEnergy => write!(f, "zero-energy degenerate"),
            Error::Unstable { step, drift } => {
                write!(f, "propagation unstable at step {step}: norm drift {drift:e}")
            }
            Error::CflViolation { dt, limit } => {
                write!(f, "CFL violation: dt = {dt:e} exceeds {limit:e}")
            }
            Error::SingularMatrix => write!(f, "singular matrix"),
            Error::NonFinite => write!(f, "non-finite value"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: &str) -> Error {
    Error::InvalidParameter(String::from(msg))
}
