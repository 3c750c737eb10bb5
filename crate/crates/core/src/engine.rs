//! Generic COD iteration.
//!
//! A [`CodScheme`] supplies the cycle map `G^-1 V`, the generating function
//! `psi_g` (with `G psi_g = 0`) and the operators `V` and `D = G - V` used
//! for residual checks. [`run_cod`] accumulates
//! `S_N = sum_{n=0}^{N} (G^-1 V)^n psi_g` with `term_0 = psi_g`.
//!
//! For any truncation the residual telescopes:
//! `D S_N = -V (G^-1 V)^N psi_g`, so the defect of a run is controlled by the
//! last term alone.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::C64;
#[allow(unused_imports)]
use num_traits::Float;

/// Vector-space operations the engine needs from a field representation.
pub trait Field: Clone {
    fn sup_norm(&self) -> f64;
    fn is_finite(&self) -> bool;
    /// `self += a * x`.
    fn axpy(&mut self, a: C64, x: &Self);
    fn zeros_like(&self) -> Self;
}

/// Component choice `D = G - V` together with the generating function.
pub trait CodScheme {
    type Field: Field;

    fn label(&self) -> &str;

    /// `psi_g`, annihilated by `G`.
    fn generating(&self) -> &Self::Field;

    /// One application of `G^-1 V`.
    fn cycle_map(&self, f: &Self::Field) -> Result<Self::Field>;

    /// Action of `V`.
    fn potential(&self, f: &Self::Field) -> Result<Self::Field>;

    /// Action of `D = G - V`.
    fn defect_op(&self, f: &Self::Field) -> Result<Self::Field>;

    /// Action of `G^-1`, when the scheme supports a source term.
    fn g_inverse(&self, _f: &Self::Field) -> Option<Result<Self::Field>> {
        None
    }
}

/// Sup norm of `G psi_g`, computed as `(D + V) psi_g`.
pub fn generating_residual<S: CodScheme + ?Sized>(scheme: &S) -> Result<f64> {
    let g = scheme.generating();
    let mut r = scheme.defect_op(g)?;
    r.axpy(C64::new(1.0, 0.0), &scheme.potential(g)?);
    Ok(r.sup_norm())
}

/// Fails unless `|G psi_g| <= tol`.
pub fn check_generating<S: CodScheme + ?Sized>(scheme: &S, tol: f64) -> Result<()> {
    let residual = generating_residual(scheme)?;
    if residual <= tol {
        Ok(())
    } else {
        Err(Error::GeneratingNotAnnihilated { residual, tol })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxTerms,
    DivergenceDetected,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::MaxTerms => "max_terms",
            StopReason::DivergenceDetected => "divergence_detected",
        }
    }
}

impl core::fmt::Display for StopReason {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// When to stop accumulating terms.
///
/// Converged: two consecutive terms with sup norm `<= tol * (1 + |S|_sup)`.
/// Diverging: `|term_n| >= divergence_factor * |term_{n - divergence_window}|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopPolicy {
    pub tol: f64,
    pub max_terms: usize,
    pub divergence_window: usize,
    pub divergence_factor: f64,
}

impl StopPolicy {
    pub fn new(tol: f64, max_terms: usize) -> Result<Self> {
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(invalid("tol must be positive"));
        }
        if max_terms < 1 {
            return Err(invalid("max_terms must be at least 1"));
        }
        Ok(StopPolicy { tol, max_terms, divergence_window: 5, divergence_factor: 10.0 })
    }

    /// `n` terms after `psi_g` with divergence detection off. Stops early only
    /// when terms vanish identically.
    pub fn fixed_terms(n: usize) -> Result<Self> {
        let mut p = StopPolicy::new(f64::MIN_POSITIVE, n)?;
        p.divergence_window = usize::MAX;
        Ok(p)
    }

    pub fn with_divergence(mut self, window: usize, factor: f64) -> Self {
        self.divergence_window = window.max(1);
        self.divergence_factor = factor;
        self
    }
}

impl Default for StopPolicy {
    fn default() -> Self {
        StopPolicy { tol: 1e-12, max_terms: 100, divergence_window: 5, divergence_factor: 10.0 }
    }
}

/// A truncated realization of the series.
#[derive(Debug, Clone)]
pub struct SeriesRun<F> {
    pub label: String,
    pub partial_sum: F,
    pub last_term: F,
    /// Sup norms of `term_0 ..= term_N`.
    pub term_sup_norms: Vec<f64>,
    pub terms_used: usize,
    pub stop_reason: StopReason,
    /// Source `phi` of a `D psi = phi` run; subtracted in [`defect`].
    pub source: Option<F>,
}

/// Iterator over `term_0 = seed, term_{n+1} = cycle_map(term_n)`.
pub struct Terms<'a, S: CodScheme + ?Sized> {
    scheme: &'a S,
    current: Option<S::Field>,
    index: usize,
    started: bool,
}

impl<S: CodScheme + ?Sized> Iterator for Terms<'_, S> {
    type Item = Result<S::Field>;

    fn next(&mut self) -> Option<Self::Item> {
        let next = if self.started {
            let prev = self.current.as_ref()?;
            self.index += 1;
            match self.scheme.cycle_map(prev) {
                Ok(f) => f,
                Err(e) => {
                    self.current = None;
                    return Some(Err(e));
                }
            }
        } else {
            self.started = true;
            self.current.clone()?
        };
        if !next.is_finite() {
            self.current = None;
            return Some(Err(Error::BlowUp { term: self.index }));
        }
        self.current = Some(next.clone());
        Some(Ok(next))
    }
}

/// Terms of the series starting from `psi_g`.
pub fn terms<S: CodScheme + ?Sized>(scheme: &S) -> Terms<'_, S> {
    terms_from(scheme, scheme.generating().clone())
}

/// Terms of the series starting from an arbitrary seed.
pub fn terms_from<S: CodScheme + ?Sized>(scheme: &S, seed: S::Field) -> Terms<'_, S> {
    Terms { scheme, current: Some(seed), index: 0, started: false }
}

/// Sums `[I + sum (G^-1 V)^n] psi_g` under `policy`.
pub fn run_cod<S: CodScheme + ?Sized>(scheme: &S, policy: &StopPolicy) -> Result<SeriesRun<S::Field>> {
    accumulate(scheme, scheme.generating().clone(), None, policy)
}

/// Sums `[I + sum (G^-1 V)^n] (psi_g + G^-1 phi)`, the particular solution of
/// `D psi = phi`.
pub fn run_cod_with_source<S: CodScheme + ?Sized>(
    scheme: &S,
    source: &S::Field,
    policy: &StopPolicy,
) -> Result<SeriesRun<S::Field>> {
    let mut seed = scheme.generating().clone();
    let particular = scheme.g_inverse(source).ok_or(Error::MissingInverse)??;
    seed.axpy(C64::new(1.0, 0.0), &particular);
    accumulate(scheme, seed, Some(source.clone()), policy)
}

fn accumulate<S: CodScheme + ?Sized>(
    scheme: &S,
    seed: S::Field,
    source: Option<S::Field>,
    policy: &StopPolicy,
) -> Result<SeriesRun<S::Field>> {
    if !seed.is_finite() {
        return Err(Error::BlowUp { term: 0 });
    }
    let mut partial = seed.clone();
    let mut norms = Vec::with_capacity(policy.max_terms.min(1024) + 1);
    norms.push(seed.sup_norm());
    let mut last = seed.clone();
    let mut small_streak = 0;
    let mut stop = StopReason::MaxTerms;

    let mut it = terms_from(scheme, seed);
    it.next(); // term_0 is already in `partial`
    for n in 1..=policy.max_terms {
        let term = match it.next() {
            Some(t) => t?,
            None => break,
        };
        partial.axpy(C64::new(1.0, 0.0), &term);
        if !partial.is_finite() {
            return Err(Error::BlowUp { term: n });
        }
        let norm = term.sup_norm();
        norms.push(norm);
        last = term;

        if norm <= policy.tol * (1.0 + partial.sup_norm()) {
            small_streak += 1;
        } else {
            small_streak = 0;
        }
        if small_streak >= 2 {
            stop = StopReason::Converged;
            break;
        }
        let w = policy.divergence_window;
        if n >= w {
            let earlier = norms[n - w];
            if earlier > 0.0 && norm >= policy.divergence_factor * earlier {
                stop = StopReason::DivergenceDetected;
                break;
            }
        }
    }

    let terms_used = norms.len() - 1;
    Ok(SeriesRun {
        label: String::from(scheme.label()),
        partial_sum: partial,
        last_term: last,
        term_sup_norms: norms,
        terms_used,
        stop_reason: stop,
        source,
    })
}

/// `D S_N`, minus the source for source-driven runs.
pub fn defect<S: CodScheme + ?Sized>(scheme: &S, run: &SeriesRun<S::Field>) -> Result<S::Field> {
    let mut d = scheme.defect_op(&run.partial_sum)?;
    if let Some(src) = &run.source {
        d.axpy(C64::new(-1.0, 0.0), src);
    }
    Ok(d)
}

/// `-V term_N`, the exact residual predicted by the telescoping identity.
pub fn telescoped_defect<S: CodScheme + ?Sized>(
    scheme: &S,
    run: &SeriesRun<S::Field>,
) -> Result<S::Field> {
    let v = scheme.potential(&run.last_term)?;
    let mut out = v.zeros_like();
    out.axpy(C64::new(-1.0, 0.0), &v);
    Ok(out)
}

/// Discrete check of the telescoping identity for an `n_terms`-term run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TelescopingCheck {
    /// `sup |D S_N + V term_N|`.
    pub gap: f64,
    /// `sum_{n<N} sup |(D + V) V term_n|`, the size of the second derivative
    /// that the discrete `D G^-1 - I` leaves behind at order `step^2`.
    pub curvature: f64,
}

pub fn telescoping_check<S: CodScheme + ?Sized>(scheme: &S, n_terms: usize) -> Result<TelescopingCheck> {
    let run = run_cod(scheme, &StopPolicy::fixed_terms(n_terms)?)?;
    let mut gap = defect(scheme, &run)?;
    gap.axpy(C64::new(-1.0, 0.0), &telescoped_defect(scheme, &run)?);
    let mut curvature = 0.0;
    for term in terms(scheme).take(n_terms) {
        let v = scheme.potential(&term?)?;
        let mut g = scheme.defect_op(&v)?;
        g.axpy(C64::new(1.0, 0.0), &scheme.potential(&v)?);
        curvature += g.sup_norm();
    }
    Ok(TelescopingCheck { gap: gap.sup_norm(), curvature })
}
