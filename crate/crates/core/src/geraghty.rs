//! Catalog of Geraghty comparison functions `beta: [0, inf) -> [0, 1)`.
//!
//! The built-in families carry an analytic certificate for the class condition
//! "`beta(t_n) -> 1` forces `t_n -> 0`": a constant never approaches 1, and
//! `1/(1+t)` and `exp(-t)` approach 1 only as `t -> 0`. User functions get a
//! sampled codomain check at construction; the class condition itself
//! quantifies over all sequences and is not testable numerically, so user
//! functions are never reported as certified.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Function type for user-supplied comparison functions.
pub type UserBetaFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A comparison function from the Geraghty catalog.
#[derive(Clone)]
pub enum GeraghtyFn {
    /// `beta(t) = c` with `c` in (0, 1).
    Constant(f64),
    /// `beta(t) = 1 / (1 + t)`.
    Reciprocal1Plus,
    /// `beta(t) = exp(-t)`.
    ExpDecay,
    /// Caller-supplied function, codomain-checked on construction only.
    UserFn { label: String, f: UserBetaFn },
}

impl fmt::Debug for GeraghtyFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeraghtyFn::Constant(c) => write!(f, "Constant({c})"),
            GeraghtyFn::Reciprocal1Plus => write!(f, "Reciprocal1Plus"),
            GeraghtyFn::ExpDecay => write!(f, "ExpDecay"),
            GeraghtyFn::UserFn { label, .. } => write!(f, "UserFn({label})"),
        }
    }
}

/// Number of samples used for the construction-time codomain check.
const USER_FN_SANITY_SAMPLES: usize = 1000;

impl GeraghtyFn {
    /// Constant factor `c`, validated to lie in (0, 1).
    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "constant beta must lie in (0, 1), got {c}"
            )));
        }
        Ok(GeraghtyFn::Constant(c))
    }

    /// Wraps a user function after a sampled codomain check.
    pub fn user(label: impl Into<String>, f: UserBetaFn) -> Result<Self> {
        let beta = GeraghtyFn::UserFn {
            label: label.into(),
            f,
        };
        beta_sanity(&beta, USER_FN_SANITY_SAMPLES)?;
        Ok(beta)
    }

    /// Evaluates the function at `t >= 0`.
    pub fn eval(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0, "beta arguments are distances");
        match self {
            GeraghtyFn::Constant(c) => *c,
            GeraghtyFn::Reciprocal1Plus => 1.0 / (1.0 + t),
            GeraghtyFn::ExpDecay => (-t).exp(),
            GeraghtyFn::UserFn { f, .. } => f(t),
        }
    }

    /// True for the built-in families whose class membership is analytic.
    pub fn is_certified(&self) -> bool {
        !matches!(self, GeraghtyFn::UserFn { .. })
    }
}

/// Report of a sampled codomain check.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaSanityReport {
    pub samples: usize,
    pub certified: bool,
    /// Largest value observed over the sample set.
    pub max_value: f64,
}

/// Asserts `0 <= beta(t) < 1` on log-spaced `t` from `1e-6` up to `1e6`.
///
/// The samples approach but never hit `t = 0`: the reciprocal and exponential
/// families have the removable boundary value 1 there, which is immaterial
/// because every contraction inequality is vacuous at distance 0. The floor
/// sits where `1 + t^2` is still distinguishable from 1 in double precision.
///
/// Returns [`Error::OutOfRange`] naming the violating sample. For built-in
/// families the report additionally carries the analytic certificate flag.
pub fn beta_sanity(beta: &GeraghtyFn, samples: usize) -> Result<BetaSanityReport> {
    assert!(samples >= 1, "at least one sample required");
    let lo: f64 = 1e-6_f64.ln();
    let hi: f64 = 1e6_f64.ln();
    let mut max_value = f64::NEG_INFINITY;
    for i in 0..samples {
        let frac = if samples == 1 {
            0.0
        } else {
            i as f64 / (samples - 1) as f64
        };
        let t = (lo + frac * (hi - lo)).exp();
        let value = beta.eval(t);
        if !(0.0..1.0).contains(&value) || !value.is_finite() {
            return Err(Error::OutOfRange { t, value });
        }
        max_value = max_value.max(value);
    }
    Ok(BetaSanityReport {
        samples,
        certified: beta.is_certified(),
        max_value,
    })
}
