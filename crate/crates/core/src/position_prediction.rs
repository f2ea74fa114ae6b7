//! Pairwise position prediction under the multiplicative model `P(t) = M·e^{a·t}`.
//!
//! Two samples of such a model determine the value halfway between them
//! (their geometric mean) and at the next equidistant instant (the next term
//! of the geometric progression), without knowing `M` or `a`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum PredictError {
    #[error("positions must be positive and finite (got {0})")]
    NonPositivePosition(f64),
    #[error("time instants must be finite")]
    NonFiniteTime,
    #[error("the two samples share the time instant {0}")]
    EqualTimes(f64),
    #[error("time instants must be positive and finite (got {0})")]
    NonPositiveTime(f64),
}

impl PredictError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::NonPositivePosition(_) => "non_positive_position",
            Self::NonFiniteTime => "non_finite_time",
            Self::EqualTimes(_) => "equal_times",
            Self::NonPositiveTime(_) => "non_positive_time",
        }
    }
}

fn to_f64<T: Real>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Position `p` of an element at instant `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionSample<T> {
    pub t: T,
    pub p: T,
}

impl<T: Real> PositionSample<T> {
    pub fn new(t: T, p: T) -> Result<Self, PredictError> {
        if !t.is_finite() {
            return Err(PredictError::NonFiniteTime);
        }
        if !(p.is_finite() && p > T::zero()) {
            return Err(PredictError::NonPositivePosition(to_f64(p)));
        }
        Ok(Self { t, p })
    }
}

fn check_pair<T: Real>(s1: &PositionSample<T>, s2: &PositionSample<T>) -> Result<(), PredictError> {
    for s in [s1, s2] {
        PositionSample::new(s.t, s.p)?;
    }
    if s1.t == s2.t {
        return Err(PredictError::EqualTimes(to_f64(s1.t)));
    }
    Ok(())
}

/// `((t₁ + t₂)/2, √(p₁·p₂))`.
pub fn predict_midway<T: Real>(
    s1: &PositionSample<T>,
    s2: &PositionSample<T>,
) -> Result<PositionSample<T>, PredictError> {
    check_pair(s1, s2)?;
    let half = T::lit(0.5);
    Ok(PositionSample {
        t: (s1.t + s2.t) * half,
        p: geometric_mean(s1.p, s2.p),
    })
}

/// Next equidistant instant `2·t₂ − t₁` with position `p₂²/p₁`.
pub fn predict_extrapolated<T: Real>(
    s1: &PositionSample<T>,
    s2: &PositionSample<T>,
) -> Result<PositionSample<T>, PredictError> {
    check_pair(s1, s2)?;
    Ok(PositionSample {
        t: s2.t + (s2.t - s1.t),
        p: s2.p * (s2.p / s1.p),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Means<T> {
    pub am: T,
    pub hm: T,
    /// `√(am·hm)`
    pub gm: T,
}

/// Arithmetic and harmonic means of two instants; their product is `t₁·t₂`,
/// so `√(am·hm)` is the geometric mean.
pub fn am_hm_gm<T: Real>(t1: T, t2: T) -> Result<Means<T>, PredictError> {
    for t in [t1, t2] {
        if !(t.is_finite() && t > T::zero()) {
            return Err(PredictError::NonPositiveTime(to_f64(t)));
        }
    }
    let two = T::lit(2.0);
    let am = (t1 + t2) / two;
    let hm = two / (t1.recip() + t2.recip());
    let gm = geometric_mean(am, hm);
    debug_assert!(
        (gm - geometric_mean(t1, t2)).abs() <= T::epsilon() * T::lit(16.0) * gm,
        "AM·HM identity violated for ({t1}, {t2})"
    );
    Ok(Means { am, hm, gm })
}

/// `√(x·y)` for positive `x`, `y`, falling back to `√x·√y` when the product
/// leaves the normal range.
pub fn geometric_mean<T: Real>(x: T, y: T) -> T {
    let prod = x * y;
    if prod.is_normal() {
        prod.sqrt()
    } else {
        x.sqrt() * y.sqrt()
    }
}
