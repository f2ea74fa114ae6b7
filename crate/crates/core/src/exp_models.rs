//! Exponential node-count models and their fitting.
//!
//! | kind             | value at `t`           | ODE                |
//! |------------------|------------------------|--------------------|
//! | `Growth`         | `y₀·e^{k·t}`           | `ẏ = k·y`          |
//! | `Decay`          | `y₀·e^{−k·t}`          | `ẏ = −k·y`         |
//! | `ModifiedGrowth` | `N·(1 − e^{−k·t})`     | `ṅ = k·(N − n)`    |
//!
//! Growth and decay are fitted by regressing `ln y` on `t` with
//! [`fit_vertical`]; the saturating model by a through-origin fit of
//! `ln(1 − y/N)` against `t`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve_fit::{fit_vertical, PointSet};
use crate::geometry::Point2D;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExpError {
    #[error("scale must be positive and finite")]
    BadScale,
    #[error("rate must be positive and finite")]
    BadRate,
    #[error("t must be finite")]
    NonFiniteTime,
    #[error("value overflows at t = {t}")]
    Overflow { t: f64 },
    #[error("need at least 2 samples (got {0})")]
    TooFewSamples(usize),
    #[error("sample times must be finite and strictly increasing (violated at index {0})")]
    UnorderedTimes(usize),
    #[error("sample {index} has y = {y}; growth/decay fitting needs y > 0")]
    NonPositive { index: usize, y: f64 },
    #[error("sample {index} has y = {y} < 0")]
    Negative { index: usize, y: f64 },
    #[error("sample {index} has y = {y} >= capacity {capacity}; saturation is not representable")]
    Saturated { index: usize, y: f64, capacity: f64 },
    #[error("fitted rate is zero (scale {scale}); the series is neither growing nor decaying")]
    ZeroRate { scale: f64 },
    #[error("no sample has t != 0; the through-origin rate is undefined")]
    NoTimeSpread,
    #[error("tolerance must be positive")]
    BadTolerance,
}

impl ExpError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::BadScale | Self::BadRate | Self::NonFiniteTime | Self::BadTolerance => {
                "invalid_parameter"
            }
            Self::Overflow { .. } => "overflow",
            Self::TooFewSamples(_) | Self::UnorderedTimes(_) => "invalid_series",
            Self::NonPositive { .. } | Self::Negative { .. } => "invalid_value",
            Self::Saturated { .. } => "saturated",
            Self::ZeroRate { .. } => "zero_rate",
            Self::NoTimeSpread => "degenerate_time",
        }
    }
}

fn to_f64<T: Real>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpKind {
    Growth,
    Decay,
    ModifiedGrowth,
}

impl ExpKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Growth => "growth",
            Self::Decay => "decay",
            Self::ModifiedGrowth => "modified-growth",
        }
    }
}

impl std::str::FromStr for ExpKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "growth" => Ok(Self::Growth),
            "decay" => Ok(Self::Decay),
            "modified" | "modified-growth" => Ok(Self::ModifiedGrowth),
            other => Err(format!("unknown model kind '{other}'")),
        }
    }
}

/// One of the three models. The sign of the exponent lives in `kind`, so
/// `rate` is always positive. `scale` is `y₀`, or the capacity `N` for
/// `ModifiedGrowth`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpModel<T> {
    pub kind: ExpKind,
    pub scale: T,
    pub rate: T,
}

impl<T: Real> ExpModel<T> {
    pub fn new(kind: ExpKind, scale: T, rate: T) -> Result<Self, ExpError> {
        if !(scale.is_finite() && scale > T::zero()) {
            return Err(ExpError::BadScale);
        }
        if !(rate.is_finite() && rate > T::zero()) {
            return Err(ExpError::BadRate);
        }
        Ok(Self { kind, scale, rate })
    }

    pub fn growth(scale: T, rate: T) -> Result<Self, ExpError> {
        Self::new(ExpKind::Growth, scale, rate)
    }

    pub fn decay(scale: T, rate: T) -> Result<Self, ExpError> {
        Self::new(ExpKind::Decay, scale, rate)
    }

    pub fn modified_growth(capacity: T, rate: T) -> Result<Self, ExpError> {
        Self::new(ExpKind::ModifiedGrowth, capacity, rate)
    }

    pub fn evaluate(&self, t: T) -> Result<T, ExpError> {
        evaluate(self, t)
    }

    /// Time derivative at `t`.
    pub fn slope(&self, t: T) -> Result<T, ExpError> {
        let v = match self.kind {
            ExpKind::Growth => self.rate * self.evaluate(t)?,
            ExpKind::Decay => -self.rate * self.evaluate(t)?,
            ExpKind::ModifiedGrowth => self.rate * self.scale * (-self.rate * t).exp(),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExpError::Overflow { t: to_f64(t) })
        }
    }
}

pub fn evaluate<T: Real>(model: &ExpModel<T>, t: T) -> Result<T, ExpError> {
    if !t.is_finite() {
        return Err(ExpError::NonFiniteTime);
    }
    let v = match model.kind {
        ExpKind::Growth => model.scale * (model.rate * t).exp(),
        ExpKind::Decay => model.scale * (-model.rate * t).exp(),
        // -expm1(-kt) = 1 - e^{-kt} without cancellation near t = 0
        ExpKind::ModifiedGrowth => -model.scale * (-model.rate * t).exp_m1(),
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ExpError::Overflow { t: to_f64(t) })
    }
}

/// `(t, y)` samples with strictly increasing finite `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries<T> {
    samples: Vec<(T, T)>,
}

impl<T: Real> TimeSeries<T> {
    pub fn new(samples: Vec<(T, T)>) -> Result<Self, ExpError> {
        if samples.len() < 2 {
            return Err(ExpError::TooFewSamples(samples.len()));
        }
        for (i, &(t, _)) in samples.iter().enumerate() {
            if !t.is_finite() || (i > 0 && t <= samples[i - 1].0) {
                return Err(ExpError::UnorderedTimes(i));
            }
        }
        Ok(Self { samples })
    }

    /// Samples `model` at each of `times`.
    pub fn from_model(model: &ExpModel<T>, times: &[T]) -> Result<Self, ExpError> {
        let samples = times
            .iter()
            .map(|&t| Ok((t, evaluate(model, t)?)))
            .collect::<Result<Vec<_>, ExpError>>()?;
        Self::new(samples)
    }

    pub fn samples(&self) -> &[(T, T)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Fits `ln y = ln y₀ + k·t` and returns `Growth` for `k > 0`, `Decay` for
/// `k < 0`. A slope that is zero to within rounding yields [`ExpError::ZeroRate`].
pub fn fit_growth_decay<T: Real>(series: &TimeSeries<T>) -> Result<ExpModel<T>, ExpError> {
    let mut logs = Vec::with_capacity(series.len());
    for (index, &(t, y)) in series.samples().iter().enumerate() {
        if !(y.is_finite() && y > T::zero()) {
            return Err(ExpError::NonPositive {
                index,
                y: to_f64(y),
            });
        }
        logs.push(Point2D::new(t, y.ln()));
    }
    let points = PointSet::new(logs).expect("validated series yields a valid point set");
    let line = fit_vertical(&points).expect("strictly increasing times have x spread");
    let scale = line.intercept.exp();

    let samples = series.samples();
    let span = samples[samples.len() - 1].0 - samples[0].0;
    let log_mag = points
        .points()
        .iter()
        .fold(T::one(), |m, p| m.max(p.y.abs()));
    let noise_floor = T::epsilon() * T::lit(64.0) * log_mag;
    if (line.slope * span).abs() <= noise_floor {
        return Err(ExpError::ZeroRate {
            scale: to_f64(scale),
        });
    }
    let kind = if line.slope > T::zero() {
        ExpKind::Growth
    } else {
        ExpKind::Decay
    };
    ExpModel::new(kind, scale, line.slope.abs())
}

/// Fits `n = N·(1 − e^{−k·t})` for a known capacity `N`, forcing `n(0) = 0`:
/// `k = −Σ tᵢ·ln(1 − yᵢ/N) / Σ tᵢ²`.
pub fn fit_modified_growth<T: Real>(
    series: &TimeSeries<T>,
    capacity: T,
) -> Result<ExpModel<T>, ExpError> {
    if !(capacity.is_finite() && capacity > T::zero()) {
        return Err(ExpError::BadScale);
    }
    let (mut num, mut den) = (T::zero(), T::zero());
    for (index, &(t, y)) in series.samples().iter().enumerate() {
        if !(y.is_finite() && y >= T::zero()) {
            return Err(ExpError::Negative {
                index,
                y: to_f64(y),
            });
        }
        if y >= capacity {
            return Err(ExpError::Saturated {
                index,
                y: to_f64(y),
                capacity: to_f64(capacity),
            });
        }
        num += t * (-y / capacity).ln_1p();
        den += t * t;
    }
    if den <= T::zero() {
        return Err(ExpError::NoTimeSpread);
    }
    let rate = -num / den;
    if rate.is_nan() || rate <= T::zero() {
        return Err(ExpError::ZeroRate {
            scale: to_f64(capacity),
        });
    }
    ExpModel::modified_growth(capacity, rate)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveClass {
    GrowthCurve,
    DecayCurve,
    Neither,
}

/// Decides whether the probe `(t₃, P₃)` lies on the growth curve `M·e^{a·t}`
/// or the decay curve `M·e^{−a·t}` through the baseline, within relative
/// tolerance `tol`. When both match (near `t₃ = 0`) growth wins.
pub fn classify_curve<T: Real>(
    baseline_scale: T,
    baseline_rate: T,
    probe_t: T,
    probe_p: T,
    tol: T,
) -> Result<CurveClass, ExpError> {
    if !(tol.is_finite() && tol > T::zero()) {
        return Err(ExpError::BadTolerance);
    }
    if !(probe_p.is_finite() && probe_p > T::zero()) {
        return Err(ExpError::NonPositive {
            index: 0,
            y: to_f64(probe_p),
        });
    }
    let growth = ExpModel::growth(baseline_scale, baseline_rate)?.evaluate(probe_t)?;
    let decay = ExpModel::decay(baseline_scale, baseline_rate)?.evaluate(probe_t)?;
    Ok(if (probe_p - growth).abs() <= tol * growth {
        CurveClass::GrowthCurve
    } else if (probe_p - decay).abs() <= tol * decay {
        CurveClass::DecayCurve
    } else {
        CurveClass::Neither
    })
}

/// `steps + 1` evenly spaced `(t, value)` pairs on `[t1, t2]`, for plotting.
pub fn sample_curve<T: Real>(
    model: &ExpModel<T>,
    t1: T,
    t2: T,
    steps: usize,
) -> Result<Vec<(T, T)>, ExpError> {
    if !(t1.is_finite() && t2.is_finite()) {
        return Err(ExpError::NonFiniteTime);
    }
    let steps = steps.max(1);
    let dt = (t2 - t1) / T::from_usize_lossy(steps);
    (0..=steps)
        .map(|i| {
            let t = if i == steps {
                t2
            } else {
                t1 + dt * T::from_usize_lossy(i)
            };
            Ok((t, evaluate(model, t)?))
        })
        .collect()
}
