//! Seeded Monte Carlo estimation of π, areas under bounded curves and
//! expected in-region node counts.
//!
//! Every estimator is a pure function of its [`McConfig`]. With `streams > 1`
//! the samples are split across independent ChaCha8 streams (see [`crate::rng`])
//! evaluated in parallel; the per-stream acceptance counts are integers, so
//! their sum does not depend on scheduling.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point2D;
use crate::rng::{stream_rng, StreamRng};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error("samples must be at least 1")]
    NoSamples,
    #[error("streams must be in 1..=samples (got {streams} for {samples} samples)")]
    BadStreams { streams: u32, samples: u64 },
    #[error("domain must satisfy b1 < b2 with finite bounds (got [{b1}, {b2}])")]
    BadDomain { b1: f64, b2: f64 },
    #[error("height bound must be positive and finite (got {0})")]
    BadHeight(f64),
    #[error("polynomial needs at least one coefficient")]
    EmptyPolynomial,
    #[error("unknown builtin function '{0}'")]
    UnknownBuiltin(String),
    #[error("f({x}) = {value} lies outside [0, {height}]; the height bound is invalid")]
    FunctionOutOfBounds { x: f64, value: f64, height: f64 },
    #[error("total node count must be at least 1")]
    NoNodes,
}

/// Sample count, seed and stream count for one estimator run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub streams: u32,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self {
            samples,
            seed,
            streams: 1,
        }
    }

    pub fn with_streams(mut self, streams: u32) -> Self {
        self.streams = streams;
        self
    }

    pub fn validate(&self) -> Result<(), McError> {
        if self.samples == 0 {
            return Err(McError::NoSamples);
        }
        if self.streams == 0 || u64::from(self.streams) > self.samples {
            return Err(McError::BadStreams {
                streams: self.streams,
                samples: self.samples,
            });
        }
        Ok(())
    }

    /// Samples drawn by `stream`; the first `samples % streams` streams take one extra.
    fn stream_len(&self, stream: u32) -> u64 {
        let k = u64::from(self.streams);
        let base = self.samples / k;
        base + u64::from(u64::from(stream) < self.samples % k)
    }
}

/// Outcome of an acceptance-sampling run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate<T> {
    pub accepted: u64,
    pub total: u64,
    pub ratio: T,
    /// The ratio scaled by the bounding region's area.
    pub estimate: T,
    /// Binomial standard error of `estimate`.
    pub std_error: T,
}

impl<T: Real> McEstimate<T> {
    /// Builds the estimate for `accepted` of `total` samples inside a bounding
    /// region of area `scale`.
    pub fn from_counts(accepted: u64, total: u64, scale: T) -> Self {
        assert!(
            total > 0 && accepted <= total,
            "invalid counts {accepted}/{total}"
        );
        let n = T::from_u64(total).expect("sample count representable");
        let ratio = T::from_u64(accepted).expect("sample count representable") / n;
        let std_error = scale * (ratio * (T::one() - ratio) / n).sqrt();
        Self {
            accepted,
            total,
            ratio,
            estimate: ratio * scale,
            std_error,
        }
    }

    pub fn rejected(&self) -> u64 {
        self.total - self.accepted
    }
}

pub fn point_in_unit_circle<T: Real>(p: Point2D<T>) -> bool {
    p.norm_squared() <= T::one()
}

/// π estimate from an explicit list of points in `[-1, 1]²`.
pub fn estimate_pi_from_points<T: Real>(points: &[Point2D<T>]) -> McEstimate<T> {
    let accepted = points.iter().filter(|p| point_in_unit_circle(**p)).count() as u64;
    McEstimate::from_counts(accepted, points.len() as u64, T::lit(4.0))
}

fn uniform<T: Real>(rng: &mut StreamRng, lo: T, hi: T) -> T {
    let u: f64 = rng.gen();
    lo + (hi - lo) * T::lit(u)
}

/// Runs `body` once per stream and sums the acceptance counts. Errors are
/// reported for the lowest-numbered failing stream.
fn run_streams<F>(config: &McConfig, body: F) -> Result<u64, McError>
where
    F: Fn(&mut StreamRng, u64) -> Result<u64, McError> + Sync,
{
    config.validate()?;
    let one = |stream: u32| {
        let mut rng = stream_rng(config.seed, u64::from(stream));
        body(&mut rng, config.stream_len(stream))
    };
    if config.streams == 1 {
        return one(0);
    }
    let counts: Vec<Result<u64, McError>> = (0..config.streams).into_par_iter().map(one).collect();
    counts.into_iter().sum()
}

/// Uniform points on `[-1, 1]²`; the acceptance ratio estimates π/4.
pub fn estimate_pi<T: Real>(config: &McConfig) -> Result<McEstimate<T>, McError> {
    let accepted = run_streams(config, |rng, len| {
        let lo = -T::one();
        let hi = T::one();
        Ok((0..len)
            .filter(|_| {
                let x = uniform(rng, lo, hi);
                let y = uniform(rng, lo, hi);
                point_in_unit_circle(Point2D::new(x, y))
            })
            .count() as u64)
    })?;
    Ok(McEstimate::from_counts(
        accepted,
        config.samples,
        T::lit(4.0),
    ))
}

/// Named closed-form integrands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    /// `f(x) = a`, the height bound itself.
    Constant,
    Identity,
    Square,
    /// `√(1 − x²)`.
    UnitSemicircle,
}

impl Builtin {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Constant => "constant",
            Self::Identity => "identity",
            Self::Square => "square",
            Self::UnitSemicircle => "unit-semicircle",
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = McError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "constant" => Ok(Self::Constant),
            "identity" => Ok(Self::Identity),
            "square" => Ok(Self::Square),
            "unit-semicircle" | "semicircle" => Ok(Self::UnitSemicircle),
            other => Err(McError::UnknownBuiltin(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FunctionKind<T> {
    /// Coefficients in ascending degree.
    Polynomial(Vec<T>),
    Builtin(Builtin),
}

/// An integrand `f` on `[b1, b2]` with `0 <= f(x) <= height` claimed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundedFunction<T> {
    kind: FunctionKind<T>,
    b1: T,
    b2: T,
    height: T,
}

impl<T: Real> BoundedFunction<T> {
    pub fn new(kind: FunctionKind<T>, b1: T, b2: T, height: T) -> Result<Self, McError> {
        if !(b1.is_finite() && b2.is_finite() && b1 < b2) {
            return Err(McError::BadDomain {
                b1: to_f64(b1),
                b2: to_f64(b2),
            });
        }
        if !(height.is_finite() && height > T::zero()) {
            return Err(McError::BadHeight(to_f64(height)));
        }
        if matches!(&kind, FunctionKind::Polynomial(c) if c.is_empty()) {
            return Err(McError::EmptyPolynomial);
        }
        Ok(Self {
            kind,
            b1,
            b2,
            height,
        })
    }

    pub fn polynomial(coefficients: Vec<T>, b1: T, b2: T, height: T) -> Result<Self, McError> {
        Self::new(FunctionKind::Polynomial(coefficients), b1, b2, height)
    }

    pub fn builtin(builtin: Builtin, b1: T, b2: T, height: T) -> Result<Self, McError> {
        Self::new(FunctionKind::Builtin(builtin), b1, b2, height)
    }

    pub fn kind(&self) -> &FunctionKind<T> {
        &self.kind
    }

    pub fn domain(&self) -> (T, T) {
        (self.b1, self.b2)
    }

    pub fn height(&self) -> T {
        self.height
    }

    /// Area of the sampling rectangle, `a·(b2 − b1)`.
    pub fn bounding_area(&self) -> T {
        self.height * (self.b2 - self.b1)
    }

    /// Raw value of `f`, not checked against the height bound.
    pub fn eval(&self, x: T) -> T {
        match &self.kind {
            // Horner
            FunctionKind::Polynomial(c) => c.iter().rev().fold(T::zero(), |acc, &ci| acc * x + ci),
            FunctionKind::Builtin(Builtin::Constant) => self.height,
            FunctionKind::Builtin(Builtin::Identity) => x,
            FunctionKind::Builtin(Builtin::Square) => x * x,
            FunctionKind::Builtin(Builtin::UnitSemicircle) => (T::one() - x * x).sqrt(),
        }
    }

    /// `f(x)`, or an error when it falls outside `[0, height]`.
    pub fn eval_checked(&self, x: T) -> Result<T, McError> {
        let v = self.eval(x);
        if v.is_finite() && v >= T::zero() && v <= self.height {
            Ok(v)
        } else {
            Err(McError::FunctionOutOfBounds {
                x: to_f64(x),
                value: to_f64(v),
                height: to_f64(self.height),
            })
        }
    }
}

fn to_f64<T: Real>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Rejection sampling over `[b1, b2] × [0, a]`: a point is accepted when
/// `y <= f(x)`. The estimate is `ratio · a · (b2 − b1)`.
pub fn estimate_area_under_curve<T: Real>(
    f: &BoundedFunction<T>,
    config: &McConfig,
) -> Result<McEstimate<T>, McError> {
    let accepted = run_streams(config, |rng, len| {
        let mut hits = 0u64;
        for _ in 0..len {
            let x = uniform(rng, f.b1, f.b2);
            let y = uniform(rng, T::zero(), f.height);
            if y <= f.eval_checked(x)? {
                hits += 1;
            }
        }
        Ok(hits)
    })?;
    Ok(McEstimate::from_counts(
        accepted,
        config.samples,
        f.bounding_area(),
    ))
}

/// Predicted count of in-region nodes (partially covered ones at full weight)
/// out of `total_nodes`: `N_t · ratio`. Not rounded.
pub fn expected_nodes_in_region<T: Real>(
    total_nodes: u64,
    f: &BoundedFunction<T>,
    config: &McConfig,
) -> Result<T, McError> {
    if total_nodes == 0 {
        return Err(McError::NoNodes);
    }
    let est = estimate_area_under_curve(f, config)?;
    Ok(T::from_u64(total_nodes).expect("node count representable") * est.ratio)
}
