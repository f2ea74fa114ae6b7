//! Straight-line least squares over node positions.
//!
//! Two residual models are supported:
//!
//! - **vertical offsets**, the ordinary regression of `y` on `x`, minimizing
//!   `R² = Σ [yᵢ − (a + b·xᵢ)]²`;
//! - **perpendicular offsets**, minimizing `R⊥² = Σ [yᵢ − (a + b·xᵢ)]² / (1 + b²)`,
//!   whose stationary slopes are `b = −B ± √(B² + 1)` with
//!   `B = (SSyy − SSxx) / (2·(n·x̄·ȳ − Σxᵢyᵢ))`.
//!
//! Sums of squares are accumulated in centered form (`Σ(xᵢ − x̄)²`) rather
//! than as `Σxᵢ² − n·x̄²`; the two are equal in exact arithmetic.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point2D;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FitError {
    #[error("at least 2 points are required (got {0})")]
    TooFewPoints(usize),
    #[error("point {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error(
        "all x values are equal; a vertical-offset fit is undefined, use perpendicular fitting"
    )]
    DegenerateVertical,
    #[error("all points coincide; no line is determined")]
    CoincidentPoints,
    #[error("SSxy = 0 and SSxx = SSyy; the perpendicular fit orientation is indeterminate")]
    DegeneratePerpendicular,
    #[error("correlation undefined: zero variance in {0}")]
    ZeroVariance(&'static str),
}

impl FitError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Self::TooFewPoints(_) => "too_few_points",
            Self::NonFinite(_) => "non_finite",
            Self::DegenerateVertical => "degenerate_vertical",
            Self::CoincidentPoints => "coincident_points",
            Self::DegeneratePerpendicular => "degenerate_perpendicular",
            Self::ZeroVariance(_) => "zero_variance",
        }
    }
}

/// At least two finite node positions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSet<T> {
    points: Vec<Point2D<T>>,
}

impl<T: Real> PointSet<T> {
    pub fn new(points: Vec<Point2D<T>>) -> Result<Self, FitError> {
        if points.len() < 2 {
            return Err(FitError::TooFewPoints(points.len()));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(FitError::NonFinite(i));
        }
        Ok(Self { points })
    }

    pub fn from_pairs(pairs: &[(T, T)]) -> Result<Self, FitError> {
        Self::new(pairs.iter().map(|&p| p.into()).collect())
    }

    pub fn points(&self) -> &[Point2D<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Applies `f` to every point; fails only if `f` produces a non-finite value.
    pub fn map(&self, f: impl Fn(Point2D<T>) -> Point2D<T>) -> Result<Self, FitError> {
        Self::new(self.points.iter().map(|&p| f(p)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats<T> {
    pub n: usize,
    pub mean_x: T,
    pub mean_y: T,
    pub ss_xx: T,
    pub ss_yy: T,
    pub ss_xy: T,
    /// `SSxx / n`
    pub var_x: T,
    /// `SSyy / n`
    pub var_y: T,
    /// `SSxy / n`
    pub cov_xy: T,
}

pub fn summary_stats<T: Real>(points: &PointSet<T>) -> SummaryStats<T> {
    let n = T::from_usize_lossy(points.len());
    let pts = points.points();
    let mean_x = pts.iter().map(|p| p.x).sum::<T>() / n;
    let mean_y = pts.iter().map(|p| p.y).sum::<T>() / n;
    let (mut ss_xx, mut ss_yy, mut ss_xy) = (T::zero(), T::zero(), T::zero());
    for p in pts {
        let dx = p.x - mean_x;
        let dy = p.y - mean_y;
        ss_xx += dx * dx;
        ss_yy += dy * dy;
        ss_xy += dx * dy;
    }
    SummaryStats {
        n: points.len(),
        mean_x,
        mean_y,
        ss_xx,
        ss_yy,
        ss_xy,
        var_x: ss_xx / n,
        var_y: ss_yy / n,
        cov_xy: ss_xy / n,
    }
}

impl<T: Real> SummaryStats<T> {
    pub fn std_dev_x(&self) -> T {
        self.var_x.sqrt()
    }

    pub fn std_dev_y(&self) -> T {
        self.var_y.sqrt()
    }

    /// `SSxy / √(SSxx·SSyy)`, clamped to `[-1, 1]` against rounding.
    pub fn correlation(&self) -> Result<T, FitError> {
        if self.ss_xx <= T::zero() {
            return Err(FitError::ZeroVariance("x"));
        }
        if self.ss_yy <= T::zero() {
            return Err(FitError::ZeroVariance("y"));
        }
        let prod = self.ss_xx * self.ss_yy;
        let denom = if prod.is_normal() {
            prod.sqrt()
        } else {
            self.ss_xx.sqrt() * self.ss_yy.sqrt()
        };
        let r = self.ss_xy / denom;
        Ok(r.max(-T::one()).min(T::one()))
    }
}

pub fn correlation<T: Real>(points: &PointSet<T>) -> Result<T, FitError> {
    summary_stats(points).correlation()
}

/// The 2×2 system `[[n, Σx], [Σx, Σx²]]·[a, b]ᵀ = [Σy, Σxy]ᵀ` from setting
/// `∂R²/∂a = ∂R²/∂b = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalEquations<T> {
    pub matrix: [[T; 2]; 2],
    pub rhs: [T; 2],
}

impl<T: Real> NormalEquations<T> {
    pub fn from_points(points: &PointSet<T>) -> Self {
        let n = T::from_usize_lossy(points.len());
        let (mut sx, mut sy, mut sxx, mut sxy) = (T::zero(), T::zero(), T::zero(), T::zero());
        for p in points.points() {
            sx += p.x;
            sy += p.y;
            sxx += p.x * p.x;
            sxy += p.x * p.y;
        }
        Self {
            matrix: [[n, sx], [sx, sxx]],
            rhs: [sy, sxy],
        }
    }

    /// `(a, b)` via the explicit matrix inverse; `None` when singular.
    pub fn solve(&self) -> Option<(T, T)> {
        let [[m00, m01], [m10, m11]] = self.matrix;
        let det = m00 * m11 - m01 * m10;
        if det == T::zero() || !det.is_finite() {
            return None;
        }
        let a = (m11 * self.rhs[0] - m01 * self.rhs[1]) / det;
        let b = (m00 * self.rhs[1] - m10 * self.rhs[0]) / det;
        Some((a, b))
    }

    /// `M·[a, b]ᵀ − rhs`.
    pub fn residuals(&self, a: T, b: T) -> [T; 2] {
        let m = self.matrix;
        [
            m[0][0] * a + m[0][1] * b - self.rhs[0],
            m[1][0] * a + m[1][1] * b - self.rhs[1],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitMethod {
    #[serde(rename = "vertical")]
    VerticalOffsets,
    #[serde(rename = "perpendicular")]
    PerpendicularOffsets,
}

impl FitMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::VerticalOffsets => "vertical",
            Self::PerpendicularOffsets => "perpendicular",
        }
    }
}

/// A fitted line `y = a + b·x`.
///
/// A perpendicular fit can come out exactly vertical; then `vertical_x` holds
/// the line's `x`, `slope` is `+∞`, `intercept` is NaN and both standard
/// errors are `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit<T> {
    pub method: FitMethod,
    pub intercept: T,
    pub slope: T,
    pub vertical_x: Option<T>,
    /// Correlation of the data, 0 when either coordinate has zero variance.
    pub r: T,
    pub r_squared: T,
    /// Vertical-offset standard errors. For perpendicular fits they reuse the
    /// same formulas with `s` from `R⊥²` and are only approximate.
    pub se_a: T,
    pub se_b: T,
    /// Residual scale `√(residual / (n − 2))`, 0 for two points.
    pub s: T,
    /// `R²` for vertical fits, `R⊥²` for perpendicular fits.
    pub residual: T,
    pub n: usize,
}

impl<T: Real> LinearFit<T> {
    pub fn is_vertical(&self) -> bool {
        self.vertical_x.is_some()
    }

    /// `a + b·x`; NaN for a vertical line.
    pub fn predict(&self, x: T) -> T {
        match self.vertical_x {
            Some(_) => T::nan(),
            None => self.intercept + self.slope * x,
        }
    }

    /// Unit direction vector, oriented with non-negative x component
    /// (`(0, 1)` for vertical lines).
    pub fn direction(&self) -> (T, T) {
        match self.vertical_x {
            Some(_) => (T::zero(), T::one()),
            None => {
                let h = T::one().hypot(self.slope);
                (T::one() / h, self.slope / h)
            }
        }
    }

    /// Some point on the line.
    pub fn anchor(&self) -> Point2D<T> {
        match self.vertical_x {
            Some(x) => Point2D::new(x, T::zero()),
            None => Point2D::new(T::zero(), self.intercept),
        }
    }

    /// Perpendicular distance from `p` to the line.
    pub fn distance_to(&self, p: Point2D<T>) -> T {
        let (dx, dy) = self.direction();
        let q = self.anchor();
        ((p.x - q.x) * dy - (p.y - q.y) * dx).abs()
    }
}

/// Residual scale and standard errors `SE(a) = s·√(1/n + x̄²/SSxx)`,
/// `SE(b) = s/√SSxx`.
fn standard_errors<T: Real>(stats: &SummaryStats<T>, residual: T) -> (T, T, T) {
    let s = if stats.n > 2 {
        (residual.max(T::zero()) / T::from_usize_lossy(stats.n - 2)).sqrt()
    } else {
        T::zero()
    };
    if stats.ss_xx <= T::zero() {
        return (s, T::infinity(), T::infinity());
    }
    let n = T::from_usize_lossy(stats.n);
    let se_a = s * (T::one() / n + stats.mean_x * stats.mean_x / stats.ss_xx).sqrt();
    let se_b = s / stats.ss_xx.sqrt();
    (s, se_a, se_b)
}

/// Ordinary least squares of `y` on `x`: `b = SSxy/SSxx`, `a = ȳ − b·x̄`.
pub fn fit_vertical<T: Real>(points: &PointSet<T>) -> Result<LinearFit<T>, FitError> {
    let stats = summary_stats(points);
    if stats.ss_xx <= T::zero() {
        return Err(FitError::DegenerateVertical);
    }
    let slope = stats.ss_xy / stats.ss_xx;
    let intercept = stats.mean_y - slope * stats.mean_x;
    let residual = points
        .points()
        .iter()
        .map(|p| {
            let e = (p.y - stats.mean_y) - slope * (p.x - stats.mean_x);
            e * e
        })
        .sum::<T>();
    let r = stats.correlation().unwrap_or(T::zero());
    let (s, se_a, se_b) = standard_errors(&stats, residual);
    Ok(LinearFit {
        method: FitMethod::VerticalOffsets,
        intercept,
        slope,
        vertical_x: None,
        r,
        r_squared: r * r,
        se_a,
        se_b,
        s,
        residual,
        n: stats.n,
    })
}

/// `B = (SSyy − SSxx) / (2·(n·x̄·ȳ − Σxᵢyᵢ)) = (SSyy − SSxx) / (−2·SSxy)`.
pub fn perpendicular_b<T: Real>(stats: &SummaryStats<T>) -> T {
    (stats.ss_yy - stats.ss_xx) / (-(stats.ss_xy + stats.ss_xy))
}

/// The two stationary slopes `(−B + √(B²+1), −B − √(B²+1))`. The root that
/// would cancel catastrophically is taken as `−1/other`, since their product is −1.
pub fn slope_roots<T: Real>(big_b: T) -> (T, T) {
    let h = big_b.hypot(T::one());
    if big_b >= T::zero() {
        let minus = -big_b - h;
        (-T::one() / minus, minus)
    } else {
        let plus = -big_b + h;
        (plus, -T::one() / plus)
    }
}

/// `Σ [(yᵢ − ȳ) − b·(xᵢ − x̄)]² / (1 + b²)`, the perpendicular residual of the
/// slope-`b` line through the centroid.
fn centered_perpendicular_residual<T: Real>(
    points: &PointSet<T>,
    stats: &SummaryStats<T>,
    slope: T,
) -> T {
    let sum = points
        .points()
        .iter()
        .map(|p| {
            let e = (p.y - stats.mean_y) - slope * (p.x - stats.mean_x);
            e * e
        })
        .sum::<T>();
    sum / (T::one() + slope * slope)
}

/// Perpendicular-offset (orthogonal) least squares.
///
/// Both roots of `b = −B ± √(B²+1)` are evaluated and the one with the
/// smaller `R⊥²` is kept; the other is the perpendicular line that maximizes it.
pub fn fit_perpendicular<T: Real>(points: &PointSet<T>) -> Result<LinearFit<T>, FitError> {
    let stats = summary_stats(points);
    let spread = stats.ss_xx + stats.ss_yy;
    if spread <= T::zero() {
        return Err(FitError::CoincidentPoints);
    }
    let tol = T::epsilon() * T::lit(64.0) * spread;

    let (slope, vertical_x, residual) = if stats.ss_xy.abs() <= tol {
        // B is infinite: the fit is axis-aligned.
        if (stats.ss_xx - stats.ss_yy).abs() <= tol {
            return Err(FitError::DegeneratePerpendicular);
        }
        if stats.ss_xx > stats.ss_yy {
            (T::zero(), None, stats.ss_yy)
        } else {
            (T::infinity(), Some(stats.mean_x), stats.ss_xx)
        }
    } else {
        let (plus, minus) = slope_roots(perpendicular_b(&stats));
        let r_plus = centered_perpendicular_residual(points, &stats, plus);
        let r_minus = centered_perpendicular_residual(points, &stats, minus);
        if r_plus <= r_minus {
            (plus, None, r_plus)
        } else {
            (minus, None, r_minus)
        }
    };

    let intercept = match vertical_x {
        Some(_) => T::nan(),
        None => stats.mean_y - slope * stats.mean_x,
    };
    let r = stats.correlation().unwrap_or(T::zero());
    let (s, mut se_a, mut se_b) = standard_errors(&stats, residual);
    if vertical_x.is_some() {
        se_a = T::infinity();
        se_b = T::infinity();
    }
    Ok(LinearFit {
        method: FitMethod::PerpendicularOffsets,
        intercept,
        slope,
        vertical_x,
        r,
        r_squared: r * r,
        se_a,
        se_b,
        s,
        residual,
        n: stats.n,
    })
}

pub fn fit<T: Real>(points: &PointSet<T>, method: FitMethod) -> Result<LinearFit<T>, FitError> {
    match method {
        FitMethod::VerticalOffsets => fit_vertical(points),
        FitMethod::PerpendicularOffsets => fit_perpendicular(points),
    }
}

/// Sum of squared vertical offsets from `y = a + b·x`.
pub fn vertical_residual<T: Real>(points: &PointSet<T>, a: T, b: T) -> T {
    points
        .points()
        .iter()
        .map(|p| {
            let e = p.y - (a + b * p.x);
            e * e
        })
        .sum()
}

/// Sum of squared perpendicular offsets from `y = a + b·x`.
pub fn perpendicular_residual<T: Real>(points: &PointSet<T>, a: T, b: T) -> T {
    vertical_residual(points, a, b) / (T::one() + b * b)
}
