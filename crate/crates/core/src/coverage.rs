//! Circular coverage membership for cells, and IP block partitioning across cells.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point2D;
use crate::scalar::Real;

pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverageError {
    #[error("coverage radius must be positive and finite")]
    BadRadius,
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("epsilon must be non-negative and finite")]
    BadEpsilon,
    #[error("IP count and cell count must both be at least 1")]
    EmptyPartition,
}

/// The radio coverage disc of a dynamic network, centered on its center node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageRegion<T> {
    center: Point2D<T>,
    radius: T,
}

impl<T: Real> CoverageRegion<T> {
    pub fn new(center: Point2D<T>, radius: T) -> Result<Self, CoverageError> {
        if !center.is_finite() {
            return Err(CoverageError::NonFinite);
        }
        if !(radius.is_finite() && radius > T::zero()) {
            return Err(CoverageError::BadRadius);
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> Point2D<T> {
        self.center
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    /// `(x1 − x2)²/R² + (y1 − y2)²/R²`.
    pub fn score(&self, cell_center: Point2D<T>) -> T {
        let r2 = self.radius * self.radius;
        let dx = self.center.x - cell_center.x;
        let dy = self.center.y - cell_center.y;
        dx * dx / r2 + dy * dy / r2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MembershipKind {
    Inside,
    Boundary,
    Outside,
}

impl MembershipKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Inside => "inside",
            Self::Boundary => "boundary",
            Self::Outside => "outside",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Membership<T> {
    pub kind: MembershipKind,
    pub score: T,
}

/// Classifies a cell center against the region. Scores within `epsilon` of 1
/// are `Boundary`; below that band `Inside`, above it `Outside`.
pub fn classify_cell<T: Real>(
    region: &CoverageRegion<T>,
    cell_center: Point2D<T>,
    epsilon: T,
) -> Result<Membership<T>, CoverageError> {
    if !cell_center.is_finite() {
        return Err(CoverageError::NonFinite);
    }
    if !(epsilon.is_finite() && epsilon >= T::zero()) {
        return Err(CoverageError::BadEpsilon);
    }
    let score = region.score(cell_center);
    let kind = if (score - T::one()).abs() <= epsilon {
        MembershipKind::Boundary
    } else if score < T::one() {
        MembershipKind::Inside
    } else {
        MembershipKind::Outside
    };
    Ok(Membership { kind, score })
}

/// Split of `total_ips` addresses into `cells` equal blocks. The remainder is
/// held in a global reserve and never handed to a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IpAllocation {
    pub total_ips: u32,
    pub cells: u32,
    pub per_cell: u32,
    pub remainder: u32,
    /// Set when `total_ips < cells`, i.e. every cell gets an empty block.
    pub underprovisioned: bool,
}

impl IpAllocation {
    /// Index range (into the global address space) of `cell`'s block.
    pub fn block(&self, cell: u32) -> std::ops::Range<u32> {
        assert!(cell < self.cells, "cell {cell} out of range");
        let start = cell * self.per_cell;
        start..start + self.per_cell
    }

    /// Index range of the unassigned reserve at the top of the address space.
    pub fn reserve(&self) -> std::ops::Range<u32> {
        self.total_ips - self.remainder..self.total_ips
    }
}

pub fn partition_ips(m: u32, n: u32) -> Result<IpAllocation, CoverageError> {
    if m == 0 || n == 0 {
        return Err(CoverageError::EmptyPartition);
    }
    Ok(IpAllocation {
        total_ips: m,
        cells: n,
        per_cell: m / n,
        remainder: m % n,
        underprovisioned: m < n,
    })
}
