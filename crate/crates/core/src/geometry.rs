use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// A planar coordinate: a node position or a cell center.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2D<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point2D<T> {
    pub const fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn norm_squared(&self) -> T {
        self.x * self.x + self.y * self.y
    }

    pub fn translate(&self, dx: T, dy: T) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }

    pub fn scale(&self, k: T) -> Self {
        Self::new(self.x * k, self.y * k)
    }

    /// Rotates counter-clockwise about the origin.
    pub fn rotate(&self, theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Swaps the two coordinates (reflection through `y = x`).
    pub fn transpose(&self) -> Self {
        Self::new(self.y, self.x)
    }
}

impl<T: Real> From<(T, T)> for Point2D<T> {
    fn from((x, y): (T, T)) -> Self {
        Self::new(x, y)
    }
}
