//! Floating-point abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// IEEE float usable by the fitting and sampling routines: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + NumAssign + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`, rounding for narrower types.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in Real")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in Real")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `|a - b| <= tol * max(|a|, |b|, 1)`.
pub fn approx_eq_rel<T: Real>(a: T, b: T, tol: T) -> bool {
    let scale = a.abs().max(b.abs()).max(T::one());
    (a - b).abs() <= tol * scale
}
