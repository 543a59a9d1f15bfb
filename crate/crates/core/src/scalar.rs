//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All of the math is written against [`Scalar`] so that a network can be run
//! in `f32` for speed or `f64` when exactness checks matter. On-disk formats
//! always store 64-bit little-endian values; `f32` models widen on save and
//! narrow on load, which round-trips exactly.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` constant into this scalar type.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable in scalar type")
    }

    #[inline]
    fn lossy_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Floor applied to vector norms before dividing by them.
    #[inline]
    fn norm_floor() -> Self {
        Self::of(1e-9)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Total order on scalars for sorting; NaN compares equal to everything.
#[inline]
pub(crate) fn cmp<T: Scalar>(a: T, b: T) -> std::cmp::Ordering {
    a.partial_cmp(&b).unwrap_or(std::cmp::Ordering::Equal)
}
