//! Scalar abstraction for the floating-point side of the library.
//!
//! All CDF arithmetic is generic over [`Real`] so that the same code runs on
//! `f32` and `f64`. Exact quantities (transition weights, probabilities,
//! logic constants) use [`num_rational::BigRational`] instead and never pass
//! through this trait.

use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + fmt::Debug
    + fmt::Display
    + Default
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum
        + fmt::Debug
        + fmt::Display
        + Default
        + 'static
{
}

/// Shorthand for lifting an `f64` constant into the generic scalar.
#[inline]
pub fn r<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("f64 constant not representable in scalar type")
}
