//! Scalar abstractions.
//!
//! [`Scalar`] is anything the dense kernel can add and multiply exactly
//! (integers included), [`Real`] adds the floating-point surface needed for
//! norms, square roots and tolerances.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::Neg;

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, ToPrimitive};

/// Entries of a [`crate::Matrix`]: a ring with negation.
pub trait Scalar:
    Num + Copy + Neg<Output = Self> + PartialOrd + Debug + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Num + Copy + Neg<Output = T> + PartialOrd + Debug + Send + Sync + 'static
{
}

/// floating point: f32 or f64
pub trait Real:
    Scalar
    + Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumCast
    + Default
    + Display
    + LowerExp
    + Sum
{
    /// Lossy conversion from `f64`, used for constants and tolerances.
    fn of(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 constant representable")
    }

    /// Conversion from a count.
    fn of_usize(n: usize) -> Self {
        <Self as NumCast>::from(n).expect("usize representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
