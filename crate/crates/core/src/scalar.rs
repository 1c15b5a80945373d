//! Scalar abstraction shared by the metric, policy and statistics code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar type the numerical code is generic over.
///
/// Implemented for `f32` and `f64`. Everything that needs literal constants
/// goes through [`Scalar::lit`], so the algorithms never hard-code a width.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into this scalar type.
    fn from_count(count: usize) -> Self {
        Self::from_usize(count).expect("count representable in scalar type")
    }

    /// Lossy view as `f64`, used for reporting and integerisation.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    /// Tolerance used when asserting algebraic identities that hold exactly in
    /// real arithmetic but pick up rounding error in floating point.
    fn identity_tolerance() -> Self {
        Self::epsilon() * Self::lit(4096.0)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Sums a sequence in iteration order.
///
/// Used wherever bitwise reproducibility matters: the order of accumulation
/// is the order of the slice.
pub(crate) fn ordered_sum<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    values.into_iter().fold(T::zero(), |acc, v| acc + v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_round_trip() {
        assert_eq!(f64::lit(0.25), 0.25);
        assert_eq!(f32::lit(0.25), 0.25f32);
        assert_eq!(f32::from_count(3), 3.0);
    }
}
