//! Scalar abstraction: every numerical routine in this crate is generic over
//! the floating-point type, so the whole pipeline can run in `f32` or `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar used for weights, vectors and solver arithmetic.
///
/// Implemented for `f32` and `f64`. The bound collects everything the
/// numerical kernels need: IEEE float operations, compound assignment,
/// conversions from/to primitives, and thread-safety for use in shared
/// solver state.
pub trait Scalar:
    Float
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant (tolerance, literal) into `Self`,
    /// rounding if necessary. Panics only on values no float can hold,
    /// which cannot happen for finite literals.
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal must convert")
    }

    /// Lossy view of `self` as `f64`, for reporting and diagnostics.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("float converts to f64")
    }
}

impl<T> Scalar for T where
    T: Float
        + NumAssign
        + FromPrimitive
        + ToPrimitive
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l2_norm<T: Scalar>(xs: &[T]) -> T {
        xs.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    #[test]
    fn generic_code_runs_for_both_widths() {
        assert!((l2_norm(&[3.0f64, 4.0]) - 5.0).abs() < 1e-15);
        assert!((l2_norm(&[3.0f32, 4.0]) - 5.0).abs() < 1e-6);
    }

    #[test]
    fn lossy_conversions_round_trip_simple_values() {
        assert_eq!(f64::from_f64_lossy(0.25), 0.25);
        assert_eq!(f32::from_f64_lossy(0.25), 0.25f32);
        assert_eq!(0.25f32.to_f64_lossy(), 0.25);
    }
}
