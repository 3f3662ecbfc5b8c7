//! Scalar abstraction shared by every numeric kernel in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the solvers and the simulator are generic over.
///
/// Implemented for `f32` and `f64`. Integer lattice data and exact weights
/// are converted into `Real` through [`Real::of`] and [`Real::ratio`].
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal; panics only for values the type cannot represent at all.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    /// Converts a small integer exactly.
    #[inline]
    fn int(v: i64) -> Self {
        Self::from_i64(v).expect("integer representable in scalar type")
    }

    /// Converts the exact rational `num / den`, rounding once.
    #[inline]
    fn ratio(num: i64, den: i64) -> Self {
        Self::int(num) / Self::int(den)
    }

    /// Lossy view as `f64` for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine-precision-scaled tolerance used by sanity assertions.
    fn tolerance() -> Self;
}

impl Real for f32 {
    fn tolerance() -> Self {
        1e-5
    }
}

impl Real for f64 {
    fn tolerance() -> Self {
        1e-12
    }
}

/// `sqrt(2)^h`, exact for even `h` and a single rounding for odd `h`.
pub fn sqrt2_pow<T: Real>(h: u32) -> T {
    let base = T::int(1i64 << (h / 2));
    if h % 2 == 1 {
        base * T::SQRT_2()
    } else {
        base
    }
}
