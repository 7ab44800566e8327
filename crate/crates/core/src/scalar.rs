//! Floating-point scalar abstraction shared by every module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar the library is generic over: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts a literal, panicking only for values the type cannot hold at all.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative in-span tolerance for Gram–Schmidt: `1e-10`, widened to a few
    /// hundred ulps for low-precision types.
    fn span_tol() -> Self {
        Self::lit(1e-10).max(Self::epsilon() * Self::lit(512.0))
    }

    /// Bitwise identity, distinguishing signed zeros.
    #[inline]
    fn bit_eq(self, other: Self) -> bool {
        self.integer_decode() == other.integer_decode()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
