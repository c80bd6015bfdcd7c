//! Numeric traits the library is generic over.
//!
//! [`Real`] covers the floating-point quantities (PageRank, polarization
//! statistics, fits). [`Weight`] is the narrower contract of the influence
//! score, which only needs a signed field with division; it is also
//! implemented by exact rationals so that tie cases can be evaluated without
//! rounding.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};
use serde::Serialize;

/// Floating point: f32 or f64.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Serialize + Send + Sync + 'static
{
    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize is representable in every float type")
    }

    #[inline]
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every float type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Edge weight used when accumulating an influence score.
pub trait Weight: Num + Signed + Copy + PartialOrd + Debug + Send + Sync + 'static {
    /// `1 / k` for an out-degree `k > 0`.
    fn reciprocal_degree(k: u32) -> Self;

    /// Whether `z` should be read as an exact zero, given the sum of
    /// absolute contributions `magnitude` that produced it.
    fn is_tie(z: Self, magnitude: Self) -> bool;

    fn from_i64_exact(v: i64) -> Self;
}

macro_rules! float_weight {
    ($t:ty) => {
        impl Weight for $t {
            #[inline]
            fn reciprocal_degree(k: u32) -> Self {
                1.0 / k as $t
            }

            #[inline]
            fn is_tie(z: Self, magnitude: Self) -> bool {
                // A handful of rounding steps per term at most.
                z.abs() <= magnitude * (16.0 * <$t>::EPSILON)
            }

            #[inline]
            fn from_i64_exact(v: i64) -> Self {
                v as $t
            }
        }
    };
}

float_weight!(f32);
float_weight!(f64);

impl Weight for Ratio<i64> {
    fn reciprocal_degree(k: u32) -> Self {
        Ratio::new(1, i64::from(k))
    }

    fn is_tie(z: Self, _magnitude: Self) -> bool {
        z == Ratio::from_integer(0)
    }

    fn from_i64_exact(v: i64) -> Self {
        Ratio::from_integer(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_tie_absorbs_rounding() {
        let third = f64::reciprocal_degree(3);
        let z = third + third + third - 1.0;
        assert!(f64::is_tie(z, 2.0));
        assert!(!f64::is_tie(1e-9, 2.0));
    }

    #[test]
    fn rational_tie_is_exact() {
        let third = Ratio::<i64>::reciprocal_degree(3);
        let z = third + third + third - Ratio::from_integer(1);
        assert!(Weight::is_tie(z, Ratio::from_integer(2)));
        assert!(!Weight::is_tie(Ratio::new(1, 1_000_000), Ratio::from_integer(2)));
    }
}
