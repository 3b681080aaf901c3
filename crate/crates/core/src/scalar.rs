//! Floating-point scalar abstraction shared by every numeric routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Absolute tolerance used when checking that weights sum to one.
    fn weight_tolerance() -> Self;

    /// Lossless-enough conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable as float")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("float converts to f64")
    }

    /// Exact bit-level identity key, used for level sets of identical values.
    fn identity_key(self) -> u64 {
        let (mantissa, exponent, sign) = self.integer_decode();
        mantissa ^ ((exponent as u16 as u64) << 48) ^ ((sign as u8 as u64) << 63)
    }
}

impl Scalar for f64 {
    fn weight_tolerance() -> Self {
        1e-9
    }

    fn identity_key(self) -> u64 {
        self.to_bits()
    }
}

impl Scalar for f32 {
    fn weight_tolerance() -> Self {
        1e-5
    }

    fn identity_key(self) -> u64 {
        u64::from(self.to_bits())
    }
}

/// Neumaier-compensated sum. Keeps long accumulations accurate to a few ulps.
pub(crate) fn compensated_sum<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut comp = T::zero();
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp = comp + ((sum - t) + v);
        } else {
            comp = comp + ((v - t) + sum);
        }
        sum = t;
    }
    sum + comp
}
