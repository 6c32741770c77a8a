//! Generic real scalar underlying all numerics.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar the whole crate is generic over.
///
/// Implemented for `f32` and `f64`; every matrix, tolerance and solver in the
/// crate works for any implementor. Concrete aliases at the crate root pin
/// `f64` for ordinary use.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Sum + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used for literals and RNG draws.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 literal must convert")
    }

    /// Conversion from a count.
    fn from_count(v: usize) -> Self {
        Self::from_usize(v).expect("usize must convert to scalar")
    }
}

impl<T> Scalar for T where
    T: Float + FloatConst + FromPrimitive + Sum + Debug + Display + LowerExp + Send + Sync + 'static
{
}
