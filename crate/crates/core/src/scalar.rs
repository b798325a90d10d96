//! Scalar abstraction for the numeric kernels.

use std::fmt::{Debug, Display};
use std::ops::AddAssign;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar the simulation is generic over.
///
/// Blanket-implemented for anything float-like, in practice `f32` and
/// `f64`. The stated accuracy targets (1e-10 unitarity, 1e-14 Bessel
/// accuracy, ...) hold for `f64` only.
pub trait Real:
    Float + FloatConst + FromPrimitive + AddAssign + Debug + Display + Send + Sync + 'static
{
    fn from_f64_lossy(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("scalar conversion from f64")
    }

    fn from_usize_lossy(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("scalar conversion from usize")
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + AddAssign + Debug + Display + Send + Sync + 'static
{
}
