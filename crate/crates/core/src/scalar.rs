//! Floating-point abstraction shared by the geometry and local VEM kernels.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar type the element-level kernels are generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal, panicking only for non-representable values.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    /// Relative tolerance used for geometric predicates at this precision.
    fn geom_eps() -> Self;
}

impl Scalar for f32 {
    fn geom_eps() -> Self {
        1e-5
    }
}

impl Scalar for f64 {
    fn geom_eps() -> Self {
        1e-11
    }
}
