//! Scalar abstraction for the special-function and volume layers.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type usable by [`crate::lob`] and [`crate::energy`].
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Converts an `f64` literal. Infallible for the float types we implement.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal is representable")
    }

    /// Machine epsilon scaled to a usable "is this zero" threshold.
    fn tiny() -> Self {
        Self::epsilon() * Self::lit(16.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}
