use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type used for log10 scores.
pub trait Score:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` computed value into this type (rounding for `f32`).
    fn from_f64_lossy(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 is representable in every Score type")
    }

    fn to_f64_lossless(self) -> f64 {
        self.to_f64().expect("Score converts to f64")
    }
}

impl Score for f32 {}
impl Score for f64 {}
