//! Floating point abstraction shared by the estimation code.
//!
//! Everything that does arithmetic on outcomes (least squares, sandwich
//! covariances, aggregation, elasticities) is written against [`Scalar`] so
//! the same code runs in `f32` for quick exploratory passes and `f64` for
//! inference.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar usable by the estimators: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::nan)
    }

    /// Exact (up to precision) conversion of a count.
    fn count(n: u64) -> Self {
        Self::from_u64(n).unwrap_or_else(Self::nan)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
