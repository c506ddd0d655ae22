use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar the numeric kernels are generic over.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Slack allowed when checking that a weight vector sums to one.
    const WEIGHT_TOLERANCE: f64;

    /// Converts an `f64` literal. Panics only for values the type cannot
    /// represent at all, which never happens for `f32`/`f64`.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const WEIGHT_TOLERANCE: f64 = 1e-9;
}

impl Scalar for f32 {
    const WEIGHT_TOLERANCE: f64 = 1e-5;
}

/// Checks that `weights` sum to one within the scalar's tolerance.
pub(crate) fn weights_sum_to_one<T: Scalar>(weights: impl IntoIterator<Item = T>) -> Result<(), T> {
    let sum: T = weights.into_iter().sum();
    if (sum.as_f64() - 1.0).abs() <= T::WEIGHT_TOLERANCE {
        Ok(())
    } else {
        Err(sum)
    }
}
