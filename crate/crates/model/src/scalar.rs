//! Scalar abstraction so the whole model runs in f32 (training speed) or
//! f64 (numeric verification) without code changes.

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point element type for every tensor in the model.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + LinalgScalar
    + ScalarOperand
    + std::ops::AddAssign
    + std::ops::SubAssign
    + std::ops::MulAssign
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Tag written into checkpoints so payloads only reload at the width
    /// they were saved with.
    const DTYPE: &'static str;
}

impl Scalar for f32 {
    const DTYPE: &'static str = "f32";
}

impl Scalar for f64 {
    const DTYPE: &'static str = "f64";
}

/// Lossless-enough conversion from the f64 literals used for constants.
#[inline]
pub fn sc<F: Scalar>(v: f64) -> F {
    F::from_f64(v).expect("f64 converts to every scalar type")
}
