//! Floating-point scalar abstraction shared by the statistical modules.
//!
//! Everything that estimates, samples or tests is generic over [`Real`];
//! the factorial-grammar module never touches floats and works on big
//! integers and exact rationals instead.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// A real scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` constant into this scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable in scalar type")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("integer representable in scalar type")
    }

    fn of_u64(n: u64) -> Self {
        Self::from_u64(n).expect("integer representable in scalar type")
    }

    /// Tolerance floor used by iterative special functions: the requested
    /// tolerance, but never tighter than a few ulps of the type.
    fn tol(requested: f64) -> Self {
        Self::of(requested).max(Self::epsilon() * Self::of(4.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}
