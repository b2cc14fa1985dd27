//! Scalar abstraction for the numeric core.

use std::fmt::Display;
use std::iter::Sum;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar the numeric core is generic over.
///
/// Implemented for `f32` and `f64`. The crate root exports `f64` aliases of
/// the common domain types, which is what the CLI and most callers want;
/// the generic forms remain available for callers that trade precision for
/// footprint.
pub trait Float:
    RealField
    + FromPrimitive
    + ToPrimitive
    + Copy
    + Default
    + Display
    + Sum<Self>
    + for<'a> Sum<&'a Self>
{
    /// Machine epsilon.
    const EPS: Self;
    /// Largest finite value.
    const MAX_FINITE: Self;

    /// Conversion from an `f64` constant (lossy for `f32`).
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant must be representable")
    }

    /// Conversion to `f64` for reporting and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar must be representable as f64")
    }
}

impl Float for f32 {
    const EPS: Self = f32::EPSILON;
    const MAX_FINITE: Self = f32::MAX;
}

impl Float for f64 {
    const EPS: Self = f64::EPSILON;
    const MAX_FINITE: Self = f64::MAX;
}
