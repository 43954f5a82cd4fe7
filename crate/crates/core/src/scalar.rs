use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type the beamforming and simulation code is generic over.
///
/// Implemented for `f32` and `f64`. Tolerances that make sense in double
/// precision are clamped to a small multiple of the type's epsilon through
/// [`Real::tolerance`].
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` constant, panicking only for values the type cannot represent.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("constant representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `requested`, or a few hundred epsilons when the type cannot resolve `requested`.
    fn tolerance(requested: f64) -> Self {
        let floor = Self::default_epsilon() * Self::lit(256.0);
        let requested = Self::lit(requested);
        if requested < floor {
            floor
        } else {
            requested
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}
