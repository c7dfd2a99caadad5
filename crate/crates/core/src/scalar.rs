use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating point type the state-vector algebra is carried out in.
///
/// `tolerance` is the bound used for normalization, unitarity and
/// phase-equivalence checks at this precision.
pub trait Scalar:
    Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    fn tolerance() -> Self;

    fn frac_1_sqrt_2() -> Self;

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-12
    }

    fn frac_1_sqrt_2() -> Self {
        std::f64::consts::FRAC_1_SQRT_2
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-5
    }

    fn frac_1_sqrt_2() -> Self {
        std::f32::consts::FRAC_1_SQRT_2
    }
}
