//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the rate and bound formulas are generic over.
///
/// Implemented for `f32` and `f64`. Drivers that run long searches
/// (optimizer, experiments) are pinned to `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Conversion to `f64` for reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance `tol` widened to what the type can actually resolve.
    fn tol(tol: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(64.0);
        Self::lit(tol).max(floor)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `log2(1 + x)`, computed through `ln_1p` for accuracy near zero.
pub(crate) fn log2_1p<T: Real>(x: T) -> T {
    x.ln_1p() / T::LN_2()
}

/// `log2(num / den)` for positive arguments.
pub(crate) fn log2_ratio<T: Real>(num: T, den: T) -> T {
    (num / den).log2()
}

/// Positive part.
pub(crate) fn pos<T: Real>(x: T) -> T {
    x.max(T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_never_below_resolution() {
        assert!(f32::tol(1e-12) > 1e-12);
        assert_eq!(f64::tol(1e-9), 1e-9);
    }

    #[test]
    fn log2_1p_small_and_large() {
        assert!((log2_1p(1.0f64) - 1.0).abs() < 1e-15);
        assert!((log2_1p(1e-18f64) - 1e-18 / std::f64::consts::LN_2).abs() < 1e-30);
        assert!((log2_1p(3.0f32) - 2.0).abs() < 1e-6);
    }
}
