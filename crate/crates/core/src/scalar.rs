//! Floating-point abstraction shared by the pricing code.
//!
//! Everything analytic in this crate is written once against [`Scalar`] and
//! instantiated for `f32` and `f64`. The numerical oracles and the CLI work
//! in `f64` only.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst};

/// Real scalar usable by the closed-form pricing code.
pub trait Scalar: Float + FloatConst + Debug + Display + Default + Send + Sync + 'static {
    /// Complementary error function, accurate to about one ulp.
    fn erfc(self) -> Self;

    /// Converts an `f64` constant into this type (rounding for `f32`).
    fn lit(value: f64) -> Self;

    /// Lossless widening used for diagnostics and error payloads.
    fn as_f64(self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfc(self)
    }

    #[inline]
    fn lit(value: f64) -> Self {
        value
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }

    #[inline]
    fn lit(value: f64) -> Self {
        value as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        f64::from(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfc_matches_known_values() {
        assert!((Scalar::erfc(0.0_f64) - 1.0).abs() < 1e-16);
        assert!((Scalar::erfc(1.0_f64) - 0.157_299_207_050_285_13).abs() < 1e-16);
        assert!((Scalar::erfc(1.0_f32) - 0.157_299_2).abs() < 1e-7);
    }

    #[test]
    fn literal_conversion() {
        assert_eq!(<f32 as Scalar>::lit(0.5), 0.5_f32);
        assert_eq!(<f64 as Scalar>::lit(0.1), 0.1_f64);
        assert_eq!(Scalar::as_f64(0.25_f32), 0.25);
    }
}
