//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All field, energy and solver code is generic over [`Real`], which is
//! implemented for `f32` and `f64`. Constants that come from configuration
//! are carried as `f64` and converted with [`Real::lit`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rustfft::FftNum;

pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + FftNum + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Convert an `f64` literal or configuration value into `Self`.
    fn lit(v: f64) -> Self;

    fn to_f64_lossy(self) -> f64;

    /// `(2π)³`, the volume of the torus.
    fn torus_volume() -> Self {
        let two_pi = Self::TAU();
        two_pi * two_pi * two_pi
    }
}

impl Real for f32 {
    #[inline]
    fn lit(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    #[inline]
    fn lit(v: f64) -> Self {
        v
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_volume_matches_both_precisions() {
        let v64 = f64::torus_volume();
        let v32 = f32::torus_volume();
        assert!((v64 - 248.050_213_442_398_56).abs() < 1e-10);
        assert!((v32 as f64 - v64).abs() / v64 < 1e-6);
    }
}
