//! Scalar abstraction over the value type of integrands and entropies.
//!
//! Quadrature, entropy fluxes and the production functionals accumulate
//! either real or complex values; everything downstream is generic over
//! this trait so both paths share one code base.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::Zero;

/// Value type for integrands: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Zero
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + Mul<Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
{
    fn from_real(x: f64) -> Self;

    /// Modulus: |x| for reals, complex modulus otherwise.
    fn modulus(self) -> f64;

    /// Real part (the full value for reals).
    fn real_part(self) -> f64;

    /// Imaginary part (zero for reals).
    fn imag_part(self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }

    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }

    #[inline]
    fn real_part(self) -> f64 {
        self
    }

    #[inline]
    fn imag_part(self) -> f64 {
        0.0
    }
}

impl Scalar for Complex64 {
    #[inline]
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }

    #[inline]
    fn modulus(self) -> f64 {
        self.norm()
    }

    #[inline]
    fn real_part(self) -> f64 {
        self.re
    }

    #[inline]
    fn imag_part(self) -> f64 {
        self.im
    }
}
