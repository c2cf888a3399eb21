use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

/// Entry type for matrices and sensing vectors: real `f64` or `Complex64`.
///
/// Everything downstream (operators, solvers, the harness) is generic over
/// this trait, so the real path is monomorphized without any complex
/// overhead. Complex values are a plain (re, im) pair of `f64`.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    const IS_COMPLEX: bool;
    const ZERO: Self;
    const ONE: Self;

    fn from_re(re: f64) -> Self;
    /// Build from real and imaginary parts. The real implementation requires
    /// `im == 0`.
    fn from_re_im(re: f64, im: f64) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn conj(self) -> Self;
    /// Squared modulus.
    fn abs2(self) -> f64;
    fn abs(self) -> f64 {
        self.abs2().sqrt()
    }
    /// `self / |self|`; caller guarantees `self != 0`.
    fn unit_phase(self) -> Self;
    /// Multiply by a real factor.
    fn scale(self, k: f64) -> Self;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;

    #[inline]
    fn from_re(re: f64) -> Self {
        re
    }
    #[inline]
    fn from_re_im(re: f64, im: f64) -> Self {
        debug_assert_eq!(im, 0.0, "imaginary part in a real scalar");
        re
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn im(self) -> f64 {
        0.0
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn abs2(self) -> f64 {
        self * self
    }
    #[inline]
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    #[inline]
    fn unit_phase(self) -> Self {
        if self >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        self * k
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;
    const ZERO: Self = Complex64::new(0.0, 0.0);
    const ONE: Self = Complex64::new(1.0, 0.0);

    #[inline]
    fn from_re(re: f64) -> Self {
        Complex64::new(re, 0.0)
    }
    #[inline]
    fn from_re_im(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn im(self) -> f64 {
        self.im
    }
    #[inline]
    fn conj(self) -> Self {
        Complex64::new(self.re, -self.im)
    }
    #[inline]
    fn abs2(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
    #[inline]
    fn unit_phase(self) -> Self {
        let m = self.abs2().sqrt();
        Complex64::new(self.re / m, self.im / m)
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        Complex64::new(self.re * k, self.im * k)
    }
    #[inline]
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_phase_is_sign() {
        assert_eq!(3.5f64.unit_phase(), 1.0);
        assert_eq!((-0.2f64).unit_phase(), -1.0);
    }

    #[test]
    fn complex_phase_has_unit_modulus() {
        let z = Complex64::new(3.0, -4.0);
        let p = z.unit_phase();
        assert!((p.abs2() - 1.0).abs() < 1e-15);
        assert!((z - p.scale(5.0)).abs() < 1e-12);
    }
}
