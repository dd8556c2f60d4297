//! Signed fixed-point arithmetic with 24 fractional bits.
//!
//! Model weights and per-sample residuals live in this format. The raw
//! representation is a signed 64-bit integer holding `value * 2^24`; model
//! entries are constrained to the signed 32-bit range when committed (the
//! accelerator stores a 32-bit model), while intermediate accumulators may
//! use the full 64-bit range. Right shifts are arithmetic (round toward
//! negative infinity), exactly like the hardware shifter.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// Number of fractional bits: values are `raw / 2^24`.
pub const FRAC_BITS: u32 = 24;

const ONE_RAW: i64 = 1 << FRAC_BITS;

/// A fixed-point number with [`FRAC_BITS`] fractional bits.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fixed(i64);

impl Fixed {
    pub const ZERO: Fixed = Fixed(0);
    pub const ONE: Fixed = Fixed(ONE_RAW);

    /// Wraps a raw `value * 2^24` integer.
    pub const fn from_raw(raw: i64) -> Self {
        Fixed(raw)
    }

    /// The underlying `value * 2^24` integer.
    pub const fn raw(self) -> i64 {
        self.0
    }

    /// Converts from a double, rounding to the nearest representable value
    /// (ties away from zero, matching `f64::round`).
    pub fn from_f64(value: f64) -> Self {
        Fixed((value * ONE_RAW as f64).round() as i64)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / ONE_RAW as f64
    }

    /// Arithmetic right shift of the raw value; truncates toward negative
    /// infinity, mirroring the hardware shifter bit-for-bit.
    pub const fn shr(self, bits: u32) -> Self {
        Fixed(self.0 >> bits)
    }

    /// Whether the raw value fits the signed 32-bit model storage.
    pub const fn fits_i32(self) -> bool {
        self.0 >= i32::MIN as i64 && self.0 <= i32::MAX as i64
    }
}

impl Add for Fixed {
    type Output = Fixed;
    fn add(self, rhs: Fixed) -> Fixed {
        Fixed(self.0 + rhs.0)
    }
}

/// Fixed-point multiply (intermediate product in 128 bits, result truncated
/// toward negative infinity).
impl Mul for Fixed {
    type Output = Fixed;
    fn mul(self, rhs: Fixed) -> Fixed {
        Fixed(((self.0 as i128 * rhs.0 as i128) >> FRAC_BITS) as i64)
    }
}

impl AddAssign for Fixed {
    fn add_assign(&mut self, rhs: Fixed) {
        self.0 += rhs.0;
    }
}

impl Sub for Fixed {
    type Output = Fixed;
    fn sub(self, rhs: Fixed) -> Fixed {
        Fixed(self.0 - rhs.0)
    }
}

impl SubAssign for Fixed {
    fn sub_assign(&mut self, rhs: Fixed) {
        self.0 -= rhs.0;
    }
}

impl Neg for Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        Fixed(-self.0)
    }
}

impl Sum for Fixed {
    fn sum<I: Iterator<Item = Fixed>>(iter: I) -> Fixed {
        iter.fold(Fixed::ZERO, |a, b| a + b)
    }
}

impl fmt::Debug for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fixed({} = {})", self.0, self.to_f64())
    }
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_f64(), f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_and_f64_round_trip() {
        assert_eq!(Fixed::ONE.raw(), 1 << 24);
        assert_eq!(Fixed::from_f64(1.0), Fixed::ONE);
        assert_eq!(Fixed::from_f64(-0.5).raw(), -(1 << 23));
        assert_eq!(Fixed::from_raw(3 << 22).to_f64(), 0.75);
    }

    #[test]
    fn shift_is_arithmetic() {
        assert_eq!(Fixed::from_raw(64).shr(1).raw(), 32);
        assert_eq!(Fixed::from_raw(-8).shr(1).raw(), -4);
        // Floors toward negative infinity, not toward zero.
        assert_eq!(Fixed::from_raw(7).shr(3).raw(), 0);
        assert_eq!(Fixed::from_raw(-7).shr(3).raw(), -1);
    }

    #[test]
    fn mul_truncates() {
        let half = Fixed::from_f64(0.5);
        assert_eq!(half.mul(half), Fixed::from_f64(0.25));
        assert_eq!(Fixed::from_raw(3).mul(half).raw(), 1); // 1.5 raw units floors to 1
        assert_eq!(Fixed::from_raw(-3).mul(half).raw(), -2);
    }

    #[test]
    fn i32_fit_check() {
        assert!(Fixed::from_raw(i32::MAX as i64).fits_i32());
        assert!(Fixed::from_raw(i32::MIN as i64).fits_i32());
        assert!(!Fixed::from_raw(i32::MAX as i64 + 1).fits_i32());
        assert!(!Fixed::from_raw(i32::MIN as i64 - 1).fits_i32());
    }
}
