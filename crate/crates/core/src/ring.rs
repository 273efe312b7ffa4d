//! Fixed-point arithmetic over the ring of integers modulo 2^64.
//!
//! Every secret value in the engine is a [`RingValue`]. Real numbers are
//! carried as two's-complement integers with `f` fractional bits; integers
//! (bin indices, labels, comparison bits, counts) are carried unscaled.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An element of Z_{2^64}. All arithmetic wraps.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RingValue(pub u64);

impl RingValue {
    pub const ZERO: RingValue = RingValue(0);
    pub const ONE: RingValue = RingValue(1);

    #[inline]
    pub fn from_i64(v: i64) -> Self {
        RingValue(v as u64)
    }

    /// Signed (two's complement) interpretation.
    #[inline]
    pub fn as_i64(self) -> i64 {
        self.0 as i64
    }

    /// Arithmetic right shift of the signed interpretation.
    #[inline]
    pub fn shr_arith(self, bits: u32) -> Self {
        RingValue((self.as_i64() >> bits) as u64)
    }

    #[inline]
    pub fn shl(self, bits: u32) -> Self {
        RingValue(self.0 << bits)
    }

    #[inline]
    pub fn bit(self, i: u32) -> u64 {
        (self.0 >> i) & 1
    }

    /// Multiplicative inverse of an odd ring element.
    pub fn inverse_odd(self) -> Option<Self> {
        if self.0 & 1 == 0 {
            return None;
        }
        // Newton iteration doubles the number of correct low bits each step.
        let a = self.0;
        let mut x = a;
        for _ in 0..6 {
            x = x.wrapping_mul(2u64.wrapping_sub(a.wrapping_mul(x)));
        }
        Some(RingValue(x))
    }
}

impl fmt::Debug for RingValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R({})", self.as_i64())
    }
}

impl fmt::Display for RingValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for RingValue {
    fn from(v: u64) -> Self {
        RingValue(v)
    }
}

impl Add for RingValue {
    type Output = RingValue;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        RingValue(self.0.wrapping_add(rhs.0))
    }
}

impl Sub for RingValue {
    type Output = RingValue;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        RingValue(self.0.wrapping_sub(rhs.0))
    }
}

impl Mul for RingValue {
    type Output = RingValue;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        RingValue(self.0.wrapping_mul(rhs.0))
    }
}

impl Neg for RingValue {
    type Output = RingValue;
    #[inline]
    fn neg(self) -> Self {
        RingValue(self.0.wrapping_neg())
    }
}

impl AddAssign for RingValue {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for RingValue {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl MulAssign for RingValue {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl Sum for RingValue {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(RingValue::ZERO, |a, b| a + b)
    }
}

/// Public fixed-point parameters. Identical at all parties for a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPointConfig {
    frac_bits: u32,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        FixedPointConfig { frac_bits: Self::DEFAULT_FRAC_BITS }
    }
}

impl FixedPointConfig {
    pub const DEFAULT_FRAC_BITS: u32 = 16;
    pub const MIN_FRAC_BITS: u32 = 8;
    pub const MAX_FRAC_BITS: u32 = 24;

    pub fn new(frac_bits: u32) -> Result<Self> {
        if !(Self::MIN_FRAC_BITS..=Self::MAX_FRAC_BITS).contains(&frac_bits) {
            return Err(Error::Precision(frac_bits));
        }
        Ok(FixedPointConfig { frac_bits })
    }

    #[inline]
    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    /// The encoding of 1.0.
    #[inline]
    pub fn one(&self) -> RingValue {
        RingValue(1u64 << self.frac_bits)
    }

    /// Exclusive bound on |x| accepted by [`encode`](Self::encode).
    pub fn limit(&self) -> f64 {
        2f64.powi(62 - 2 * self.frac_bits as i32)
    }

    /// `round(x * 2^f)` with ties away from zero, reduced mod 2^64.
    pub fn encode(&self, x: f64) -> Result<RingValue> {
        self.encode_at(x, self.frac_bits)
    }

    /// Encode with an explicit number of fractional bits (range checked
    /// against the configured precision).
    pub fn encode_at(&self, x: f64, frac_bits: u32) -> Result<RingValue> {
        let limit = self.limit();
        if !x.is_finite() || x.abs() >= limit {
            return Err(Error::Range { value: x, limit });
        }
        let scaled = (x * 2f64.powi(frac_bits as i32)).round();
        Ok(RingValue::from_i64(scaled as i64))
    }

    pub fn decode(&self, v: RingValue) -> f64 {
        decode_at(v, self.frac_bits)
    }

    /// Removes `f` fractional bits from the product of two encodings:
    /// arithmetic shift, i.e. rounding toward negative infinity.
    pub fn truncate(&self, v: RingValue) -> RingValue {
        v.shr_arith(self.frac_bits)
    }

    /// Fixed-point product of two encodings computed in the clear.
    pub fn mul(&self, a: RingValue, b: RingValue) -> RingValue {
        self.truncate(a * b)
    }
}

/// Signed interpretation divided by `2^frac_bits`.
pub fn decode_at(v: RingValue, frac_bits: u32) -> f64 {
    v.as_i64() as f64 / 2f64.powi(frac_bits as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> FixedPointConfig {
        FixedPointConfig::default()
    }

    #[test]
    fn encode_examples() {
        let c = cfg();
        assert_eq!(c.encode(0.0).unwrap(), RingValue(0));
        assert_eq!(c.encode(1.0).unwrap(), RingValue(65536));
        assert_eq!(c.encode(-0.5).unwrap(), RingValue(0u64.wrapping_sub(32768)));
    }

    #[test]
    fn decode_examples() {
        let c = cfg();
        assert_eq!(c.decode(RingValue(65536)), 1.0);
        assert_eq!(c.decode(RingValue(0)), 0.0);
        assert_eq!(c.decode(RingValue(0u64.wrapping_sub(32768))), -0.5);
    }

    #[test]
    fn encode_rounds_half_away_from_zero() {
        let c = cfg();
        let half_ulp = 0.5 / 65536.0;
        assert_eq!(c.encode(half_ulp).unwrap(), RingValue(1));
        assert_eq!(c.encode(-half_ulp).unwrap(), RingValue::from_i64(-1));
    }

    #[test]
    fn encode_rejects_out_of_range() {
        let c = cfg();
        assert!(matches!(c.encode(2f64.powi(30)), Err(Error::Range { .. })));
        assert!(matches!(c.encode(f64::NAN), Err(Error::Range { .. })));
        assert!(c.encode(2f64.powi(30) - 1.0).is_ok());
    }

    #[test]
    fn precision_is_validated() {
        assert!(FixedPointConfig::new(7).is_err());
        assert!(FixedPointConfig::new(25).is_err());
        assert_eq!(FixedPointConfig::new(24).unwrap().frac_bits(), 24);
    }

    #[test]
    fn truncate_examples() {
        let c = cfg();
        let e = |x| c.encode(x).unwrap();
        assert_eq!(c.truncate(e(1.0) * e(1.0)), e(1.0));
        assert_eq!(c.truncate(e(0.5) * e(0.5)), e(0.25));
        // Scalar oracle: floor((-1.5 * 2^16) * (2.0 * 2^16) / 2^16) over i128.
        let oracle = ((-98304i128) * 131072i128).div_euclid(65536) as i64;
        assert_eq!(oracle, -196608);
        assert_eq!(c.truncate(e(-1.5) * e(2.0)), RingValue::from_i64(oracle));
        assert_eq!(c.truncate(e(-1.5) * e(2.0)), e(-3.0));
    }

    #[test]
    fn truncate_floors_toward_negative_infinity() {
        let c = cfg();
        // -1 ulp * 0.5 = -0.5 ulp -> floors to -1 ulp.
        let v = c.truncate(RingValue::from_i64(-1) * c.encode(0.5).unwrap());
        assert_eq!(v, RingValue::from_i64(-1));
    }

    #[test]
    fn odd_inverse() {
        for a in [1u64, 3, 5, 0xdead_beef | 1, u64::MAX] {
            let inv = RingValue(a).inverse_odd().unwrap();
            assert_eq!(RingValue(a) * inv, RingValue::ONE);
        }
        assert!(RingValue(6).inverse_odd().is_none());
    }

    proptest! {
        #[test]
        fn product_within_one_ulp(x in -1000.0f64..1000.0, y in -1000.0f64..1000.0) {
            let c = cfg();
            let ex = c.encode(x).unwrap();
            let ey = c.encode(y).unwrap();
            let (gx, gy) = (c.decode(ex), c.decode(ey));
            let got = c.decode(c.mul(ex, ey));
            prop_assert!((got - gx * gy).abs() <= 1.0 / 65536.0);
        }

        #[test]
        fn grid_round_trip_and_exact_addition(a in -(1i64 << 40)..(1i64 << 40), b in -(1i64 << 40)..(1i64 << 40)) {
            let c = cfg();
            let x = a as f64 / 65536.0;
            let y = b as f64 / 65536.0;
            prop_assert_eq!(c.decode(c.encode(x).unwrap()), x);
            let sum = c.encode(x).unwrap() + c.encode(y).unwrap();
            prop_assert_eq!(c.decode(sum), x + y);
        }
    }
}
