//! IEEE-754 binary32 values as exact, totally ordered coordinates.
//!
//! Every threshold, bin edge, domain bound and input coordinate the verifier
//! reasons about is a finite binary32 value. Ordering them through their
//! ordinal key turns "the next representable value" into `key + 1`, which is
//! what makes open interval endpoints and empty binary32 ranges exact.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// Key of `f32::MAX`; every finite value has a key in `-MAX_KEY..=MAX_KEY`.
pub const MAX_KEY: i32 = 0x7f7f_ffff;

/// A finite binary32 value. `-0.0` is normalized to `+0.0`.
#[derive(Clone, Copy)]
pub struct Binary32(f32);

impl Binary32 {
    pub const ZERO: Binary32 = Binary32(0.0);

    /// Wraps a finite `f32`; returns `None` for NaN and infinities.
    pub fn new(value: f32) -> Option<Self> {
        if value.is_finite() {
            Some(Binary32(if value == 0.0 { 0.0 } else { value }))
        } else {
            None
        }
    }

    pub fn get(self) -> f32 {
        self.0
    }

    /// Monotone integer key: `a < b` iff `a.key() < b.key()`, and adjacent
    /// binary32 values have adjacent keys.
    pub fn key(self) -> i32 {
        let bits = self.0.to_bits();
        if bits & 0x8000_0000 != 0 {
            -((bits & 0x7fff_ffff) as i32)
        } else {
            bits as i32
        }
    }

    pub fn from_key(key: i32) -> Option<Self> {
        if !(-MAX_KEY..=MAX_KEY).contains(&key) {
            return None;
        }
        let value = if key < 0 {
            f32::from_bits(key.unsigned_abs() | 0x8000_0000)
        } else {
            f32::from_bits(key as u32)
        };
        Some(Binary32(value))
    }

    pub fn next_up(self) -> Option<Self> {
        Self::from_key(self.key() + 1)
    }

    pub fn next_down(self) -> Option<Self> {
        Self::from_key(self.key() - 1)
    }

    /// Exact rational value.
    pub fn to_rational(self) -> BigRational {
        BigRational::from_float(self.0).unwrap_or_else(BigRational::zero)
    }

    /// Parses decimal text and requires the value to be exactly representable.
    pub fn parse_exact(text: &str) -> Option<Self> {
        let value = super::decimal::parse_decimal(text)?;
        Self::from_rational_exact(&value)
    }

    pub fn from_rational_exact(value: &BigRational) -> Option<Self> {
        let down = Self::round_down(value)?;
        (down.to_rational() == *value).then_some(down)
    }

    /// Largest binary32 value `<= value`.
    pub fn round_down(value: &BigRational) -> Option<Self> {
        let mut candidate = Self::approximate(value);
        while candidate.to_rational() > *value {
            candidate = candidate.next_down()?;
        }
        while let Some(next) = candidate.next_up() {
            if next.to_rational() <= *value {
                candidate = next;
            } else {
                break;
            }
        }
        Some(candidate)
    }

    /// Smallest binary32 value `>= value`.
    pub fn round_up(value: &BigRational) -> Option<Self> {
        let mut candidate = Self::approximate(value);
        while candidate.to_rational() < *value {
            candidate = candidate.next_up()?;
        }
        while let Some(prev) = candidate.next_down() {
            if prev.to_rational() >= *value {
                candidate = prev;
            } else {
                break;
            }
        }
        Some(candidate)
    }

    /// Round-to-nearest, ties to even: the cast a float32 consumer performs.
    pub fn round_nearest(value: &BigRational) -> Option<Self> {
        let down = Self::round_down(value);
        let up = Self::round_up(value);
        match (down, up) {
            (Some(d), Some(u)) => {
                if d == u {
                    return Some(d);
                }
                let below = value - d.to_rational();
                let above = u.to_rational() - value;
                Some(match below.cmp(&above) {
                    Ordering::Less => d,
                    Ordering::Greater => u,
                    Ordering::Equal => {
                        if d.0.to_bits() & 1 == 0 {
                            d
                        } else {
                            u
                        }
                    }
                })
            }
            _ => None,
        }
    }

    /// Rounds decimal text to the nearest binary32 value.
    pub fn parse_nearest(text: &str) -> Option<Self> {
        Self::round_nearest(&super::decimal::parse_decimal(text)?)
    }

    fn approximate(value: &BigRational) -> Self {
        let approx = value.to_f64().unwrap_or(0.0);
        let clamped = approx.clamp(-(f32::MAX as f64), f32::MAX as f64) as f32;
        Binary32::new(clamped).unwrap_or(Binary32::ZERO)
    }

    /// Midpoint of two values, rounded to nearest. Exact before rounding
    /// because any binary32 sum is representable in binary64.
    pub fn midpoint(a: Self, b: Self) -> Self {
        let mid = (a.0 as f64 + b.0 as f64) / 2.0;
        Binary32::new(mid as f32).unwrap_or(a)
    }
}

impl PartialEq for Binary32 {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Binary32 {}

impl PartialOrd for Binary32 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Binary32 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl Hash for Binary32 {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl fmt::Debug for Binary32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}f32", self.0)
    }
}

/// Shortest decimal text that round-trips through binary32.
impl fmt::Display for Binary32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<f32> for Binary32 {
    type Error = crate::Error;

    fn try_from(value: f32) -> Result<Self, Self::Error> {
        Binary32::new(value).ok_or_else(|| crate::Error::NonRepresentable(value.to_string()))
    }
}

impl From<Binary32> for BigRational {
    fn from(value: Binary32) -> Self {
        value.to_rational()
    }
}

/// Numerator of `value * scale` when integral.
pub(crate) fn scaled_integer(value: &BigRational, scale: &BigInt) -> Option<BigInt> {
    let scaled = value * BigRational::from_integer(scale.clone());
    scaled.is_integer().then(|| scaled.to_integer())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::decimal::parse_decimal;
    use proptest::prelude::*;

    #[test]
    fn keys_are_adjacent_across_zero() {
        let zero = Binary32::new(-0.0).unwrap();
        assert_eq!(zero.key(), 0);
        assert_eq!(zero.next_up().unwrap().get(), f32::from_bits(1));
        assert_eq!(zero.next_down().unwrap().get(), -f32::from_bits(1));
        assert!(Binary32::from_key(MAX_KEY + 1).is_none());
        assert!(Binary32::new(f32::NAN).is_none());
    }

    #[test]
    fn directed_rounding_brackets_decimal() {
        let r = parse_decimal("0.35").unwrap();
        let d = Binary32::round_down(&r).unwrap();
        let u = Binary32::round_up(&r).unwrap();
        assert!(d.to_rational() < r && r < u.to_rational());
        assert_eq!(d.next_up(), Some(u));
        assert_eq!(Binary32::round_nearest(&r).unwrap().get(), 0.35f32);
    }

    #[test]
    fn exact_values_round_to_themselves() {
        let r = parse_decimal("2.5").unwrap();
        for b in [
            Binary32::round_down(&r),
            Binary32::round_up(&r),
            Binary32::round_nearest(&r),
        ] {
            assert_eq!(b.unwrap().get(), 2.5);
        }
        assert!(Binary32::parse_exact("0.1").is_none());
        assert_eq!(Binary32::parse_exact("-0.375").unwrap().get(), -0.375);
    }

    #[test]
    fn midpoint_rounds_once() {
        let a = Binary32::new(5.0).unwrap();
        let b = Binary32::new(6.05).unwrap();
        assert_eq!(Binary32::midpoint(a, b).get(), ((5.0f64 + 6.05f32 as f64) / 2.0) as f32);
    }

    proptest! {
        #[test]
        fn key_order_matches_float_order(a in -1e30f32..1e30, b in -1e30f32..1e30) {
            let (x, y) = (Binary32::new(a).unwrap(), Binary32::new(b).unwrap());
            prop_assert_eq!(a.partial_cmp(&b).unwrap(), x.key().cmp(&y.key()));
            prop_assert_eq!(Binary32::from_key(x.key()).unwrap(), x);
        }

        #[test]
        fn nearest_matches_hardware_cast(v in -1e6f64..1e6) {
            let r = BigRational::from_float(v).unwrap();
            prop_assert_eq!(Binary32::round_nearest(&r).unwrap().get(), v as f32);
        }
    }
}
