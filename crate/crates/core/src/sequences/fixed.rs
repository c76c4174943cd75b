//! Reals modulo 1 stored as big-integer fixed point.
//!
//! Products `t·α mod 1` are formed by exact multiplication of the mantissa
//! followed by masking, so the only error is the one inherited from rounding
//! `α` itself: at most `|t|·2^-frac_bits`.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Smallest precision accepted for stored irrationals.
pub const MIN_FRAC_BITS: u32 = 192;

/// Headroom kept between a multiplier and the stored precision.
pub const BUDGET_MARGIN_BITS: u32 = 64;

const GUARD_BITS: u32 = 32;

/// A named or decimal source for an irrational rotation number, renderable at any precision.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Alpha {
    /// Fractional part of `sqrt(k)`.
    Sqrt(u32),
    /// `(sqrt(5) - 1) / 2`, the fractional part of the golden ratio.
    Golden,
    /// `pi - 3`.
    PiFrac,
    /// A decimal literal, reduced mod 1.
    Decimal(String),
}

impl Alpha {
    pub fn sqrt2() -> Self {
        Alpha::Sqrt(2)
    }

    pub fn render(&self, frac_bits: u32) -> Result<FixedPointReal> {
        if frac_bits < MIN_FRAC_BITS {
            return Err(LabError::InvalidArgument(format!(
                "at least {MIN_FRAC_BITS} fractional bits required, got {frac_bits}"
            )));
        }
        let modulus = BigUint::one() << frac_bits;
        let mantissa = match self {
            Alpha::Sqrt(k) => {
                let scaled = (BigUint::from(*k) << (2 * frac_bits)).sqrt();
                scaled % &modulus
            }
            Alpha::Golden => {
                let s5 = (BigUint::from(5u32) << (2 * frac_bits)).sqrt();
                (s5 - &modulus) >> 1
            }
            Alpha::PiFrac => {
                let pi = pi_scaled(frac_bits + GUARD_BITS) >> GUARD_BITS;
                pi % &modulus
            }
            Alpha::Decimal(text) => {
                let (num, den) = parse_decimal(text)?;
                let scaled = (num << frac_bits).div_floor(&den);
                scaled.mod_floor(&BigInt::from(modulus.clone()))
                    .to_biguint()
                    .expect("mod_floor by a positive modulus is nonnegative")
            }
        };
        Ok(FixedPointReal {
            frac_bits,
            mantissa,
            source: Some(self.clone()),
        })
    }
}

impl FromStr for Alpha {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "sqrt2" => Ok(Alpha::Sqrt(2)),
            "sqrt3" => Ok(Alpha::Sqrt(3)),
            "sqrt5" => Ok(Alpha::Sqrt(5)),
            "golden" => Ok(Alpha::Golden),
            "pi_frac" => Ok(Alpha::PiFrac),
            _ => {
                if let Some(inner) = s.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
                    let k = inner
                        .parse::<u32>()
                        .map_err(|e| LabError::Parse(format!("bad sqrt argument {inner:?}: {e}")))?;
                    return Ok(Alpha::Sqrt(k));
                }
                parse_decimal(s)?;
                Ok(Alpha::Decimal(s.to_string()))
            }
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Sqrt(2) => write!(f, "sqrt2"),
            Alpha::Sqrt(3) => write!(f, "sqrt3"),
            Alpha::Sqrt(5) => write!(f, "sqrt5"),
            Alpha::Sqrt(k) => write!(f, "sqrt({k})"),
            Alpha::Golden => write!(f, "golden"),
            Alpha::PiFrac => write!(f, "pi_frac"),
            Alpha::Decimal(s) => write!(f, "{s}"),
        }
    }
}

impl Serialize for Alpha {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Alpha {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `(numerator, denominator)` of a decimal literal such as `-1.25` or `0.4142`.
fn parse_decimal(text: &str) -> Result<(BigInt, BigInt)> {
    let bad = || LabError::Parse(format!("not a decimal number: {text:?}"));
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num = BigInt::from_str(&digits).map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok((num, den))
}

/// `floor(pi · 2^bits)` up to a few units in the last place, via Machin's formula.
fn pi_scaled(bits: u32) -> BigUint {
    let one = BigInt::one() << bits;
    let pi: BigInt = 16 * arctan_inv(5, &one) - 4 * arctan_inv(239, &one);
    pi.to_biguint().expect("pi is positive")
}

/// `arctan(1/x)` scaled by `one`, truncated term by term.
fn arctan_inv(x: u32, one: &BigInt) -> BigInt {
    let x = BigInt::from(x);
    let x2 = &x * &x;
    let mut power = one / &x;
    let mut sum = BigInt::zero();
    let mut k = 0u32;
    while !power.is_zero() {
        let term = &power / (2 * k + 1);
        if k.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &x2;
        k += 1;
    }
    sum
}

/// A value in `[0, 1)` held as `mantissa / 2^frac_bits`.
#[derive(Clone)]
pub struct FixedPointReal {
    frac_bits: u32,
    mantissa: BigUint,
    /// Where the value was rendered from; present only for rounded irrationals.
    source: Option<Alpha>,
}

impl PartialEq for FixedPointReal {
    fn eq(&self, other: &Self) -> bool {
        self.frac_bits == other.frac_bits && self.mantissa == other.mantissa
    }
}

impl Eq for FixedPointReal {}

impl fmt::Debug for FixedPointReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FixedPointReal({:.18}, {} bits", self.to_f64(), self.frac_bits)?;
        if let Some(src) = &self.source {
            write!(f, ", from {src}")?;
        }
        write!(f, ")")
    }
}

impl FixedPointReal {
    /// An exact dyadic value `mantissa / 2^frac_bits`.
    pub fn from_mantissa(frac_bits: u32, mantissa: BigUint) -> Result<Self> {
        if frac_bits < MIN_FRAC_BITS {
            return Err(LabError::InvalidArgument(format!(
                "at least {MIN_FRAC_BITS} fractional bits required, got {frac_bits}"
            )));
        }
        if mantissa.bits() > frac_bits as u64 {
            return Err(LabError::InvalidArgument("mantissa must be below 2^frac_bits".into()));
        }
        Ok(FixedPointReal {
            frac_bits,
            mantissa,
            source: None,
        })
    }

    pub fn zero(frac_bits: u32) -> Result<Self> {
        FixedPointReal::from_mantissa(frac_bits, BigUint::zero())
    }

    /// The binary value of `x mod 1`, exact for every finite double.
    pub fn from_f64(x: f64, frac_bits: u32) -> Result<Self> {
        if !x.is_finite() {
            return Err(LabError::InvalidArgument(format!("non-finite value {x}")));
        }
        let frac = x - x.floor();
        let frac = if frac >= 1.0 { 0.0 } else { frac };
        // frac = m · 2^e with 53-bit m
        let bits = frac.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let man = if exp == 0 {
            (bits & ((1 << 52) - 1)) << 1
        } else {
            (bits & ((1 << 52) - 1)) | (1 << 52)
        };
        let e = exp - 1075;
        let shift = frac_bits as i64 + e;
        let mantissa = if shift >= 0 {
            BigUint::from(man) << shift as u64
        } else {
            BigUint::from(man) >> (-shift) as u64
        };
        FixedPointReal::from_mantissa(frac_bits, mantissa)
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn source(&self) -> Option<&Alpha> {
        self.source.as_ref()
    }

    /// Whether the stored value is a rounding of an irrational (error bounds apply).
    pub fn is_rounded(&self) -> bool {
        self.source.is_some()
    }

    /// The same quantity at another precision: re-rendered from the source when
    /// there is one, otherwise zero-extended or truncated.
    pub fn with_frac_bits(&self, frac_bits: u32) -> Result<Self> {
        match &self.source {
            Some(src) => src.render(frac_bits),
            None => {
                let mantissa = if frac_bits >= self.frac_bits {
                    &self.mantissa << (frac_bits - self.frac_bits)
                } else {
                    &self.mantissa >> (self.frac_bits - frac_bits)
                };
                FixedPointReal::from_mantissa(frac_bits, mantissa)
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        (self.top_bits() as f64) / 2f64.powi(128)
    }

    /// `floor(value · 2^128)`.
    pub fn top_bits(&self) -> u128 {
        let top = &self.mantissa >> (self.frac_bits - 128);
        top.to_u128().expect("top 128 bits fit in u128")
    }

    fn modulus(&self) -> BigUint {
        BigUint::one() << self.frac_bits
    }

    fn check_same_precision(&self, other: &Self) -> Result<()> {
        if self.frac_bits != other.frac_bits {
            return Err(LabError::InvalidArgument(format!(
                "precision mismatch: {} vs {} fractional bits",
                self.frac_bits, other.frac_bits
            )));
        }
        Ok(())
    }

    /// `(self + other) mod 1`.
    pub fn add_mod1(&self, other: &Self) -> Result<Self> {
        self.check_same_precision(other)?;
        let mut m = &self.mantissa + &other.mantissa;
        let modulus = self.modulus();
        if m >= modulus {
            m -= modulus;
        }
        Ok(FixedPointReal {
            frac_bits: self.frac_bits,
            mantissa: m,
            source: None,
        })
    }

    /// `(self - other) mod 1`.
    pub fn sub_mod1(&self, other: &Self) -> Result<Self> {
        self.check_same_precision(other)?;
        let m = if self.mantissa >= other.mantissa {
            &self.mantissa - &other.mantissa
        } else {
            &self.mantissa + self.modulus() - &other.mantissa
        };
        Ok(FixedPointReal {
            frac_bits: self.frac_bits,
            mantissa: m,
            source: None,
        })
    }

    /// Check that `|t| < 2^(frac_bits - 64)`.
    pub fn check_budget(&self, t: &BigInt) -> Result<()> {
        let needed = t.bits();
        if needed + BUDGET_MARGIN_BITS as u64 > self.frac_bits as u64 {
            return Err(LabError::PrecisionBudgetExceeded {
                needed_bits: needed,
                frac_bits: self.frac_bits,
            });
        }
        Ok(())
    }

    /// `t · value mod 1` by exact big-integer multiplication.
    pub fn mul_int_mod1(&self, t: &BigInt) -> Result<Self> {
        self.check_budget(t)?;
        Ok(self.mul_int_mod1_unchecked(t))
    }

    /// As [`mul_int_mod1`](Self::mul_int_mod1) without the budget check; exact
    /// for the stored dyadic regardless of the size of `t`.
    pub fn mul_int_mod1_unchecked(&self, t: &BigInt) -> Self {
        let prod = &self.mantissa * t.magnitude();
        let modulus = self.modulus();
        let mut m = prod % &modulus;
        if t.sign() == Sign::Minus && !m.is_zero() {
            m = modulus - m;
        }
        FixedPointReal {
            frac_bits: self.frac_bits,
            mantissa: m,
            source: None,
        }
    }

    /// `t · value mod 1` for a small multiplier.
    pub fn mul_u128_mod1(&self, t: u128) -> Result<Self> {
        self.mul_int_mod1(&BigInt::from(t))
    }

    /// Whether the value lies in the open arc `(lo, hi)` of the circle, where
    /// `lo > hi` denotes the arc wrapping through 0. Endpoints are 128-bit dyadics.
    pub fn in_open_arc(&self, arc: &Arc) -> bool {
        let lo = self.cmp_frac128(arc.lo);
        let hi = self.cmp_frac128(arc.hi);
        use std::cmp::Ordering::*;
        if arc.lo < arc.hi {
            lo == Greater && hi == Less
        } else {
            lo == Greater || hi == Less
        }
    }

    /// Exact comparison with the dyadic `x / 2^128`.
    pub fn cmp_frac128(&self, x: u128) -> std::cmp::Ordering {
        let shift = self.frac_bits - 128;
        let top = self.top_bits();
        match top.cmp(&x) {
            std::cmp::Ordering::Equal => {
                let rest_nonzero = shift > 0 && {
                    let mask = (BigUint::one() << shift) - 1u32;
                    !(&self.mantissa & mask).is_zero()
                };
                if rest_nonzero {
                    std::cmp::Ordering::Greater
                } else {
                    std::cmp::Ordering::Equal
                }
            }
            o => o,
        }
    }

    /// Distance to the nearest integer, as a double.
    pub fn circle_norm(&self) -> f64 {
        let v = self.to_f64();
        v.min(1.0 - v)
    }
}

impl fmt::Display for FixedPointReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

/// An open arc of the circle `R/Z` with 128-bit dyadic endpoints; `lo > hi` wraps through 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub lo: u128,
    pub hi: u128,
}

impl Arc {
    /// Arc `(lo, hi)` with endpoints reduced mod 1, e.g. `(-0.05, 0.05)`.
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(LabError::InvalidArgument("arc endpoints must be finite".into()));
        }
        if hi - lo >= 1.0 {
            return Err(LabError::InvalidArgument(
                "arc must be shorter than the full circle".into(),
            ));
        }
        let arc = Arc {
            lo: f64_to_frac128(lo),
            hi: f64_to_frac128(hi),
        };
        if arc.lo == arc.hi {
            return Err(LabError::InvalidArgument("arc is empty mod 1".into()));
        }
        Ok(arc)
    }

    /// Length of the arc in turns.
    pub fn width(&self) -> f64 {
        self.hi.wrapping_sub(self.lo) as f64 / 2f64.powi(128)
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        let v = f64_to_frac128(x);
        if self.lo < self.hi {
            self.lo < v && v < self.hi
        } else {
            v > self.lo || v < self.hi
        }
    }
}

/// `floor((x mod 1) · 2^128)`.
pub fn f64_to_frac128(x: f64) -> u128 {
    let frac = x - x.floor();
    if frac >= 1.0 {
        return 0;
    }
    // exact: scaling by a power of two, then truncation of bits below 2^-128
    (frac * 2f64.powi(128)) as u128
}

/// `{n^k · α}` by exact multiplication, with the budget `n^k < 2^(frac_bits - 64)`.
pub fn frac_part_power(n: u64, k: u32, alpha: &FixedPointReal) -> Result<FixedPointReal> {
    if k == 0 {
        return Err(LabError::InvalidArgument("exponent k must be at least 1".into()));
    }
    let power = BigInt::from(n).pow(k);
    alpha.mul_int_mod1(&power)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt2_digits() {
        let a = Alpha::sqrt2().render(192).unwrap();
        assert!((a.to_f64() - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        // 0.41421356237309504880168872420969807856967187537694...
        let hi = Alpha::sqrt2().render(400).unwrap();
        let ten30 = BigUint::from(10u32).pow(30);
        let digits = (hi.mantissa() * &ten30) >> 400u32;
        assert_eq!(digits.to_string(), "414213562373095048801688724209");
    }

    #[test]
    fn pi_and_golden_digits() {
        let ten30 = BigUint::from(10u32).pow(30);
        let pi = Alpha::PiFrac.render(256).unwrap();
        let d = (pi.mantissa() * &ten30) >> 256u32;
        assert_eq!(d.to_string(), "141592653589793238462643383279");
        let g = Alpha::Golden.render(256).unwrap();
        let d = (g.mantissa() * &ten30) >> 256u32;
        assert_eq!(d.to_string(), "618033988749894848204586834365");
    }

    #[test]
    fn decimal_alpha() {
        let a: Alpha = "1.25".parse().unwrap();
        assert_eq!(a.render(192).unwrap().to_f64(), 0.25);
        let b: Alpha = "-0.25".parse().unwrap();
        assert_eq!(b.render(192).unwrap().to_f64(), 0.75);
        assert!("abc".parse::<Alpha>().is_err());
        assert!(".".parse::<Alpha>().is_err());
        assert_eq!("sqrt(7)".parse::<Alpha>().unwrap(), Alpha::Sqrt(7));
    }

    #[test]
    fn precision_floor() {
        assert!(Alpha::sqrt2().render(128).is_err());
        assert!(FixedPointReal::zero(100).is_err());
    }

    #[test]
    fn frac_power_basics() {
        let a = Alpha::sqrt2().render(192).unwrap();
        assert_eq!(frac_part_power(0, 3, &a).unwrap(), FixedPointReal::zero(192).unwrap());
        assert_eq!(frac_part_power(1, 5, &a).unwrap(), a.with_frac_bits(192).unwrap());
        let v = frac_part_power(2, 1, &a).unwrap().to_f64();
        assert!((v - 0.828427124746190).abs() < 1e-14);
    }

    #[test]
    fn budget_enforced() {
        let a = Alpha::sqrt2().render(192).unwrap();
        assert!(a.mul_int_mod1(&(BigInt::one() << 127u32)).is_ok());
        assert!(matches!(
            a.mul_int_mod1(&(BigInt::one() << 128u32)),
            Err(LabError::PrecisionBudgetExceeded { .. })
        ));
    }

    #[test]
    fn negative_multiplier() {
        let a = Alpha::sqrt2().render(192).unwrap();
        let pos = a.mul_int_mod1(&BigInt::from(3)).unwrap();
        let neg = a.mul_int_mod1(&BigInt::from(-3)).unwrap();
        assert_eq!(pos.add_mod1(&neg).unwrap(), FixedPointReal::zero(192).unwrap());
    }

    #[test]
    fn from_f64_exact() {
        let x = FixedPointReal::from_f64(0.375, 192).unwrap();
        assert_eq!(x.mantissa(), &(BigUint::from(3u32) << 189u32));
        let y = FixedPointReal::from_f64(-0.25, 192).unwrap();
        assert_eq!(y.to_f64(), 0.75);
    }

    #[test]
    fn arcs() {
        let box_ = Arc::new(-0.05, 0.05).unwrap();
        assert!(box_.lo > box_.hi);
        assert!((box_.width() - 0.1).abs() < 1e-15);
        let zero = FixedPointReal::zero(192).unwrap();
        assert!(zero.in_open_arc(&box_));
        let quarter = Arc::new(0.25, 0.75).unwrap();
        let q = FixedPointReal::from_f64(0.25, 192).unwrap();
        assert!(!q.in_open_arc(&quarter));
        let just_above = q.add_mod1(&FixedPointReal::from_mantissa(192, BigUint::one()).unwrap()).unwrap();
        assert!(just_above.in_open_arc(&quarter));
        assert!(Arc::new(0.3, 0.3).is_err());
        assert!(Arc::new(0.0, 1.0).is_err());
    }
}
