//! Binary fixed-point reals with an explicit error radius.
//!
//! A value is `mant / 2^bits`, and the true quantity it stands for lies within
//! `rad / 2^bits` of it. Every operation either stays exact or widens `rad`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtReal {
    mant: BigInt,
    bits: u32,
    rad: BigUint,
}

fn ldexp(m: f64, e: i64) -> f64 {
    // two-step scaling keeps subnormal and huge exponents honest
    let e = e.clamp(-4000, 4000) as i32;
    let half = e / 2;
    m * 2f64.powi(half) * 2f64.powi(e - half)
}

/// Top 60 bits of |x| as f64 together with the binary exponent dropped.
fn split_big(x: &BigUint) -> (f64, i64) {
    let b = x.bits();
    if b <= 60 {
        (x.to_f64().unwrap_or(0.0), 0)
    } else {
        let shift = b - 60;
        ((x >> shift).to_f64().unwrap_or(0.0), shift as i64)
    }
}

pub(crate) fn big_to_f64(x: &BigInt) -> f64 {
    let (m, e) = split_big(x.magnitude());
    let v = ldexp(m, e);
    if x.sign() == Sign::Minus {
        -v
    } else {
        v
    }
}

/// Natural log of a positive big integer; `-inf` for zero.
pub(crate) fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (m, e) = split_big(x);
    m.ln() + e as f64 * std::f64::consts::LN_2
}

fn div_round(num: &BigInt, den: &BigInt) -> (BigInt, bool) {
    // nearest integer to num/den (den > 0), plus whether it was exact
    let (q, r) = num.div_mod_floor(den);
    if r.is_zero() {
        return (q, true);
    }
    let twice: BigInt = &r << 1;
    if twice >= *den {
        (q + 1, false)
    } else {
        (q, false)
    }
}

impl ExtReal {
    pub fn exact(mant: BigInt, bits: u32) -> Self {
        ExtReal { mant, bits, rad: BigUint::zero() }
    }

    pub fn zero(bits: u32) -> Self {
        Self::exact(BigInt::zero(), bits)
    }

    pub fn from_int(k: &BigInt, bits: u32) -> Self {
        Self::exact(k << bits, bits)
    }

    /// Exact whenever `bits` covers the binary expansion of `x`.
    pub fn from_f64(x: f64, bits: u32) -> Self {
        assert!(x.is_finite(), "ExtReal::from_f64 on a non-finite value");
        if x == 0.0 {
            return Self::zero(bits);
        }
        let raw = x.abs().to_bits();
        let exp = ((raw >> 52) & 0x7ff) as i64;
        let frac = raw & ((1u64 << 52) - 1);
        let (m, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
        let mut mant = BigInt::from(m);
        if x < 0.0 {
            mant = -mant;
        }
        // value = m * 2^e
        let shift = e + bits as i64;
        if shift >= 0 {
            Self::exact(mant << shift as usize, bits)
        } else {
            let den = BigInt::one() << (-shift) as usize;
            let (q, ok) = div_round(&mant, &den);
            ExtReal { mant: q, bits, rad: if ok { BigUint::zero() } else { BigUint::one() } }
        }
    }

    /// Nearest representable value to `num/den`, one ulp of radius if inexact.
    pub fn from_ratio(num: &BigInt, den: &BigInt, bits: u32) -> Self {
        assert!(den.is_positive(), "ExtReal::from_ratio needs a positive denominator");
        let (q, ok) = div_round(&(num << bits), den);
        ExtReal { mant: q, bits, rad: if ok { BigUint::zero() } else { BigUint::one() } }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn radius_ulps(&self) -> &BigUint {
        &self.rad
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    pub fn with_extra_radius(mut self, ulps: &BigUint) -> Self {
        self.rad += ulps;
        self
    }

    /// Re-express at another number of fractional bits.
    pub fn to_bits(&self, bits: u32) -> Self {
        match bits.cmp(&self.bits) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let d = bits - self.bits;
                ExtReal { mant: &self.mant << d, bits, rad: &self.rad << d }
            }
            Ordering::Less => {
                let d = self.bits - bits;
                let den = BigInt::one() << d;
                let (q, ok) = div_round(&self.mant, &den);
                let rad_den = BigUint::one() << d;
                let mut rad = self.rad.div_ceil(&rad_den);
                if !ok {
                    rad += 1u32;
                }
                ExtReal { mant: q, bits, rad }
            }
        }
    }

    fn align(&self, o: &ExtReal) -> (ExtReal, ExtReal) {
        let b = self.bits.max(o.bits);
        (self.to_bits(b), o.to_bits(b))
    }

    pub fn add(&self, o: &ExtReal) -> ExtReal {
        let (a, b) = self.align(o);
        ExtReal { mant: a.mant + b.mant, bits: a.bits, rad: a.rad + b.rad }
    }

    pub fn sub(&self, o: &ExtReal) -> ExtReal {
        let (a, b) = self.align(o);
        ExtReal { mant: a.mant - b.mant, bits: a.bits, rad: a.rad + b.rad }
    }

    pub fn neg(&self) -> ExtReal {
        ExtReal { mant: -&self.mant, bits: self.bits, rad: self.rad.clone() }
    }

    pub fn mul_int(&self, k: &BigInt) -> ExtReal {
        ExtReal { mant: &self.mant * k, bits: self.bits, rad: &self.rad * k.magnitude() }
    }

    /// Exact halving: one more fractional bit.
    pub fn half(&self) -> ExtReal {
        ExtReal { mant: self.mant.clone(), bits: self.bits + 1, rad: self.rad.clone() }
    }

    pub fn double(&self) -> ExtReal {
        self.mul_int(&BigInt::from(2))
    }

    /// Representative in [0, 1).
    pub fn frac(&self) -> ExtReal {
        let one = BigInt::one() << self.bits;
        ExtReal { mant: self.mant.mod_floor(&one), bits: self.bits, rad: self.rad.clone() }
    }

    /// Representative in [-1/2, 1/2).
    pub fn centered(&self) -> ExtReal {
        let mut f = self.frac();
        let half = BigInt::one() << (self.bits.max(1) - 1);
        if self.bits > 0 && f.mant >= half {
            f.mant -= BigInt::one() << self.bits;
        }
        f
    }

    /// Distance to the nearest integer.
    pub fn dist_to_int(&self) -> ExtReal {
        let mut c = self.centered();
        c.mant = c.mant.abs();
        c
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        let (m, e) = split_big(self.mant.magnitude());
        let v = ldexp(m, e - self.bits as i64);
        if self.mant.sign() == Sign::Minus {
            -v
        } else {
            v
        }
    }

    pub fn radius_f64(&self) -> f64 {
        let (m, e) = split_big(&self.rad);
        ldexp(m, e - self.bits as i64)
    }

    /// ln|value|, valid at any magnitude; `-inf` at zero.
    pub fn ln(&self) -> f64 {
        ln_big(self.mant.magnitude()) - self.bits as f64 * std::f64::consts::LN_2
    }

    /// Compares represented values, ignoring radii.
    pub fn cmp_value(&self, o: &ExtReal) -> Ordering {
        let (a, b) = self.align(o);
        a.mant.cmp(&b.mant)
    }

    /// Certified `value >= num/den` for every point inside the radius.
    pub fn certainly_ge_ratio(&self, num: &BigInt, den: &BigInt) -> bool {
        let lo = &self.mant - BigInt::from(self.rad.clone());
        lo * den >= num << self.bits
    }

    /// Certified `value <= num/den` for every point inside the radius.
    pub fn certainly_le_ratio(&self, num: &BigInt, den: &BigInt) -> bool {
        let hi = &self.mant + BigInt::from(self.rad.clone());
        hi * den <= num << self.bits
    }

    /// Fixed-point decimal rendering with `digits` places after the point.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = BigInt::from(10u32).pow(digits as u32);
        let den = BigInt::one() << self.bits;
        let (q, _) = div_round(&(&self.mant * scale), &den);
        let neg = q.is_negative();
        let s = q.abs().to_string();
        let s = if s.len() <= digits { format!("{}{}", "0".repeat(digits + 1 - s.len()), s) } else { s };
        let (int, frac) = s.split_at(s.len() - digits);
        let sign = if neg { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    }

    pub fn radius_string(&self) -> String {
        format!("{:.3e}", self.radius_f64())
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = ((self.bits as f64) * 0.30103).floor() as usize;
        write!(f, "{} ± {}", self.to_decimal(digits.min(80)), self.radius_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_roundtrip_is_exact() {
        for &x in &[0.1, -2.5, 1e-300, 0.6180339887498949, 123456.789] {
            let e = ExtReal::from_f64(x, 1200);
            assert!(e.is_exact());
            assert_eq!(e.to_f64(), x);
        }
    }

    #[test]
    fn reducing_bits_widens_radius() {
        let e = ExtReal::from_ratio(&BigInt::from(1), &BigInt::from(3), 200);
        let r = e.to_bits(64);
        assert!(!r.is_exact());
        assert!((r.to_f64() - 1.0 / 3.0).abs() < 1e-18);
    }

    #[test]
    fn distance_to_integer() {
        let x = ExtReal::from_f64(2.75, 64);
        assert_eq!(x.dist_to_int().to_f64(), 0.25);
        let y = ExtReal::from_f64(-0.3, 64);
        assert!((y.dist_to_int().to_f64() - 0.3).abs() < 1e-15);
        assert_eq!(ExtReal::from_f64(0.5, 64).dist_to_int().to_f64(), 0.5);
    }

    #[test]
    fn ln_handles_tiny_values() {
        let tiny = ExtReal::exact(BigInt::from(3), 5000);
        assert!((tiny.ln() - (3f64.ln() - 5000.0 * std::f64::consts::LN_2)).abs() < 1e-9);
        assert_eq!(ExtReal::zero(10).ln(), f64::NEG_INFINITY);
    }

    #[test]
    fn decimal_rendering() {
        let x = ExtReal::from_f64(-0.125, 64);
        assert_eq!(x.to_decimal(4), "-0.1250");
        assert_eq!(ExtReal::from_f64(3.0, 8).to_decimal(2), "3.00");
    }

    #[test]
    fn ratio_certificates() {
        let x = ExtReal::from_ratio(&BigInt::from(1), &BigInt::from(7), 100);
        assert!(x.certainly_ge_ratio(&BigInt::from(1), &BigInt::from(8)));
        assert!(x.certainly_le_ratio(&BigInt::from(1), &BigInt::from(6)));
        assert!(!x.certainly_le_ratio(&BigInt::from(1), &BigInt::from(8)));
    }
}
