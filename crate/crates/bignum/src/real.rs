use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::BigError;
use crate::precision::Precision;

/// Binary floating-point number `mant * 2^exp` with a fixed significand width.
///
/// Non-zero values are kept normalized so that `|mant|` has exactly `bits`
/// bits; this makes structural equality coincide with numerical equality at
/// equal precision. The exponent is an `i64`, so the representable range is
/// far beyond `10^(±10^6)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BigReal {
    pub(crate) mant: BigInt,
    pub(crate) exp: i64,
    pub(crate) bits: u64,
    pub(crate) digits: u32,
}

/// Rounds `mant * 2^exp` to `bits` significant bits, half to even.
/// `sticky` marks a non-zero remainder that was already discarded below `mant`.
pub(crate) fn normalize(mant: BigInt, exp: i64, bits: u64, sticky: bool) -> (BigInt, i64) {
    if mant.is_zero() {
        return (mant, 0);
    }
    let len = mant.bits();
    if len <= bits {
        // Exact: only a discarded sticky bit could matter, and it sits below
        // the last place after the left shift, so it cannot trigger rounding
        // unless the mantissa was already full width.
        let shift = bits - len;
        return (mant << shift, exp - shift as i64);
    }
    let shift = len - bits;
    let negative = mant.is_negative();
    let mag = mant.magnitude();
    let mut q: BigUint = mag >> shift;
    let half = BigUint::one() << (shift - 1);
    let rem = mag - (&q << shift);
    let round_up = match rem.cmp(&half) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => sticky || q.is_odd(),
    };
    let mut e = exp + shift as i64;
    if round_up {
        q += 1u32;
        if q.bits() > bits {
            q >>= 1;
            e += 1;
        }
    }
    let sign = if negative { Sign::Minus } else { Sign::Plus };
    (BigInt::from_biguint(sign, q), e)
}

fn digits_for_bits(bits: u64) -> u32 {
    ((bits.saturating_sub(1)) as f64 * std::f64::consts::LOG10_2).floor().max(1.0) as u32
}

impl BigReal {
    pub(crate) fn from_parts(mant: BigInt, exp: i64, bits: u64, digits: u32, sticky: bool) -> Self {
        let (mant, exp) = normalize(mant, exp, bits, sticky);
        BigReal { mant, exp, bits, digits }
    }

    /// Value with an internal working width that is not tied to a decimal precision.
    pub(crate) fn with_bits(mant: BigInt, exp: i64, bits: u64) -> Self {
        Self::from_parts(mant, exp, bits, digits_for_bits(bits), false)
    }

    pub fn zero(prec: Precision) -> Self {
        BigReal { mant: BigInt::zero(), exp: 0, bits: prec.bits(), digits: prec.get() }
    }

    pub fn one(prec: Precision) -> Self {
        Self::from_i64(1, prec)
    }

    pub fn from_i64(v: i64, prec: Precision) -> Self {
        Self::from_parts(BigInt::from(v), 0, prec.bits(), prec.get(), false)
    }

    pub fn from_bigint(v: BigInt, prec: Precision) -> Self {
        Self::from_parts(v, 0, prec.bits(), prec.get(), false)
    }

    /// Exact conversion of a finite `f64` (rounded only if `prec` is narrower than 53 bits).
    pub fn from_f64(v: f64, prec: Precision) -> Self {
        assert!(v.is_finite(), "cannot convert non-finite f64 to BigReal");
        if v == 0.0 {
            return Self::zero(prec);
        }
        let raw = v.to_bits();
        let negative = raw >> 63 == 1;
        let biased = ((raw >> 52) & 0x7ff) as i64;
        let frac = raw & ((1u64 << 52) - 1);
        let (m, e) = if biased == 0 { (frac, -1074) } else { (frac | (1u64 << 52), biased - 1075) };
        let mut mant = BigInt::from(m);
        if negative {
            mant = -mant;
        }
        Self::from_parts(mant, e, prec.bits(), prec.get(), false)
    }

    /// Correctly rounded `num / den`.
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: Precision) -> Result<Self, BigError> {
        if den.is_zero() {
            return Err(BigError::DivisionByZero);
        }
        let (mant, exp, sticky) = div_parts(num, 0, den, 0, prec.bits());
        Ok(Self::from_parts(mant, exp, prec.bits(), prec.get(), sticky))
    }

    pub fn precision(&self) -> Precision {
        Precision::digits(self.digits)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Re-rounds to another precision.
    pub fn with_precision(&self, prec: Precision) -> Self {
        Self::from_parts(self.mant.clone(), self.exp, prec.bits(), prec.get(), false)
    }

    pub(crate) fn to_bits_width(&self, bits: u64) -> Self {
        Self::from_parts(self.mant.clone(), self.exp, bits, digits_for_bits(bits), false)
    }

    pub(crate) fn retag(mut self, prec: Precision) -> Self {
        let (m, e) = normalize(self.mant, self.exp, prec.bits(), false);
        self.mant = m;
        self.exp = e;
        self.bits = prec.bits();
        self.digits = prec.get();
        self
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// Exponent of the leading bit plus one: `2^(top-1) <= |x| < 2^top`.
    /// Returns `i64::MIN` for zero.
    pub fn top(&self) -> i64 {
        if self.is_zero() {
            i64::MIN
        } else {
            self.exp + self.mant.bits() as i64
        }
    }

    pub fn abs(&self) -> Self {
        BigReal { mant: self.mant.abs(), ..self.clone() }
    }

    /// Multiplies by `2^k` exactly.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        BigReal { exp: self.exp + k, ..self.clone() }
    }

    fn joint_bits(&self, other: &Self) -> (u64, u32) {
        if self.bits >= other.bits {
            (self.bits, self.digits)
        } else {
            (other.bits, other.digits)
        }
    }

    fn add_impl(&self, other: &Self, negate_other: bool) -> Self {
        let (bits, digits) = self.joint_bits(other);
        let other_mant = if negate_other { -&other.mant } else { other.mant.clone() };
        if other.is_zero() {
            return Self::from_parts(self.mant.clone(), self.exp, bits, digits, false);
        }
        if self.is_zero() {
            return Self::from_parts(other_mant, other.exp, bits, digits, false);
        }
        let self_first = self.top() >= other.top();
        let (big_m, big_e, small_m, small_e) = if self_first {
            (self.mant.clone(), self.exp, other_mant, other.exp)
        } else {
            (other_mant, other.exp, self.mant.clone(), self.exp)
        };
        let big_top = big_e + big_m.bits() as i64;
        let small_top = small_e + small_m.bits() as i64;
        if big_top - small_top > bits as i64 + 4 {
            // The smaller operand only influences rounding; collapse it to a
            // sticky unit strictly below the rounding position.
            let low = (big_top - bits as i64 - 4).min(big_e);
            let shifted = big_m << (big_e - low) as u64;
            let sticky_unit = if small_m.is_negative() { -1 } else { 1 };
            let mant = (shifted << 1u32) + sticky_unit;
            return Self::from_parts(mant, low - 1, bits, digits, false);
        }
        let e = big_e.min(small_e);
        let mant = (big_m << (big_e - e) as u64) + (small_m << (small_e - e) as u64);
        Self::from_parts(mant, e, bits, digits, false)
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, BigError> {
        if other.is_zero() {
            return Err(BigError::DivisionByZero);
        }
        let (bits, digits) = self.joint_bits(other);
        if self.is_zero() {
            return Ok(BigReal { mant: BigInt::zero(), exp: 0, bits, digits });
        }
        let (mant, exp, sticky) = div_parts(&self.mant, self.exp, &other.mant, other.exp, bits);
        Ok(Self::from_parts(mant, exp, bits, digits, sticky))
    }

    pub fn recip(&self) -> Result<Self, BigError> {
        Self::one(self.precision()).retag_bits(self.bits).checked_div(self)
    }

    fn retag_bits(mut self, bits: u64) -> Self {
        self.bits = bits;
        let (m, e) = normalize(self.mant, self.exp, bits, false);
        self.mant = m;
        self.exp = e;
        self
    }

    /// Division by a small positive integer.
    pub fn div_u64(&self, d: u64) -> Self {
        assert!(d != 0, "division by zero");
        if self.is_zero() {
            return self.clone();
        }
        let (mant, exp, sticky) = div_parts(&self.mant, self.exp, &BigInt::from(d), 0, self.bits);
        Self::from_parts(mant, exp, self.bits, self.digits, sticky)
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        Self::from_parts(&self.mant * k, self.exp, self.bits, self.digits, false)
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// Correctly rounded square root; errors on negative input.
    pub fn sqrt(&self) -> Result<Self, BigError> {
        if self.is_negative() {
            return Err(BigError::InvalidPowerDomain("square root of a negative number".into()));
        }
        if self.is_zero() {
            return Ok(self.clone());
        }
        let bits = self.bits;
        // Scale so that the integer square root carries bits+2 bits.
        let want = 2 * (bits + 2);
        let len = self.mant.bits();
        let mut shift = want.saturating_sub(len) as i64;
        if (self.exp - shift) % 2 != 0 {
            shift += 1;
        }
        let scaled: BigInt = &self.mant << shift as u64;
        let root = scaled.sqrt();
        let sticky = &root * &root != scaled;
        let mant = (root << 1u32) + if sticky { 1 } else { 0 };
        Ok(Self::from_parts(mant, (self.exp - shift) / 2 - 1, bits, self.digits, false))
    }

    /// Integer part toward negative infinity.
    pub fn floor_int(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as u64
        } else {
            let d = BigInt::one() << (-self.exp) as u64;
            self.mant.div_floor(&d)
        }
    }

    /// Nearest integer, ties away from zero.
    pub fn round_int(&self) -> BigInt {
        let half = BigReal::from_parts(BigInt::one(), -1, self.bits.max(2), self.digits, false);
        if self.is_negative() {
            -((-self) + half).floor_int()
        } else {
            (self + &half).floor_int()
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let (m, e) = normalize(self.mant.clone(), self.exp, 53, false);
        let m = m.to_i64().expect("53-bit mantissa fits in i64") as f64;
        // Split the scaling so intermediate powers stay finite.
        let e1 = (e / 2).clamp(-1100, 1100) as i32;
        let e2 = (e - e1 as i64).clamp(-1100, 1100) as i32;
        m * 2f64.powi(e1) * 2f64.powi(e2)
    }

    /// Approximate `log10 |x|`, valid far outside the `f64` range.
    pub fn log10_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let len = self.mant.bits() as i64;
        let keep = len.min(60);
        let lead = (self.mant.magnitude() >> (len - keep) as u64).to_u64().unwrap_or(0) as f64;
        lead.log10() + (self.exp + len - keep) as f64 * std::f64::consts::LOG10_2
    }

    /// Parses a decimal literal such as `-1.25e-300`, rounding correctly.
    pub fn parse_decimal(s: &str, prec: Precision) -> Result<Self, BigError> {
        let (digits, exp10) = parse_decimal_parts(s)?;
        Ok(Self::from_scaled_decimal(&digits, exp10, prec))
    }

    pub(crate) fn from_scaled_decimal(digits: &BigInt, exp10: i64, prec: Precision) -> Self {
        if digits.is_zero() {
            return Self::zero(prec);
        }
        if exp10 >= 0 {
            let v = digits * pow10(exp10 as u64);
            Self::from_bigint(v, prec)
        } else {
            let den = pow10((-exp10) as u64);
            Self::from_ratio(digits, &den, prec).expect("non-zero power of ten")
        }
    }

    /// Exact decimal rounding to `sig` significant digits: returns the
    /// integer significand `n` (with `10^(sig-1) <= n < 10^sig`) and the
    /// decimal exponent `e` of the leading digit, so `|x| ~ n * 10^(e-sig+1)`.
    pub fn decimal_digits(&self, sig: u32) -> Option<(bool, BigInt, i64)> {
        if self.is_zero() {
            return None;
        }
        let sig = sig.max(1);
        let mut e10 = self.log10_abs().floor() as i64;
        let lower = pow10(sig as u64 - 1);
        let upper = pow10(sig as u64);
        let mag = self.mant.abs();
        for _ in 0..4 {
            let k = sig as i64 - 1 - e10;
            let mut num = mag.clone();
            let mut den = BigInt::one();
            if self.exp >= 0 {
                num <<= self.exp as u64;
            } else {
                den <<= (-self.exp) as u64;
            }
            if k >= 0 {
                num *= pow10(k as u64);
            } else {
                den *= pow10((-k) as u64);
            }
            let (q, r) = num.div_rem(&den);
            let twice = &r << 1u32;
            let n = match twice.cmp(&den) {
                Ordering::Greater => q + 1,
                Ordering::Less => q,
                Ordering::Equal => {
                    if q.is_odd() {
                        q + 1
                    } else {
                        q
                    }
                }
            };
            if n >= upper {
                e10 += 1;
                continue;
            }
            if n < lower {
                e10 -= 1;
                continue;
            }
            return Some((self.is_negative(), n, e10));
        }
        unreachable!("decimal exponent estimate off by more than a few units")
    }

    /// Scientific notation with exactly `sig` significant digits, e.g. `-1.2500e-3`.
    pub fn to_sci_string(&self, sig: u32) -> String {
        let sig = sig.max(1);
        match self.decimal_digits(sig) {
            None => {
                if sig == 1 {
                    "0e0".to_string()
                } else {
                    format!("0.{}e0", "0".repeat(sig as usize - 1))
                }
            }
            Some((neg, n, e10)) => {
                let s = n.to_string();
                let (head, tail) = s.split_at(1);
                let sign = if neg { "-" } else { "" };
                if tail.is_empty() {
                    format!("{sign}{head}e{e10}")
                } else {
                    format!("{sign}{head}.{tail}e{e10}")
                }
            }
        }
    }

    /// Positional notation with `sig` significant digits when the exponent is
    /// moderate, scientific otherwise. Trailing zeros are kept.
    pub fn to_sig_string(&self, sig: u32) -> String {
        let sig = sig.max(1);
        match self.decimal_digits(sig) {
            None => "0".to_string(),
            Some((neg, n, e10)) => {
                if !(-8..=15).contains(&e10) {
                    return self.to_sci_string(sig);
                }
                let s = n.to_string();
                let sign = if neg { "-" } else { "" };
                let body = if e10 < 0 {
                    format!("0.{}{}", "0".repeat((-e10 - 1) as usize), s)
                } else if (e10 as usize) + 1 >= s.len() {
                    format!("{}{}", s, "0".repeat(e10 as usize + 1 - s.len()))
                } else {
                    let (a, b) = s.split_at(e10 as usize + 1);
                    format!("{a}.{b}")
                };
                format!("{sign}{body}")
            }
        }
    }

    /// Serialization with enough digits that parsing back at the same
    /// precision reproduces the value bit for bit.
    pub fn to_exact_string(&self) -> String {
        self.to_sci_string(self.digits + 2)
    }

    /// Inverse of [`BigReal::to_exact_string`]: the precision is recovered
    /// from the number of significant digits.
    pub fn from_exact_string(s: &str) -> Result<Self, BigError> {
        let sig = count_significant(s).ok_or_else(|| BigError::Parse(s.to_string()))?;
        if sig < 3 {
            return Err(BigError::Parse(s.to_string()));
        }
        Self::parse_decimal(s, Precision::digits(sig - 2))
    }
}

pub(crate) fn pow10(k: u64) -> BigInt {
    num_traits::pow(BigInt::from(10u32), k as usize)
}

/// `(a * 2^ea) / (b * 2^eb)` with at least `bits + 2` quotient bits and a sticky flag.
fn div_parts(a: &BigInt, ea: i64, b: &BigInt, eb: i64, bits: u64) -> (BigInt, i64, bool) {
    let want = bits as i64 + 3;
    let shift = (want + b.bits() as i64 - a.bits() as i64).max(0);
    let num = a << shift as u64;
    let (q, r) = num.div_rem(b);
    let sticky = !r.is_zero();
    let mut mant = q << 1u32;
    if sticky {
        if mant.is_negative() || (mant.is_zero() && (a.is_negative() != b.is_negative())) {
            mant -= 1;
        } else {
            mant += 1;
        }
    }
    (mant, ea - eb - shift - 1, false)
}

fn parse_decimal_parts(s: &str) -> Result<(BigInt, i64), BigError> {
    let err = || BigError::Parse(s.to_string());
    let t = s.trim();
    let (neg, body) = match t.as_bytes().first() {
        Some(b'-') => (true, &t[1..]),
        Some(b'+') => (false, &t[1..]),
        _ => (false, t),
    };
    let (mantissa, exp_part) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], Some(&body[i + 1..])),
        None => (body, None),
    };
    let exp10: i64 = match exp_part {
        Some(e) => e.parse().map_err(|_| err())?,
        None => 0,
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all = format!("{int_part}{frac_part}");
    let mut digits: BigInt = all.parse().map_err(|_| err())?;
    if neg {
        digits = -digits;
    }
    Ok((digits, exp10 - frac_part.len() as i64))
}

fn count_significant(s: &str) -> Option<u32> {
    let t = s.trim().trim_start_matches(['-', '+']);
    let mantissa = t.split(['e', 'E']).next()?;
    let ds: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let trimmed = ds.trim_start_matches('0');
    if trimmed.is_empty() {
        // Zero is written with the full digit count, leading zero included.
        Some(ds.len() as u32)
    } else {
        Some(trimmed.len() as u32)
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(cmp_values(self, other))
    }
}

pub(crate) fn cmp_values(a: &BigReal, b: &BigReal) -> Ordering {
    let sa = a.signum();
    let sb = b.signum();
    if sa != sb {
        return sa.cmp(&sb);
    }
    if sa == 0 {
        return Ordering::Equal;
    }
    let mag = if a.top() != b.top() {
        a.top().cmp(&b.top())
    } else {
        let e = a.exp.min(b.exp);
        let ma = a.mant.magnitude() << (a.exp - e) as u64;
        let mb = b.mant.magnitude() << (b.exp - e) as u64;
        ma.cmp(&mb)
    };
    if sa > 0 {
        mag
    } else {
        mag.reverse()
    }
}

impl BigReal {
    pub fn max_of<'a>(&'a self, other: &'a Self) -> &'a Self {
        if cmp_values(self, other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    pub fn min_of<'a>(&'a self, other: &'a Self) -> &'a Self {
        if cmp_values(self, other) == Ordering::Greater {
            other
        } else {
            self
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl<'a> $trait<&'a BigReal> for &'a BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &'a BigReal) -> BigReal {
                let f: fn(&BigReal, &BigReal) -> BigReal = $body;
                f(self, rhs)
            }
        }
        impl $trait<BigReal> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a BigReal> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &'a BigReal) -> BigReal {
                (&self).$method(rhs)
            }
        }
        impl<'a> $trait<BigReal> for &'a BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| a.add_impl(b, false));
forward_binop!(Sub, sub, |a, b| a.add_impl(b, true));
forward_binop!(Mul, mul, |a, b| {
    let (bits, digits) = a.joint_bits(b);
    BigReal::from_parts(&a.mant * &b.mant, a.exp + b.exp, bits, digits, false)
});
forward_binop!(Div, div, |a, b| a.checked_div(b).expect("division by zero"));

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(mut self) -> BigReal {
        self.mant = -self.mant;
        self
    }
}

impl Neg for &BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        -self.clone()
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => f.write_str(&self.to_sci_string(p as u32)),
            None => f.write_str(&self.to_sci_string(self.digits)),
        }
    }
}

impl serde::Serialize for BigReal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_exact_string())
    }
}

impl<'de> serde::Deserialize<'de> for BigReal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        BigReal::from_exact_string(&s).map_err(serde::de::Error::custom)
    }
}
