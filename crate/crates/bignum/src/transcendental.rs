use std::cell::RefCell;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::BigError;
use crate::precision::Precision;
use crate::real::BigReal;

const GUARD: u64 = 24;

thread_local! {
    static PI_CACHE: RefCell<HashMap<u64, BigReal>> = RefCell::new(HashMap::new());
    static LN2_CACHE: RefCell<HashMap<u64, BigReal>> = RefCell::new(HashMap::new());
}

/// `atan(1/x)` scaled by `2^bits`, in integer fixed point.
fn atan_inv_fixed(x: u64, bits: u64) -> BigInt {
    let one = BigInt::one() << bits;
    let x = BigInt::from(x);
    let x2 = &x * &x;
    let mut power = &one / &x;
    let mut sum = power.clone();
    let mut k = 1u64;
    loop {
        power = &power / &x2;
        if power.is_zero() {
            break;
        }
        let term = &power / BigInt::from(2 * k + 1);
        if k % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        k += 1;
    }
    sum
}

/// `atanh(1/x)` scaled by `2^bits`.
fn atanh_inv_fixed(x: u64, bits: u64) -> BigInt {
    let one = BigInt::one() << bits;
    let x = BigInt::from(x);
    let x2 = &x * &x;
    let mut power = &one / &x;
    let mut sum = power.clone();
    let mut k = 1u64;
    loop {
        power = &power / &x2;
        if power.is_zero() {
            break;
        }
        sum += &power / BigInt::from(2 * k + 1);
        k += 1;
    }
    sum
}

fn cached(
    cache: &'static std::thread::LocalKey<RefCell<HashMap<u64, BigReal>>>,
    bits: u64,
    f: impl FnOnce(u64) -> BigInt,
) -> BigReal {
    if let Some(v) = cache.with(|c| c.borrow().get(&bits).cloned()) {
        return v;
    }
    let work = bits + 32;
    let v = BigReal::with_bits(f(work), -(work as i64), bits);
    cache.with(|c| c.borrow_mut().insert(bits, v.clone()));
    v
}

/// π with `bits` significant bits (Machin's formula).
pub(crate) fn pi_bits(bits: u64) -> BigReal {
    cached(&PI_CACHE, bits, |w| (atan_inv_fixed(5, w) << 4u32) - (atan_inv_fixed(239, w) << 2u32))
}

/// ln 2 = 2 atanh(1/3).
pub(crate) fn ln2_bits(bits: u64) -> BigReal {
    cached(&LN2_CACHE, bits, |w| atanh_inv_fixed(3, w) << 1u32)
}

fn isqrt_u64(v: u64) -> u64 {
    (v as f64).sqrt() as u64
}

fn exp_work(x: &BigReal, w: u64) -> BigReal {
    let one = BigReal::with_bits(BigInt::one(), 0, w);
    if x.is_zero() {
        return one;
    }
    // x = k ln2 + r with |r| <= ln2/2; ln2 needs extra bits for the size of k.
    let kbits = x.top().max(0) as u64;
    let ln2 = ln2_bits(w + kbits + 8);
    let k = (x / &ln2).round_int();
    let r = (x - &ln2 * &BigReal::with_bits(k.clone(), 0, w + kbits + 8)).to_bits_width(w);
    let s = (isqrt_u64(w) as i64 + r.top()).max(0);
    let r = r.mul_pow2(-s);
    // Taylor series for exp(r) - 1 keeps relative accuracy for tiny r.
    let mut term = r.clone();
    let mut sum = r.clone();
    let mut i = 2u64;
    loop {
        term = (&term * &r).div_u64(i);
        if term.is_zero() || term.top() < sum.top() - w as i64 - 2 {
            break;
        }
        sum = &sum + &term;
        i += 1;
    }
    // (1+e)^2 - 1 = e(2+e)
    for _ in 0..s {
        let two_plus = &sum + &one.mul_pow2(1);
        sum = &sum * &two_plus;
    }
    let k = k.to_i64().expect("exponent range exceeded in exp");
    (&sum + &one).mul_pow2(k)
}

fn ln_work(x: &BigReal, w: u64) -> BigReal {
    // x = m 2^e with m in [1/sqrt2, sqrt2).
    let mut e = x.top();
    let mut m = x.mul_pow2(-e).to_bits_width(w);
    let threshold = BigReal::with_bits(BigInt::from(181u32), -8, w); // 0.707
    if m < threshold {
        m = m.mul_pow2(1);
        e -= 1;
    }
    let one = BigReal::with_bits(BigInt::one(), 0, w);
    let z = (&m - &one).checked_div(&(&m + &one)).expect("m+1 > 0");
    let mut ln_m = BigReal::with_bits(BigInt::zero(), 0, w);
    if !z.is_zero() {
        let z2 = &z * &z;
        let mut power = z.clone();
        let mut sum = z.clone();
        let mut k = 1u64;
        loop {
            power = &power * &z2;
            let term = power.div_u64(2 * k + 1);
            if term.is_zero() || term.top() < sum.top() - w as i64 - 2 {
                break;
            }
            sum = &sum + &term;
            k += 1;
        }
        ln_m = sum.mul_pow2(1);
    }
    if e == 0 {
        return ln_m;
    }
    let ebits = 64 - e.unsigned_abs().leading_zeros() as u64;
    let ln2 = ln2_bits(w + ebits + 4);
    &ln_m + &(&ln2 * &BigReal::with_bits(BigInt::from(e), 0, w + ebits + 4)).to_bits_width(w)
}

/// Returns `(sin r, 1 - cos r)` for `|r| <= pi/4`, both with relative accuracy.
fn sin_versin_small(r: &BigReal, w: u64) -> (BigReal, BigReal) {
    let zero = BigReal::with_bits(BigInt::zero(), 0, w);
    if r.is_zero() {
        return (zero.clone(), zero);
    }
    let s = (isqrt_u64(w) as i64 / 2 + r.top()).max(0);
    let h = r.mul_pow2(-s);
    let h2 = &h * &h;
    // sin series
    let mut term = h.clone();
    let mut sin = h.clone();
    let mut i = 1u64;
    loop {
        term = -(&term * &h2).div_u64((2 * i) * (2 * i + 1));
        if term.is_zero() || term.top() < sin.top() - w as i64 - 2 {
            break;
        }
        sin = &sin + &term;
        i += 1;
    }
    // 1 - cos series
    let mut term = h2.mul_pow2(-1);
    let mut ver = term.clone();
    let mut i = 2u64;
    loop {
        term = -(&term * &h2).div_u64((2 * i - 1) * (2 * i));
        if term.is_zero() || term.top() < ver.top() - w as i64 - 2 {
            break;
        }
        ver = &ver + &term;
        i += 1;
    }
    let one = BigReal::with_bits(BigInt::one(), 0, w);
    for _ in 0..s {
        // sin 2h = 2 sin h cos h, 1 - cos 2h = 2 sin^2 h
        let new_sin = (&sin * &(&one - &ver)).mul_pow2(1);
        ver = (&sin * &sin).mul_pow2(1);
        sin = new_sin;
    }
    (sin, ver)
}

/// `(sin x, cos x, 1 - cos x)` at working width `w`.
fn trig_work(x: &BigReal, w: u64) -> (BigReal, BigReal, BigReal) {
    let one = BigReal::with_bits(BigInt::one(), 0, w);
    let extra = x.top().max(0) as u64;
    let half_pi = pi_bits(w + extra + 8).mul_pow2(-1);
    let k = (x / &half_pi).round_int();
    let r = (x - &half_pi * &BigReal::with_bits(k.clone(), 0, w + extra + 8)).to_bits_width(w);
    let (s, v) = sin_versin_small(&r, w);
    let c = &one - &v;
    let quadrant = k.mod_floor_4();
    match quadrant {
        0 => (s, c, v),
        1 => {
            let ver = &one + &s;
            (c, -s, ver)
        }
        2 => {
            let ver = &one + &c;
            (-s, -c, ver)
        }
        _ => {
            let ver = &one - &s;
            (-c, s, ver)
        }
    }
}

trait Mod4 {
    fn mod_floor_4(&self) -> u8;
}

impl Mod4 for BigInt {
    fn mod_floor_4(&self) -> u8 {
        let r = self % BigInt::from(4);
        let r = r.to_i64().unwrap();
        (((r % 4) + 4) % 4) as u8
    }
}

impl BigReal {
    fn work_bits(&self) -> u64 {
        self.bits + GUARD
    }

    pub fn pi(prec: Precision) -> BigReal {
        pi_bits(prec.bits()).retag(prec)
    }

    pub fn ln2(prec: Precision) -> BigReal {
        ln2_bits(prec.bits()).retag(prec)
    }

    pub fn exp(&self) -> BigReal {
        let w = self.work_bits() + self.top().max(0) as u64;
        exp_work(&self.to_bits_width(w), w).retag(self.precision())
    }

    /// Natural logarithm; errors for non-positive input.
    pub fn ln(&self) -> Result<BigReal, BigError> {
        if !self.is_positive() {
            return Err(BigError::NonPositiveLog);
        }
        let w = self.work_bits();
        Ok(ln_work(&self.to_bits_width(w), w).retag(self.precision()))
    }

    pub fn sin(&self) -> BigReal {
        let w = self.work_bits();
        trig_work(&self.to_bits_width(w), w).0.retag(self.precision())
    }

    pub fn cos(&self) -> BigReal {
        let w = self.work_bits();
        trig_work(&self.to_bits_width(w), w).1.retag(self.precision())
    }

    pub fn sin_cos(&self) -> (BigReal, BigReal) {
        let w = self.work_bits();
        let (s, c, _) = trig_work(&self.to_bits_width(w), w);
        (s.retag(self.precision()), c.retag(self.precision()))
    }

    /// `1 - cos x` without cancellation for small `x`.
    pub fn versin(&self) -> BigReal {
        let w = self.work_bits();
        trig_work(&self.to_bits_width(w), w).2.retag(self.precision())
    }

    /// `self^y` for `self > 0` (any real `y`), or `self = 0` with `y > 0`.
    pub fn pow(&self, y: &BigReal) -> Result<BigReal, BigError> {
        if self.is_zero() {
            return if y.is_positive() {
                Ok(self.clone())
            } else {
                Err(BigError::InvalidPowerDomain("zero raised to a non-positive power".into()))
            };
        }
        if self.is_negative() {
            return Err(BigError::InvalidPowerDomain("negative base with real exponent".into()));
        }
        let prec = if self.bits >= y.bits { self.precision() } else { y.precision() };
        let base_bits = self.bits.max(y.bits) + GUARD;
        // log2 |y ln x| extra bits keep the exponent argument accurate.
        let lnx = ln_work(&self.to_bits_width(base_bits + 70), base_bits + 70);
        let arg = &lnx * &y.to_bits_width(base_bits + 70);
        let w = base_bits + arg.top().max(0) as u64;
        Ok(exp_work(&arg.to_bits_width(w), w).retag(prec))
    }

    /// Integer power by repeated squaring; negative exponents divide.
    pub fn powi(&self, n: i64) -> Result<BigReal, BigError> {
        let prec = self.precision();
        let w = self.work_bits() + 64;
        let mut base = self.to_bits_width(w);
        let mut acc = BigReal::with_bits(BigInt::one(), 0, w);
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        if n < 0 {
            acc = acc.recip()?;
        }
        Ok(acc.retag(prec))
    }

    /// Approximate `log10 |x|` returned as a `BigReal` of the same precision.
    pub fn log10(&self) -> Result<BigReal, BigError> {
        let ln10 = BigReal::from_i64(10, self.precision()).ln()?;
        Ok(self.ln()? / ln10)
    }

    pub fn is_abs_less(&self, other: &BigReal) -> bool {
        self.abs() < other.abs()
    }
}
