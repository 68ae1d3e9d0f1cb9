use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::BigError;
use crate::precision::Precision;
use crate::real::BigReal;

/// Complex number with `BigReal` parts of a common precision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BigComplex {
    pub re: BigReal,
    pub im: BigReal,
}

impl BigComplex {
    pub fn new(re: BigReal, im: BigReal) -> Self {
        let prec = if re.bits() >= im.bits() { re.precision() } else { im.precision() };
        BigComplex { re: re.with_precision(prec), im: im.with_precision(prec) }
    }

    pub fn from_real(re: BigReal) -> Self {
        let im = BigReal::zero(re.precision());
        BigComplex { re, im }
    }

    pub fn zero(prec: Precision) -> Self {
        BigComplex { re: BigReal::zero(prec), im: BigReal::zero(prec) }
    }

    pub fn one(prec: Precision) -> Self {
        BigComplex { re: BigReal::one(prec), im: BigReal::zero(prec) }
    }

    pub fn i(prec: Precision) -> Self {
        BigComplex { re: BigReal::zero(prec), im: BigReal::one(prec) }
    }

    pub fn from_f64(re: f64, im: f64, prec: Precision) -> Self {
        BigComplex { re: BigReal::from_f64(re, prec), im: BigReal::from_f64(im, prec) }
    }

    pub fn precision(&self) -> Precision {
        self.re.precision()
    }

    pub fn with_precision(&self, prec: Precision) -> Self {
        BigComplex { re: self.re.with_precision(prec), im: self.im.with_precision(prec) }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        BigComplex { re: self.re.clone(), im: -&self.im }
    }

    pub fn norm_sqr(&self) -> BigReal {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn abs(&self) -> BigReal {
        self.norm_sqr().sqrt().expect("sum of squares is non-negative")
    }

    pub fn scale(&self, k: &BigReal) -> Self {
        BigComplex { re: &self.re * k, im: &self.im * k }
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, BigError> {
        let den = other.norm_sqr();
        if den.is_zero() {
            return Err(BigError::DivisionByZero);
        }
        let re = &self.re * &other.re + &self.im * &other.im;
        let im = &self.im * &other.re - &self.re * &other.im;
        Ok(BigComplex { re: re.checked_div(&den)?, im: im.checked_div(&den)? })
    }

    /// `e^z`.
    pub fn exp(&self) -> Self {
        let r = self.re.exp();
        let (s, c) = self.im.sin_cos();
        BigComplex { re: &r * &c, im: &r * &s }
    }

    /// `e^{ix}` for real `x`.
    pub fn exp_i(x: &BigReal) -> Self {
        let (s, c) = x.sin_cos();
        BigComplex { re: c, im: s }
    }

    /// `1 - e^{ix}` computed as `2 sin^2(x/2) - i sin x`, accurate for small `x`.
    pub fn one_minus_exp_i(x: &BigReal) -> Self {
        BigComplex { re: x.versin(), im: -x.sin() }
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    /// `a+bi` / `a-bi` with `sig` significant digits per part.
    pub fn to_sig_string(&self, sig: u32) -> String {
        let re = self.re.to_sig_string(sig);
        let im = self.im.abs().to_sig_string(sig);
        let sign = if self.im.is_negative() { '-' } else { '+' };
        format!("{re} {sign} {im}i")
    }
}

impl fmt::Display for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sig = f.precision().map(|p| p as u32).unwrap_or(self.re.precision().get());
        let sign = if self.im.is_negative() { '-' } else { '+' };
        write!(f, "{} {} {}i", self.re.to_sci_string(sig), sign, self.im.abs().to_sci_string(sig))
    }
}

macro_rules! complex_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl<'a> $trait<&'a BigComplex> for &'a BigComplex {
            type Output = BigComplex;
            fn $method(self, rhs: &'a BigComplex) -> BigComplex {
                let f: fn(&BigComplex, &BigComplex) -> BigComplex = $body;
                f(self, rhs)
            }
        }
        impl $trait<BigComplex> for BigComplex {
            type Output = BigComplex;
            fn $method(self, rhs: BigComplex) -> BigComplex {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a BigComplex> for BigComplex {
            type Output = BigComplex;
            fn $method(self, rhs: &'a BigComplex) -> BigComplex {
                (&self).$method(rhs)
            }
        }
    };
}

complex_binop!(Add, add, |a, b| BigComplex { re: &a.re + &b.re, im: &a.im + &b.im });
complex_binop!(Sub, sub, |a, b| BigComplex { re: &a.re - &b.re, im: &a.im - &b.im });
complex_binop!(Mul, mul, |a, b| BigComplex { re: &a.re * &b.re - &a.im * &b.im, im: &a.re * &b.im + &a.im * &b.re });
complex_binop!(Div, div, |a, b| a.checked_div(b).expect("complex division by zero"));

impl Neg for BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex { re: -self.re, im: -self.im }
    }
}

impl Neg for &BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        -self.clone()
    }
}
