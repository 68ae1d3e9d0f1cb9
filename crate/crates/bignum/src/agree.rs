use crate::complex::BigComplex;
use crate::error::BigError;
use crate::real::BigReal;

/// Values that can be compared across two precisions.
pub trait Agreement {
    /// Number of leading significant decimal digits on which `self` and
    /// `other` agree, measured by relative difference. Equal values report
    /// `u32::MAX`.
    fn digits_agreed(&self, other: &Self) -> u32;
}

fn rel_digits(diff: &BigReal, scale: &BigReal) -> u32 {
    if diff.is_zero() {
        return u32::MAX;
    }
    if scale.is_zero() {
        return 0;
    }
    let d = scale.log10_abs() - diff.log10_abs();
    if d <= 0.0 {
        0
    } else {
        d.floor() as u32
    }
}

impl Agreement for BigReal {
    fn digits_agreed(&self, other: &Self) -> u32 {
        let diff = (self - other).abs();
        let scale = self.abs().max_of(&other.abs()).clone();
        rel_digits(&diff, &scale)
    }
}

impl Agreement for BigComplex {
    fn digits_agreed(&self, other: &Self) -> u32 {
        let diff = (self - other).abs();
        let scale = self.abs().max_of(&other.abs()).clone();
        rel_digits(&diff, &scale)
    }
}

impl Agreement for bool {
    fn digits_agreed(&self, other: &Self) -> u32 {
        if self == other {
            u32::MAX
        } else {
            0
        }
    }
}

impl<T: Agreement> Agreement for Vec<T> {
    fn digits_agreed(&self, other: &Self) -> u32 {
        if self.len() != other.len() {
            return 0;
        }
        self.iter().zip(other).map(|(a, b)| a.digits_agreed(b)).min().unwrap_or(u32::MAX)
    }
}

/// Runs `f` at `p1` and `p2` significant digits and reports whether the two
/// results agree to `digits` significant digits.
pub fn agree_at_precision<T, F>(f: F, p1: u32, p2: u32, digits: u32) -> Result<bool, BigError>
where
    T: Agreement,
    F: Fn(u32) -> T,
{
    if p2 < p1 + 20 {
        return Err(BigError::PrecisionGap { p1, p2 });
    }
    let a = f(p1);
    let b = f(p2);
    Ok(a.digits_agreed(&b) >= digits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::Precision;

    #[test]
    fn pi_agrees_between_40_and_80_digits() {
        let ok = agree_at_precision(|p| BigReal::pi(Precision::digits(p)), 40, 80, 30).unwrap();
        assert!(ok);
    }

    #[test]
    fn cancellation_is_caught() {
        let f = |p: u32| {
            let prec = Precision::digits(p);
            let tiny = BigReal::parse_decimal("1e-60", prec).unwrap();
            &(&BigReal::one(prec) + &tiny) - &BigReal::one(prec)
        };
        assert!(!agree_at_precision(f, 40, 80, 6).unwrap());
    }

    #[test]
    fn gap_is_enforced() {
        let r = agree_at_precision(|p| BigReal::pi(Precision::digits(p)), 40, 50, 6);
        assert!(matches!(r, Err(BigError::PrecisionGap { .. })));
    }

    #[test]
    fn digit_count() {
        let prec = Precision::digits(30);
        let a = BigReal::parse_decimal("1.23456789", prec).unwrap();
        let b = BigReal::parse_decimal("1.23456", prec).unwrap();
        assert_eq!(a.digits_agreed(&b), 5);
        assert_eq!(a.digits_agreed(&a), u32::MAX);
    }
}
