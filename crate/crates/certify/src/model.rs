use mlwalk_bignum::{BigReal, Precision};
use mlwalk_core::AnomalousParams;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{CertError, Result};

/// How the tail exponent is specified. Decimal strings keep the input exact
/// so the model can be rebuilt at any precision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exponent {
    /// β = p↑/p↓ = Λ^{-2a}.
    Beta(String),
    /// a = α/2.
    A(String),
    Alpha(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub lambda: String,
    pub exponent: Exponent,
}

impl ModelSpec {
    pub fn from_beta(lambda: &str, beta: &str) -> Self {
        ModelSpec { lambda: lambda.into(), exponent: Exponent::Beta(beta.into()) }
    }

    pub fn from_a(lambda: &str, a: &str) -> Self {
        ModelSpec { lambda: lambda.into(), exponent: Exponent::A(a.into()) }
    }

    pub fn from_alpha(lambda: &str, alpha: &str) -> Self {
        ModelSpec { lambda: lambda.into(), exponent: Exponent::Alpha(alpha.into()) }
    }

    /// Uses the shortest decimal form of the `f64` fields.
    pub fn from_params(p: &AnomalousParams) -> Self {
        ModelSpec::from_a(&format!("{:e}", p.lambda), &format!("{:e}", p.a))
    }

    pub fn at(&self, prec: Precision) -> Result<CertModel> {
        CertModel::new(self, prec)
    }
}

/// The anomalous model with every constant the certifier needs, at one precision.
#[derive(Clone, Debug, PartialEq)]
pub struct CertModel {
    pub spec: ModelSpec,
    pub prec: Precision,
    pub lambda: BigReal,
    pub lambda_int: Option<u64>,
    pub ln_lambda: BigReal,
    pub lambda2: BigReal,
    /// 1 + Λ²
    pub one_plus_l2: BigReal,
    /// Λ² + Λ⁴
    pub l2_l4: BigReal,
    pub a: BigReal,
    /// Λ^{-2a}
    pub beta: BigReal,
    pub p_up: BigReal,
    pub p_down: BigReal,
    pub pi: BigReal,
}

impl CertModel {
    pub fn new(spec: &ModelSpec, prec: Precision) -> Result<Self> {
        let lambda = BigReal::parse_decimal(&spec.lambda, prec)?;
        let one = BigReal::one(prec);
        if lambda <= one {
            return Err(CertError::InvalidInput(format!("Λ must exceed 1, got {}", spec.lambda)));
        }
        let lambda_int = {
            let r = lambda.round_int();
            let back = BigReal::from_bigint(r.clone(), prec);
            if back == lambda {
                u64::try_from(r).ok()
            } else {
                None
            }
        };
        let ln_lambda = lambda.ln()?;
        let two_ln = ln_lambda.mul_i64(2);
        let (a, beta) = match &spec.exponent {
            Exponent::Beta(s) => {
                let beta = BigReal::parse_decimal(s, prec)?;
                if !beta.is_positive() {
                    return Err(CertError::InvalidInput(format!("β must be positive, got {s}")));
                }
                (-(beta.ln()? / &two_ln), beta)
            }
            Exponent::A(s) => {
                let a = BigReal::parse_decimal(s, prec)?;
                let beta = (-(&a * &two_ln)).exp();
                (a, beta)
            }
            Exponent::Alpha(s) => {
                let a = BigReal::parse_decimal(s, prec)?.div_u64(2);
                let beta = (-(&a * &two_ln)).exp();
                (a, beta)
            }
        };
        if !(a.is_positive() && a < one) {
            return Err(CertError::InvalidInput(format!("a = α/2 must lie in (0,1), got {}", a.to_sig_string(6))));
        }
        let lambda2 = lambda.square();
        let one_plus_l2 = &one + &lambda2;
        let l2_l4 = &lambda2 * &one_plus_l2;
        let p_down = (&one + &beta).recip()?;
        let p_up = &beta * &p_down;
        Ok(CertModel {
            spec: spec.clone(),
            prec,
            lambda,
            lambda_int,
            ln_lambda,
            lambda2,
            one_plus_l2,
            l2_l4,
            a,
            beta,
            p_up,
            p_down,
            pi: BigReal::pi(prec),
        })
    }

    pub fn one(&self) -> BigReal {
        BigReal::one(self.prec)
    }

    /// x^a for x > 0.
    pub fn pow_a(&self, x: &BigReal) -> Result<BigReal> {
        Ok(x.pow(&self.a)?)
    }

    /// Λ^{-2j}
    pub fn lambda_m2(&self, j: i64) -> BigReal {
        (-(self.ln_lambda.mul_i64(2 * j))).exp()
    }

    /// Λ^{-2(j-a)}
    pub fn lambda_m2_shift(&self, j: i64) -> BigReal {
        let e = &BigReal::from_i64(j, self.prec) - &self.a;
        (-(&self.ln_lambda.mul_i64(2) * &e)).exp()
    }
}

/// θ = Λ^{-2n}·2πk/(Λ²+Λ⁴), kept as the pair (k, n).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ThetaSpec {
    pub k: u64,
    pub n: u32,
}

impl ThetaSpec {
    pub fn new(k: u64, n: u32) -> Result<Self> {
        if k == 0 {
            return Err(CertError::InvalidInput("θ lattice index k must be positive".into()));
        }
        Ok(ThetaSpec { k, n })
    }

    /// ln θ, computed without forming Λ^{-2n} first.
    pub fn ln_value(&self, m: &CertModel) -> Result<BigReal> {
        let base = (m.pi.mul_i64(2).mul_i64(self.k as i64) / &m.l2_l4).ln()?;
        Ok(&base - &m.ln_lambda.mul_i64(2 * self.n as i64))
    }

    pub fn value(&self, m: &CertModel) -> Result<BigReal> {
        Ok(self.ln_value(m)?.exp())
    }

    /// True when θ₁/θ₂ is an integer power of Λ².
    pub fn equivalent(&self, other: &ThetaSpec, m: &CertModel) -> bool {
        match m.lambda_int {
            Some(l) => {
                let l2 = l as u128 * l as u128;
                let g = self.k.gcd(&other.k);
                let (x, y) = (self.k / g, other.k / g);
                // One of the reduced parts must be 1 and the other a power of Λ².
                let mut big = match (x, y) {
                    (1, y) => y as u128,
                    (x, 1) => x as u128,
                    _ => return false,
                };
                while big > 1 && big % l2 == 0 {
                    big /= l2;
                }
                big == 1
            }
            None => {
                let r = (self.k as f64 / other.k as f64).ln() / (2.0 * m.lambda.to_f64().ln());
                (r - r.round()).abs() < 1e-12
            }
        }
    }

    pub fn label(&self, m: &CertModel) -> String {
        let s = match &m.lambda_int {
            Some(l) => format!("{}", l * l),
            None => format!("{}^2", m.spec.lambda),
        };
        format!("{s}^-{}·2π·{}/(Λ²+Λ⁴)", self.n, self.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_and_a_agree() {
        let p = Precision::digits(40);
        let m = ModelSpec::from_beta("2", "0.5").at(p).unwrap();
        assert_eq!(m.a.to_sig_string(10), "0.5000000000");
        let m2 = ModelSpec::from_a("2", "0.5").at(p).unwrap();
        assert!((&m2.beta - &BigReal::parse_decimal("0.5", p).unwrap()).abs().log10_abs() < -38.0);
        assert_eq!(m.lambda_int, Some(2));
        assert!(ModelSpec::from_beta("2", "1.2").at(p).is_err());
        assert!(ModelSpec::from_beta("1", "0.5").at(p).is_err());
    }

    #[test]
    fn theta_equivalence() {
        let m = ModelSpec::from_beta("2", "0.5").at(Precision::DEFAULT).unwrap();
        let t = |k, n| ThetaSpec::new(k, n).unwrap();
        assert!(t(2, 3).equivalent(&t(8, 0), &m));
        assert!(t(32, 3).equivalent(&t(2, 0), &m));
        assert!(!t(2, 3).equivalent(&t(4, 3), &m));
        assert!(!t(3, 0).equivalent(&t(6, 0), &m));
        assert!(t(5, 1).equivalent(&t(5, 7), &m));
    }
}
