use mlwalk_bignum::{Agreement, BigComplex, BigReal, Precision};
use serde::{Deserialize, Serialize};

use crate::charfunc::EllStepper;
use crate::error::{CertError, Result};
use crate::model::{CertModel, ModelSpec, ThetaSpec};
use crate::psi::psi_bound;

/// Coefficient of Ψ_q(θ_j) in the first factor of the r.h.s.
///
/// `Tabulated` uses 1+B_j and is what reproduces the reference tables.
/// `Printed` uses 1+1/B_j as the inequality is usually written.
/// `Conservative` takes the larger of the two.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhsForm {
    #[default]
    Tabulated,
    Printed,
    Conservative,
}

impl std::str::FromStr for RhsForm {
    type Err = CertError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tabulated" => Ok(RhsForm::Tabulated),
            "printed" => Ok(RhsForm::Printed),
            "conservative" => Ok(RhsForm::Conservative),
            _ => Err(CertError::InvalidInput(format!(
                "unknown rhs form {s:?} (expected tabulated, printed or conservative)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertInput {
    pub model: ModelSpec,
    pub theta1: ThetaSpec,
    pub theta2: ThetaSpec,
    #[serde(default = "default_q")]
    pub q: u32,
    #[serde(default)]
    pub precision: Precision,
    #[serde(default)]
    pub rhs_form: RhsForm,
}

fn default_q() -> u32 {
    2
}

impl CertInput {
    pub fn new(model: ModelSpec, theta1: ThetaSpec, theta2: ThetaSpec) -> Self {
        CertInput { model, theta1, theta2, q: 2, precision: Precision::DEFAULT, rhs_form: RhsForm::default() }
    }
}

/// Everything computed at one precision.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    /// Labels after ordering so that |ℓ(θ₁)| ≤ |ℓ(θ₂)|.
    pub theta1: ThetaSpec,
    pub theta2: ThetaSpec,
    pub swapped: bool,
    pub ell1: BigComplex,
    pub ell2: BigComplex,
    pub a: BigReal,
    pub beta: BigReal,
    /// `None` when a Ψ precondition fails.
    pub bounds: Option<Bounds>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bounds {
    pub psi1: BigReal,
    pub psi2: BigReal,
    pub rhs: BigReal,
    pub rhs_conservative: BigReal,
    pub lower_bounds_positive: bool,
}

/// r.h.s. value and whether both brackets bounding |c ℓ| from below are positive.
fn rhs_value(
    m: &CertModel,
    form: RhsForm,
    b1: &BigReal,
    b2: &BigReal,
    p1: &BigReal,
    p2: &BigReal,
    u1: &BigReal,
    u2: &BigReal,
) -> Result<(BigReal, bool)> {
    let one = m.one();
    let coeff = |b: &BigReal| -> Result<BigReal> {
        let direct = &one + b;
        let inv = &one + &b.recip()?;
        Ok(match form {
            RhsForm::Tabulated => direct,
            RhsForm::Printed => inv,
            RhsForm::Conservative => direct.max_of(&inv).clone(),
        })
    };
    let omb = &one - &m.beta;
    let num1 = &one - &(&coeff(b2)? * p2);
    let den1 = &one + &(&coeff(b1)? * p1);
    let num2 = &(&one - &(&(&one + b1) * p1)) - &(&(b1 * u1) / &omb);
    let den2 = &(&one + &(&(&one + b2) * p2)) + &(&(b2 * u2) / &omb);
    let positive = num1.is_positive() && num2.is_positive();
    Ok((&(&num1 / &den1) * &(&num2 / &den2), positive))
}

/// ℓ at (k, n) from the exact lattice start.
pub fn ell_at(m: &CertModel, theta: ThetaSpec) -> Result<BigComplex> {
    let mut s = EllStepper::from_lattice(m, theta.k)?;
    for _ in 0..theta.n {
        s.step()?;
    }
    Ok(s.ell)
}

/// Given ℓ at both θ (in input order), orders them and evaluates Ψ_q and the r.h.s.
pub fn evaluate_with_ells(
    m: &CertModel,
    input: &CertInput,
    ell_a: BigComplex,
    ell_b: BigComplex,
) -> Result<Evaluation> {
    let swapped = ell_a.abs() > ell_b.abs();
    let (theta1, theta2, ell1, ell2) =
        if swapped { (input.theta2, input.theta1, ell_b, ell_a) } else { (input.theta1, input.theta2, ell_a, ell_b) };
    let th1 = theta1.value(m)?;
    let th2 = theta2.value(m)?;
    let bounds = match (psi_bound(m, &th1, input.q), psi_bound(m, &th2, input.q)) {
        (Ok(psi1), Ok(psi2)) => {
            let b1 = ell1.abs();
            let b2 = ell2.abs();
            let u1 = m.pow_a(&(&th1 / &m.lambda2))?;
            let u2 = m.pow_a(&(&th2 / &m.lambda2))?;
            if b1.is_zero() {
                None
            } else {
                let (rhs, pos) = rhs_value(m, input.rhs_form, &b1, &b2, &psi1, &psi2, &u1, &u2)?;
                let (rhs_c, pos_c) = rhs_value(m, RhsForm::Conservative, &b1, &b2, &psi1, &psi2, &u1, &u2)?;
                Some(Bounds { psi1, psi2, rhs, rhs_conservative: rhs_c, lower_bounds_positive: pos && pos_c })
            }
        }
        (Err(CertError::PsiDomain(_)), _) | (_, Err(CertError::PsiDomain(_))) => None,
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    Ok(Evaluation { theta1, theta2, swapped, ell1, ell2, a: m.a.clone(), beta: m.beta.clone(), bounds })
}

pub fn evaluate(input: &CertInput, prec: Precision) -> Result<Evaluation> {
    let m = input.model.at(prec)?;
    if input.theta1.equivalent(&input.theta2, &m) {
        return Err(CertError::EquivalentThetas);
    }
    let ell_a = ell_at(&m, input.theta1)?;
    let ell_b = ell_at(&m, input.theta2)?;
    evaluate_with_ells(&m, input, ell_a, ell_b)
}

/// Strict version of the verdict: B₁⁺ < B₂⁻, positive brackets and rhs·B₂⁻/B₁⁺ > 1.
fn verdict(rhs: &BigReal, positive: bool, b1p: &BigReal, b2m: &BigReal) -> bool {
    positive && b1p < b2m && &(rhs * b2m) > b1p
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertResult {
    pub inputs: CertInput,
    pub a: BigReal,
    pub beta: BigReal,
    /// θ labels after ordering by |ℓ|.
    pub theta1: ThetaSpec,
    pub theta2: ThetaSpec,
    pub swapped: bool,
    pub ell1: BigComplex,
    pub ell2: BigComplex,
    pub b1_minus: BigReal,
    pub b1_plus: BigReal,
    pub b2_minus: BigReal,
    pub b2_plus: BigReal,
    pub psi1: BigReal,
    pub psi2: BigReal,
    /// |ℓ(θ₁)/ℓ(θ₂)|
    pub ratio: BigReal,
    pub rhs: BigReal,
    pub rhs_conservative: BigReal,
    pub lower_bounds_positive: bool,
    pub certified: bool,
    pub certified_conservative: bool,
    /// ℓ values and verdicts agree to at least 6 digits between P and 2P.
    pub agreement: bool,
    pub digits_agreed: u32,
    pub precision: Precision,
}

/// Digits of agreement below which a result is not trusted.
pub const AGREEMENT_DIGITS: u32 = 6;

/// Runs the scheme at P and 2P and combines the two into a certificate.
pub fn certify_pair(input: &CertInput) -> Result<CertResult> {
    if input.q == 0 {
        return Err(CertError::InvalidInput("q must be at least 1".into()));
    }
    let p = input.precision;
    let lo = evaluate(input, p)?;
    let hi = evaluate(input, p.doubled())?;
    let (Some(b), Some(bh)) = (&lo.bounds, &hi.bounds) else {
        let th = if lo.bounds.is_none() { &lo } else { &hi };
        let m = input.model.at(p)?;
        // Re-run the failing bound to surface its message.
        psi_bound(&m, &th.theta1.value(&m)?, input.q)?;
        psi_bound(&m, &th.theta2.value(&m)?, input.q)?;
        return Err(CertError::PsiDomain("|ℓ(θ₁)| = 0".into()));
    };

    let digits = [
        lo.ell1.digits_agreed(&hi.ell1.with_precision(p)),
        lo.ell2.digits_agreed(&hi.ell2.with_precision(p)),
        b.rhs.digits_agreed(&bh.rhs.with_precision(p)),
    ]
    .into_iter()
    .min()
    .unwrap()
    .min(p.get());

    let one = BigReal::one(p);
    let slack = BigReal::from_i64(10, p).powi(-(digits as i64 - 1))?;
    let widen = |x: &BigReal, sign: i64| x * &(&one + &slack.mul_i64(sign));
    let b1 = lo.ell1.abs();
    let b2 = lo.ell2.abs();
    let (b1_minus, b1_plus, b2_minus, b2_plus) = (widen(&b1, -1), widen(&b1, 1), widen(&b2, -1), widen(&b2, 1));

    let certified = verdict(&b.rhs, b.lower_bounds_positive, &b1_plus, &b2_minus);
    let certified_conservative = verdict(&b.rhs_conservative, b.lower_bounds_positive, &b1_plus, &b2_minus);
    let hi_verdict = {
        let hb1 = hi.ell1.abs();
        let hb2 = hi.ell2.abs();
        verdict(&bh.rhs, bh.lower_bounds_positive, &hb1, &hb2)
    };
    let agreement = digits >= AGREEMENT_DIGITS && hi_verdict == certified && hi.swapped == lo.swapped;

    Ok(CertResult {
        inputs: input.clone(),
        a: lo.a.clone(),
        beta: lo.beta.clone(),
        theta1: lo.theta1,
        theta2: lo.theta2,
        swapped: lo.swapped,
        ratio: &b1 / &b2,
        ell1: lo.ell1,
        ell2: lo.ell2,
        b1_minus,
        b1_plus,
        b2_minus,
        b2_plus,
        psi1: b.psi1.clone(),
        psi2: b.psi2.clone(),
        rhs: b.rhs.clone(),
        rhs_conservative: b.rhs_conservative.clone(),
        lower_bounds_positive: b.lower_bounds_positive,
        certified,
        certified_conservative,
        agreement,
        digits_agreed: digits,
        precision: p,
    })
}

impl CertResult {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| CertError::InvalidInput(e.to_string()))
    }
}
