use mlwalk_bignum::{BigComplex, BigReal};

use crate::error::{CertError, Result};
use crate::model::CertModel;

/// Ψ_q(θ), the bound on the discrepancy between the A- and T-products.
///
/// The q = 1 case is the plain bound; q ≥ 2 sums the first q−1 terms exactly
/// and bounds the remainder by a geometric series.
pub fn psi_bound(m: &CertModel, theta: &BigReal, q: u32) -> Result<BigReal> {
    if q == 0 {
        return Err(CertError::InvalidInput("q must be at least 1".into()));
    }
    if !theta.is_positive() {
        return Err(CertError::PsiDomain(format!("θ must be positive, got {}", theta.to_sci_string(6))));
    }
    let one = m.one();
    let omb = &one - &m.beta;
    let ln_theta = theta.ln()?;
    let two_ln = m.ln_lambda.mul_i64(2);
    let d = |l: u32| &one - &m.lambda_m2_shift(l as i64);

    let base = &m.one_plus_l2 * &(&m.lambda_m2(q as i64) * theta) / &(&omb * &d(q));
    if !(base.is_positive() && base < one) {
        let which = if q == 1 {
            "0 < (1+Λ²)(θ/Λ²)/((1−Λ^{-2a})(1−Λ^{-2(1−a)})) < 1".to_string()
        } else {
            format!("0 < (1+Λ²)Λ^{{-2q}}θ/((1−Λ^{{-2a}})(1−Λ^{{-2(q−a)}})) < 1 with q = {q}")
        };
        return Err(CertError::PsiDomain(format!("{which} fails: value {}", base.to_sci_string(6))));
    }

    // (1+Λ²)^k (Λ^{-2k}θ)^{k−a} / (1−β)^{k−1}
    let term = |k: u32| -> Result<BigReal> {
        let kk = BigReal::from_i64(k as i64, m.prec);
        let ln_arg = &ln_theta - &two_ln.mul_i64(k as i64);
        let pw = (&(&kk - &m.a) * &ln_arg).exp();
        Ok(&(&m.one_plus_l2.powi(k as i64)? * &pw) / &omb.powi(k as i64 - 1)?)
    };

    let mut prod = one.clone();
    let mut sum = BigReal::zero(m.prec);
    for k in 1..q {
        prod = &prod * &d(k);
        sum = &sum + &(&term(k)? / &prod);
    }
    let tail = &(&term(q)? / &d(q)) / &(&one - &base);
    sum = &sum + &(&tail / &prod);

    let u_a = (&m.a * &(&ln_theta - &two_ln)).exp();
    let pref = (&u_a / &omb).exp();
    Ok(&pref * &sum)
}

/// A 2×2 complex matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat2(pub [BigComplex; 4]);

impl Mat2 {
    pub fn identity(m: &CertModel) -> Self {
        let (o, z) = (BigComplex::one(m.prec), BigComplex::zero(m.prec));
        Mat2([o.clone(), z.clone(), z, o])
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let [a, b, c, d] = &self.0;
        let [e, f, g, h] = &rhs.0;
        Mat2([&(a * e) + &(b * g), &(a * f) + &(b * h), &(c * e) + &(d * g), &(c * f) + &(d * h)])
    }

    pub fn sub(&self, rhs: &Mat2) -> Mat2 {
        let s = &self.0;
        let r = &rhs.0;
        Mat2([&s[0] - &r[0], &s[1] - &r[1], &s[2] - &r[2], &s[3] - &r[3]])
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> Result<BigReal> {
        let [a, b, c, d] = &self.0;
        let fro = &(&a.norm_sqr() + &b.norm_sqr()) + &(&c.norm_sqr() + &d.norm_sqr());
        let det = (&(a * d) - &(b * c)).norm_sqr();
        let disc = &fro.square() - &det.mul_i64(4);
        let disc = if disc.is_negative() { BigReal::zero(fro.precision()) } else { disc };
        Ok((&fro + &disc.sqrt()?).div_u64(2).sqrt()?)
    }
}

/// t^a and (1 − e^{i(1+Λ²)t})/t^a at t = Λ^{-2(j+1)}θ.
fn factor_entries(m: &CertModel, ln_theta: &BigReal, j: u32) -> Result<(BigReal, BigComplex)> {
    let ln_t = ln_theta - &m.ln_lambda.mul_i64(2 * (j as i64 + 1));
    let t = ln_t.exp();
    let ta = (&m.a * &ln_t).exp();
    let c = BigComplex::one_minus_exp_i(&(&m.one_plus_l2 * &t)).scale(&ta.recip()?);
    Ok((ta, c))
}

/// T(Λ^{-2(n−1)}θ)⋯T(θ), T(θ) = [[1, 0], [(θ/Λ²)^a, 1]].
pub fn t_product(m: &CertModel, theta: &BigReal, n: u32) -> Result<Mat2> {
    let ln_theta = theta.ln()?;
    let mut acc = Mat2::identity(m);
    for j in 0..n {
        let (ta, _) = factor_entries(m, &ln_theta, j)?;
        let z = BigComplex::zero(m.prec);
        let o = BigComplex::one(m.prec);
        acc = Mat2([o.clone(), z, BigComplex::from_real(ta), o]).mul(&acc);
    }
    Ok(acc)
}

/// Closed form of the T-product's lower-left entry: (1−Λ^{-2an})/(1−Λ^{-2a})·(θ/Λ²)^a.
pub fn t_product_lower_left(m: &CertModel, theta: &BigReal, n: u32) -> Result<BigReal> {
    let one = m.one();
    let geo = &(&one - &m.beta.powi(n as i64)?) / &(&one - &m.beta);
    Ok(&geo * &m.pow_a(&(theta / &m.lambda2))?)
}

/// ‖A(Λ^{-2(n−1)}θ)⋯A(θ) − T(Λ^{-2(n−1)}θ)⋯T(θ)‖ by explicit products.
pub fn matrix_discrepancy(m: &CertModel, theta: &BigReal, n: u32) -> Result<BigReal> {
    if n == 0 {
        return Err(CertError::InvalidInput("matrix_discrepancy needs n ≥ 1".into()));
    }
    if !theta.is_positive() {
        return Err(CertError::InvalidInput("θ must be positive".into()));
    }
    let ln_theta = theta.ln()?;
    let mut a_acc = Mat2::identity(m);
    let mut t_acc = Mat2::identity(m);
    for j in 0..n {
        let (ta, c) = factor_entries(m, &ln_theta, j)?;
        let z = BigComplex::zero(m.prec);
        let o = BigComplex::one(m.prec);
        let ta = BigComplex::from_real(ta);
        a_acc = Mat2([o.clone(), c, ta.clone(), o.clone()]).mul(&a_acc);
        t_acc = Mat2([o.clone(), z, ta, o]).mul(&t_acc);
    }
    a_acc.sub(&t_acc).operator_norm()
}
