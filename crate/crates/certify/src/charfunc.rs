use mlwalk_bignum::{BigComplex, BigReal, Precision};

use crate::error::{CertError, Result};
use crate::model::{CertModel, ThetaSpec};

/// Number of sweeps after which 2β^K < tol.
pub fn fixed_point_depth(beta: f64, tol: f64) -> Result<u32> {
    if !(tol > 0.0) {
        return Err(CertError::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if tol >= 2.0 {
        return Ok(0);
    }
    Ok(((tol / 2.0).ln() / beta.ln()).floor() as u32 + 1)
}

/// `depth` sweeps of ψ(θ) ← e^{i(1+Λ²)θ}·p↓/(1 − p↑ψ(Λ²θ)) from `start` at Λ^{2·depth}θ.
pub fn phi_sweeps(m: &CertModel, theta: &BigReal, depth: u32, start: &BigComplex) -> Result<BigComplex> {
    let p_down = BigComplex::from_real(m.p_down.clone());
    let one = BigComplex::one(m.prec);
    let mut thetas = Vec::with_capacity(depth as usize + 1);
    let mut t = theta.clone();
    for _ in 0..depth {
        thetas.push(t.clone());
        t = &t * &m.lambda2;
    }
    let mut psi = start.with_precision(m.prec);
    for t in thetas.iter().rev() {
        let phase = BigComplex::exp_i(&(&m.one_plus_l2 * t));
        let den = &one - &psi.scale(&m.p_up);
        psi = (&phase * &p_down).checked_div(&den)?;
    }
    Ok(psi)
}

/// φ_Z(θ) as the fixed point of the map above, to absolute error `tol`.
pub fn phi_fixed_point(m: &CertModel, theta: &BigReal, tol: &BigReal) -> Result<BigComplex> {
    if !tol.is_positive() {
        return Err(CertError::InvalidInput("tolerance must be positive".into()));
    }
    if theta.is_zero() {
        return Ok(BigComplex::one(m.prec));
    }
    if theta.is_negative() {
        return Ok(phi_fixed_point(m, &theta.abs(), tol)?.conj());
    }
    let beta = m.beta.to_f64();
    let depth = if tol.log10_abs() < -300.0 {
        ((tol.log10_abs() - 2f64.log10()) / beta.log10()).floor() as u32 + 1
    } else {
        fixed_point_depth(beta, tol.to_f64())?
    };
    // Phase errors at depth j are damped by β^j but scaled by Λ^{2j}.
    let extra = (depth as f64 * m.lambda2.to_f64().log10()).ceil() as u32 + 5;
    let work = m.spec.at(Precision::digits(m.prec.get() + extra))?;
    let v = phi_sweeps(&work, &theta.with_precision(work.prec), depth, &BigComplex::one(work.prec))?;
    Ok(v.with_precision(m.prec))
}

/// ℓ(2πk/(Λ²+Λ⁴)) = (1 − e^{i2πk/Λ²})·(2πk/(Λ²+Λ⁴))^{-a}.
pub fn ell_exact_lattice(m: &CertModel, k: u64) -> Result<BigComplex> {
    let theta = ThetaSpec::new(k, 0)?;
    let k_phase = match m.lambda_int {
        Some(l) => {
            let r = k % (l * l);
            if r == 0 {
                return Ok(BigComplex::zero(m.prec));
            }
            r
        }
        None => k,
    };
    let x = m.pi.mul_i64(2).mul_i64(k_phase as i64) / &m.lambda2;
    let scale = (-(&m.a * &theta.ln_value(m)?)).exp();
    Ok(BigComplex::one_minus_exp_i(&x).scale(&scale))
}

/// Walks ℓ down the grid θ, θ/Λ², θ/Λ⁴, ... one fractional-linear step at a time.
#[derive(Clone, Debug)]
pub struct EllStepper<'m> {
    model: &'m CertModel,
    /// ln of the current θ.
    ln_theta: BigReal,
    two_ln_lambda: BigReal,
    pub theta: ThetaSpec,
    pub ell: BigComplex,
}

impl<'m> EllStepper<'m> {
    pub fn new(model: &'m CertModel, start: ThetaSpec, ell_start: BigComplex) -> Result<Self> {
        Ok(EllStepper {
            model,
            ln_theta: start.ln_value(model)?,
            two_ln_lambda: model.ln_lambda.mul_i64(2),
            theta: start,
            ell: ell_start.with_precision(model.prec),
        })
    }

    /// Starts from the exact lattice value at θ = 2πk/(Λ²+Λ⁴).
    pub fn from_lattice(model: &'m CertModel, k: u64) -> Result<Self> {
        let ell = ell_exact_lattice(model, k)?;
        EllStepper::new(model, ThetaSpec::new(k, 0)?, ell)
    }

    /// ℓ(θ/Λ²) = [ℓ(θ) + (1 − e^{ix})/t^a] / [t^a ℓ(θ) + 1], t = θ/Λ², x = (1+Λ²)t.
    pub fn step(&mut self) -> Result<&BigComplex> {
        let m = self.model;
        let ln_t = &self.ln_theta - &self.two_ln_lambda;
        let t = ln_t.exp();
        let ta = (&m.a * &ln_t).exp();
        let x = &m.one_plus_l2 * &t;
        let c = BigComplex::one_minus_exp_i(&x).scale(&ta.recip()?);
        let num = &self.ell + &c;
        let den = &self.ell.scale(&ta) + &BigComplex::one(m.prec);
        self.ell = num.checked_div(&den).map_err(|_| CertError::DenominatorVanished(self.theta.n + 1))?;
        self.ln_theta = ln_t;
        self.theta.n += 1;
        Ok(&self.ell)
    }
}

/// ℓ(Λ^{-2n}θ_start) from ℓ(θ_start).
pub fn ell_recursion(m: &CertModel, start: ThetaSpec, ell_start: &BigComplex, n: u32) -> Result<BigComplex> {
    let mut s = EllStepper::new(m, start, ell_start.clone())?;
    for _ in 0..n {
        s.step()?;
    }
    Ok(s.ell)
}

/// ℓ at θ_k·Λ^{-2j} for j = 0..=n, starting from the exact lattice value.
pub fn ell_trajectory(m: &CertModel, k: u64, n: u32) -> Result<Vec<BigComplex>> {
    let mut s = EllStepper::from_lattice(m, k)?;
    let mut out = vec![s.ell.clone()];
    for _ in 0..n {
        out.push(s.step()?.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;

    #[test]
    fn depth_formula() {
        assert_eq!(fixed_point_depth(0.5, 1e-3).unwrap(), 11);
        assert_eq!(fixed_point_depth(0.5, 3.0).unwrap(), 0);
        assert!(fixed_point_depth(0.5, 0.0).is_err());
    }

    #[test]
    fn lattice_examples() {
        let p = Precision::DEFAULT;
        let m = ModelSpec::from_a("2", "0.5").at(p).unwrap();
        let v = ell_exact_lattice(&m, 2).unwrap();
        assert_eq!(v.re.to_sig_string(5), "2.5231");
        assert!(v.im.log10_abs() < -45.0);
        assert!(ell_exact_lattice(&m, 4).unwrap().is_zero());
        let m3 = ModelSpec::from_a("3", "0.5").at(p).unwrap();
        assert!(ell_exact_lattice(&m3, 9).unwrap().is_zero());
        assert!(ell_exact_lattice(&m3, 18).unwrap().is_zero());
    }

    #[test]
    fn recursion_examples() {
        let m = ModelSpec::from_a("2", "0.5").at(Precision::DEFAULT).unwrap();
        let start = ell_exact_lattice(&m, 2).unwrap();
        let th = ThetaSpec::new(2, 0).unwrap();
        assert_eq!(ell_recursion(&m, th, &start, 0).unwrap(), start);
        assert_eq!(ell_recursion(&m, th, &start, 10).unwrap().to_sig_string(5), "1.4283 - 1.4456i");
        let m = ModelSpec::from_beta("2", "0.6").at(Precision::DEFAULT).unwrap();
        let start = ell_exact_lattice(&m, 2).unwrap();
        assert_eq!(ell_recursion(&m, th, &start, 8).unwrap().to_sig_string(5), "0.89810 - 0.60217i");
    }

    #[test]
    fn phi_at_zero_and_lattice() {
        let p = Precision::digits(30);
        let m = ModelSpec::from_alpha("2", "1").at(p).unwrap();
        let tol = BigReal::parse_decimal("1e-20", p).unwrap();
        assert_eq!(phi_fixed_point(&m, &BigReal::zero(p), &tol).unwrap(), BigComplex::one(p));
        // θ = 2π/20 gives e^{iπ/2} = i. φ_Z is only a-Hölder, so θ needs ~P/a digits.
        let fine = ModelSpec::from_alpha("2", "1").at(Precision::digits(80)).unwrap();
        let th = ThetaSpec::new(1, 0).unwrap().value(&fine).unwrap();
        let v = phi_fixed_point(&m, &th, &tol).unwrap();
        assert!((&v - &BigComplex::i(p)).abs().log10_abs() < -19.0, "{v}");
    }
}
