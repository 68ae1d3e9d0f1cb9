use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CoreError, Result};

/// A probability held as an exact rational. Accepts `"1/3"`, decimal strings
/// such as `"0.1"`, or JSON numbers (read through their shortest decimal form,
/// so `0.1` means exactly 1/10).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Probability(BigRational);

impl Probability {
    pub fn new(r: BigRational) -> Self {
        Probability(r)
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Probability(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_f64(v: f64) -> Self {
        format!("{v}").parse().expect("finite f64 has a decimal form")
    }

    pub fn exact(&self) -> &BigRational {
        &self.0
    }

    pub fn value(&self) -> f64 {
        rational_to_f64(&self.0)
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Very large numerators and denominators: scale both down first.
        let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(900);
        let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
        let d = (r.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

fn parse_decimal_rational(s: &str) -> Option<BigRational> {
    let t = s.trim();
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = match body.find('.') {
        Some(i) => (&body[..i], &body[i + 1..]),
        None => (body, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut num: BigInt = format!("{int}{frac}").parse().ok()?;
    if neg {
        num = -num;
    }
    let e = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    Some(if e >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, e as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-e) as usize))
    })
}

impl FromStr for Probability {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || CoreError::InvalidParams(format!("cannot parse probability `{s}`"));
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            return Ok(Probability(BigRational::new(n, d)));
        }
        parse_decimal_rational(s).map(Probability).ok_or_else(bad)
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl Serialize for Probability {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Probability {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v.is_finite() => Ok(Probability::from_f64(v)),
            Raw::Num(v) => Err(serde::de::Error::custom(format!("non-finite probability {v}"))),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Closed-form tail of a per-level rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Constant(f64),
    /// `scale * ratio^level`, with `level` the absolute level index.
    Geometric {
        scale: f64,
        ratio: f64,
    },
}

/// Per-level values: explicit prefix for levels `0..prefix.len()`, then the tail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRule {
    #[serde(default)]
    pub prefix: Vec<f64>,
    pub tail: Tail,
}

impl LevelRule {
    pub fn constant(c: f64) -> Self {
        LevelRule { prefix: Vec::new(), tail: Tail::Constant(c) }
    }

    pub fn geometric(scale: f64, ratio: f64) -> Self {
        LevelRule { prefix: Vec::new(), tail: Tail::Geometric { scale, ratio } }
    }

    pub fn value(&self, level: u32) -> f64 {
        match self.prefix.get(level as usize) {
            Some(v) => *v,
            None => match self.tail {
                Tail::Constant(c) => c,
                Tail::Geometric { scale, ratio } => scale * ratio.powi(level as i32),
            },
        }
    }

    /// Ratio between consecutive tail values.
    pub fn tail_ratio(&self) -> f64 {
        match self.tail {
            Tail::Constant(_) => 1.0,
            Tail::Geometric { ratio, .. } => ratio,
        }
    }

    fn validate(&self, name: &str, nondecreasing: bool) -> Result<()> {
        let bad = |m: String| Err(CoreError::InvalidParams(format!("{name}: {m}")));
        match self.tail {
            Tail::Constant(c) if !(c.is_finite() && c > 0.0) => {
                return bad(format!("tail constant {c} must be positive"))
            }
            Tail::Geometric { scale, ratio }
                if !(scale.is_finite() && scale > 0.0 && ratio.is_finite() && ratio > 0.0) =>
            {
                return bad("geometric tail needs positive scale and ratio".into())
            }
            _ => {}
        }
        if let Some(v) = self.prefix.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return bad(format!("prefix value {v} must be positive"));
        }
        if nondecreasing {
            if self.tail_ratio() < 1.0 {
                return bad("geometric tail ratio must be >= 1 for a nondecreasing rule".into());
            }
            let k = self.prefix.len() as u32;
            for l in 0..k {
                if self.value(l + 1) < self.value(l) {
                    return bad(format!("values must be nondecreasing (level {l} -> {})", l + 1));
                }
            }
        }
        Ok(())
    }
}

/// Law of the jumps `xi_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum XiLaw {
    StandardGaussian1d,
    GaussianD {
        covariance: Vec<Vec<f64>>,
    },
    /// Finite law: `values[i]` (a vector of length d) with probability `probs[i]`.
    UserTable {
        values: Vec<Vec<f64>>,
        probs: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: usize,
    pub p_up: Probability,
    pub p_down: Probability,
    pub p_up0: Probability,
    pub speeds: LevelRule,
    pub timescales: LevelRule,
    pub xi_law: XiLaw,
}

/// Transition probabilities of the level chain as `f64`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub p_up: f64,
    pub p_down: f64,
    pub p_up0: f64,
}

impl Kernel {
    /// P(from, to).
    pub fn prob(&self, from: u32, to: u32) -> f64 {
        if from == 0 {
            match to {
                0 => 1.0 - self.p_up0,
                1 => self.p_up0,
                _ => 0.0,
            }
        } else if to == from + 1 {
            self.p_up
        } else if to + 1 == from {
            self.p_down
        } else if to == from {
            1.0 - self.p_up - self.p_down
        } else {
            0.0
        }
    }
}

fn symmetric_matrix(rows: &[Vec<f64>], d: usize) -> Result<DMatrix<f64>> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(CoreError::InvalidParams(format!("covariance must be {d}x{d}")));
    }
    let m = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
    for i in 0..d {
        for j in 0..i {
            let tol = 1e-12 * (m[(i, j)].abs() + m[(j, i)].abs()).max(1.0);
            if (m[(i, j)] - m[(j, i)]).abs() > tol {
                return Err(CoreError::InvalidParams("covariance must be symmetric".into()));
            }
        }
    }
    Ok(m)
}

impl ModelParams {
    pub fn kernel(&self) -> Kernel {
        Kernel { p_up: self.p_up.value(), p_down: self.p_down.value(), p_up0: self.p_up0.value() }
    }

    pub fn speed(&self, level: u32) -> f64 {
        self.speeds.value(level)
    }

    pub fn timescale(&self, level: u32) -> f64 {
        self.timescales.value(level)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CoreError::InvalidParams(m.to_string()));
        if self.d == 0 {
            return bad("dimension d must be positive");
        }
        let (pu, pd, pu0) = (self.p_up.exact(), self.p_down.exact(), self.p_up0.exact());
        let one = BigRational::one();
        if !(pu.is_positive() && pu < pd) {
            return bad("need 0 < p_up < p_down");
        }
        if pu + pd > one {
            return bad("need p_up + p_down <= 1");
        }
        if !(pu0.is_positive() && *pu0 <= one) {
            return bad("need 0 < p_up0 <= 1");
        }
        self.speeds.validate("speeds", true)?;
        self.timescales.validate("timescales", false)?;
        match &self.xi_law {
            XiLaw::StandardGaussian1d => {
                if self.d != 1 {
                    return bad("standard-gaussian-1d requires d = 1");
                }
            }
            XiLaw::GaussianD { covariance } => {
                let m = symmetric_matrix(covariance, self.d)?;
                if m.cholesky().is_none() {
                    return bad("covariance must be positive definite");
                }
            }
            XiLaw::UserTable { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return bad("user-table needs matching non-empty values and probs");
                }
                if values.iter().any(|v| v.len() != self.d) {
                    return bad("user-table values must have length d");
                }
                if probs.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
                    return bad("user-table probabilities must be positive");
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return bad("user-table probabilities must sum to 1");
                }
                if values.iter().any(|v| v.iter().all(|x| *x == 0.0)) {
                    return bad("user-table has an atom at 0, which the model excludes");
                }
                for i in 0..self.d {
                    let mean: f64 = values.iter().zip(probs).map(|(v, p)| v[i] * p).sum();
                    let scale: f64 = values.iter().zip(probs).map(|(v, p)| v[i].abs() * p).sum();
                    if mean.abs() > 1e-12 * scale.max(1.0) {
                        return bad("user-table law must be centred");
                    }
                }
            }
        }
        Ok(())
    }

    /// Covariance matrix Σ of `xi`.
    pub fn covariance(&self) -> DMatrix<f64> {
        match &self.xi_law {
            XiLaw::StandardGaussian1d => DMatrix::identity(1, 1),
            XiLaw::GaussianD { covariance } => DMatrix::from_fn(self.d, self.d, |i, j| covariance[i][j]),
            XiLaw::UserTable { values, probs } => {
                let mut m = DMatrix::zeros(self.d, self.d);
                for (v, p) in values.iter().zip(probs) {
                    for i in 0..self.d {
                        for j in 0..self.d {
                            m[(i, j)] += p * v[i] * v[j];
                        }
                    }
                }
                m
            }
        }
    }

    /// E|xi| (Euclidean norm).
    pub fn mean_abs_xi(&self) -> f64 {
        match &self.xi_law {
            XiLaw::StandardGaussian1d => (2.0 / std::f64::consts::PI).sqrt(),
            XiLaw::GaussianD { .. } => {
                let eig = SymmetricEigen::new(self.covariance()).eigenvalues;
                gaussian_mean_norm(eig.as_slice())
            }
            XiLaw::UserTable { values, probs } => {
                values.iter().zip(probs).map(|(v, p)| p * v.iter().map(|x| x * x).sum::<f64>().sqrt()).sum()
            }
        }
    }

    /// The level parameter Λ when these parameters belong to the exponential
    /// example class (d=1, U_l = Λ^l, σ ≡ 1, Gaussian ξ, p_up0 = 1, p_up + p_down = 1).
    pub fn anomalous_lambda(&self) -> Option<f64> {
        if self.d != 1 || self.xi_law != XiLaw::StandardGaussian1d {
            return None;
        }
        if !self.p_up0.exact().is_one() || !(self.p_up.exact() + self.p_down.exact()).is_one() {
            return None;
        }
        let lambda = match self.speeds.tail {
            Tail::Geometric { scale, ratio } if scale == 1.0 && ratio > 1.0 => ratio,
            _ => return None,
        };
        let speeds_ok =
            self.speeds.prefix.iter().enumerate().all(|(l, v)| (v - lambda.powi(l as i32)).abs() <= 1e-12 * v);
        let times_ok = self.timescales.prefix.iter().all(|v| *v == 1.0) && self.timescales.tail == Tail::Constant(1.0);
        (speeds_ok && times_ok).then_some(lambda)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: ModelParams = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }
}

/// E|X| for X ~ N(0, diag(eig)), from
/// E|X| = (2 sqrt(pi))^-1 ∫_0^∞ (1 - E e^{-t|X|^2}) t^{-3/2} dt,
/// integrated in log t with the trapezoidal rule.
fn gaussian_mean_norm(eig: &[f64]) -> f64 {
    let h = 0.01;
    let mut sum = 0.0;
    let mut s = -90.0;
    while s <= 90.0 {
        let t = f64::exp(s);
        let log_mgf: f64 = eig.iter().map(|l| -0.5 * (2.0 * l * t).ln_1p()).sum();
        let one_minus = -f64::exp_m1(log_mgf);
        sum += one_minus * f64::exp(-0.5 * s);
        s += h;
    }
    sum * h / (2.0 * std::f64::consts::PI.sqrt())
}

/// Parameters of the exponential example class, indexed by Λ and α = 2a.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnomalousParams {
    pub lambda: f64,
    pub a: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl AnomalousParams {
    pub fn from_alpha(lambda: f64, alpha: f64) -> Result<Self> {
        if !(lambda > 1.0 && lambda.is_finite()) {
            return Err(CoreError::InvalidParams(format!("need Λ > 1, got {lambda}")));
        }
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(CoreError::OutOfAnomalousRange(format!("α = {alpha} is not in (0, 2)")));
        }
        Ok(AnomalousParams { lambda, a: alpha / 2.0, alpha, beta: lambda.powf(-alpha) })
    }

    pub fn from_a(lambda: f64, a: f64) -> Result<Self> {
        Self::from_alpha(lambda, 2.0 * a)
    }

    /// β = Λ^{-α} = p_up / p_down.
    pub fn from_beta(lambda: f64, beta: f64) -> Result<Self> {
        if !(lambda > 1.0) {
            return Err(CoreError::InvalidParams(format!("need Λ > 1, got {lambda}")));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(CoreError::OutOfAnomalousRange(format!("β = {beta} is not in (0, 1)")));
        }
        let mut spec = Self::from_alpha(lambda, -beta.ln() / lambda.ln())?;
        spec.beta = beta;
        Ok(spec)
    }

    /// Λ as an integer, when it is one.
    pub fn integer_lambda(&self) -> Option<u64> {
        let r = self.lambda.round();
        (r == self.lambda && (2.0..1e6).contains(&r)).then_some(r as u64)
    }

    pub fn p_up(&self) -> f64 {
        1.0 / (1.0 + self.lambda.powf(self.alpha))
    }

    pub fn p_down(&self) -> f64 {
        1.0 - self.p_up()
    }
}

/// α = log(p_down/p_up) / log Λ. With `require_anomalous`, results outside (0, 2) are errors.
pub fn alpha_exponent(lambda: f64, p_up: f64, p_down: f64, require_anomalous: bool) -> Result<f64> {
    if !(lambda > 1.0) {
        return Err(CoreError::InvalidParams(format!("need Λ > 1, got {lambda}")));
    }
    if !(p_up > 0.0 && p_up < p_down) {
        return Err(CoreError::InvalidParams("need 0 < p_up < p_down".into()));
    }
    let alpha = (p_down / p_up).ln() / lambda.ln();
    if require_anomalous && !(alpha > 0.0 && alpha < 2.0 - 1e-12) {
        return Err(CoreError::OutOfAnomalousRange(format!("α = {alpha}: need 1 < p_down/p_up < Λ²")));
    }
    Ok(alpha)
}

/// Builds the exponential example class. When Λ^α is an integer k the
/// probabilities are exactly 1/(1+k) and k/(1+k).
pub fn make_anomalous(spec: &AnomalousParams) -> ModelParams {
    let ratio = spec.lambda.powf(spec.alpha);
    let k = ratio.round();
    let (p_up, p_down) = if (ratio - k).abs() <= 1e-12 * k && (2.0..1e15).contains(&k) {
        let k = k as i64;
        (Probability::ratio(1, 1 + k), Probability::ratio(k, 1 + k))
    } else {
        let p = Probability::from_f64(1.0 / (1.0 + ratio));
        let q = Probability::new(BigRational::one() - p.exact());
        (p, q)
    };
    ModelParams {
        d: 1,
        p_up,
        p_down,
        p_up0: Probability::ratio(1, 1),
        speeds: LevelRule::geometric(1.0, spec.lambda),
        timescales: LevelRule::constant(1.0),
        xi_law: XiLaw::StandardGaussian1d,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryMeasure {
    pub weights: Vec<f64>,
    /// `weights` as exact rationals.
    pub exact: Vec<Probability>,
    /// Σ_{l > max_level} μ_l.
    pub tail_bound: f64,
    pub kernel: Kernel,
}

impl StationaryMeasure {
    pub fn max_level(&self) -> u32 {
        self.weights.len() as u32 - 1
    }

    /// max_l |μ_l - Σ_j μ_j P(j, l)| over l < max_level.
    pub fn stationarity_residual(&self) -> f64 {
        let n = self.weights.len();
        (0..n - 1)
            .map(|l| {
                let lo = l.saturating_sub(1);
                let flow: f64 =
                    (lo..=(l + 1).min(n - 1)).map(|j| self.weights[j] * self.kernel.prob(j as u32, l as u32)).sum();
                (self.weights[l] - flow).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Stationary measure of the level chain, truncated after `max_level`,
/// computed in exact rational arithmetic.
pub fn stationary_measure(params: &ModelParams, max_level: u32) -> Result<StationaryMeasure> {
    if max_level < 1 {
        return Err(CoreError::InvalidInput("max_level must be at least 1".into()));
    }
    params.validate()?;
    let pu = params.p_up.exact();
    let pd = params.p_down.exact();
    let pu0 = params.p_up0.exact();
    let one = BigRational::one();
    let r = pu / pd;
    let mu0 = (&one - &r) / (&one + (pu0 - pu) / pd);
    let mut exact = vec![mu0.clone()];
    let mut cur = &mu0 * pu0 / pd;
    for _ in 1..=max_level {
        exact.push(cur.clone());
        cur = &cur * &r;
    }
    // Σ_{l > L} μ_l = μ_{L+1} / (1 - r)
    let tail = &cur / (&one - &r);
    Ok(StationaryMeasure {
        weights: exact.iter().map(rational_to_f64).collect(),
        exact: exact.into_iter().map(Probability::new).collect(),
        tail_bound: rational_to_f64(&tail),
        kernel: params.kernel(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffusionConstants {
    /// Σ μ_l U_l² σ_l²; `f64::INFINITY` when the series diverges.
    pub v_bar: f64,
    /// E|ξ| Σ μ_l σ_l; `f64::INFINITY` when the series diverges.
    pub m: f64,
    pub finite: bool,
    /// Bounds on the neglected series tails.
    pub v_bar_tail: f64,
    pub m_tail: f64,
}

/// Sums a series whose terms become geometric with ratio `rho` from index `k0`.
fn geometric_series(term: impl Fn(u32) -> f64, k0: u32, rho: f64, tol: f64) -> (f64, f64) {
    let mut sum = 0.0;
    let mut l = 0u32;
    loop {
        let t = term(l);
        sum += t;
        if l >= k0 {
            let tail = t * rho / (1.0 - rho);
            if tail < tol {
                return (sum, tail);
            }
        }
        l += 1;
    }
}

pub fn diffusion_constants(params: &ModelParams, tol: f64) -> Result<DiffusionConstants> {
    if !(tol > 0.0) {
        return Err(CoreError::InvalidInput("tol must be positive".into()));
    }
    params.validate()?;
    let r = params.p_up.value() / params.p_down.value();
    let k0 = (params.speeds.prefix.len().max(params.timescales.prefix.len())).max(1) as u32;
    let gu = params.speeds.tail_ratio();
    let gs = params.timescales.tail_ratio();
    let rho_v = r * gu * gu * gs * gs;
    let rho_m = r * gs;
    let mu = stationary_measure(params, 1)?;
    let (mu0, mu1) = (mu.weights[0], mu.weights[1]);
    let mu_l = |l: u32| if l == 0 { mu0 } else { mu1 * r.powi(l as i32 - 1) };
    if rho_v >= 1.0 || rho_m >= 1.0 {
        return Ok(DiffusionConstants {
            v_bar: f64::INFINITY,
            m: if rho_m >= 1.0 {
                f64::INFINITY
            } else {
                geometric_series(|l| mu_l(l) * params.timescale(l), k0, rho_m, tol).0 * params.mean_abs_xi()
            },
            finite: false,
            v_bar_tail: f64::INFINITY,
            m_tail: if rho_m >= 1.0 { f64::INFINITY } else { tol },
        });
    }
    let (v_bar, v_tail) = geometric_series(
        |l| {
            let u = params.speed(l);
            let s = params.timescale(l);
            mu_l(l) * u * u * s * s
        },
        k0,
        rho_v,
        tol,
    );
    let e_xi = params.mean_abs_xi();
    let (sm, m_tail) = geometric_series(|l| mu_l(l) * params.timescale(l), k0, rho_m, tol / e_xi);
    Ok(DiffusionConstants { v_bar, m: e_xi * sm, finite: true, v_bar_tail: v_tail, m_tail: m_tail * e_xi })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(pu: &str, pd: &str, pu0: &str) -> ModelParams {
        ModelParams {
            d: 1,
            p_up: pu.parse().unwrap(),
            p_down: pd.parse().unwrap(),
            p_up0: pu0.parse().unwrap(),
            speeds: LevelRule::constant(1.0),
            timescales: LevelRule::constant(1.0),
            xi_law: XiLaw::StandardGaussian1d,
        }
    }

    #[test]
    fn stationary_measure_exact_values() {
        let mu = stationary_measure(&chain("1/3", "2/3", "1"), 2).unwrap();
        assert_eq!(mu.exact[0], Probability::ratio(1, 4));
        assert_eq!(mu.exact[1], Probability::ratio(3, 8));
        assert_eq!(mu.exact[2], Probability::ratio(3, 16));
        assert_eq!(mu.tail_bound, 0.1875);
        let mu = stationary_measure(&chain("0.1", "0.9", "1"), 5).unwrap();
        assert_eq!(mu.exact[0], Probability::ratio(4, 9));
    }

    #[test]
    fn probability_parsing() {
        assert_eq!("0.1".parse::<Probability>().unwrap(), Probability::ratio(1, 10));
        assert_eq!("2/6".parse::<Probability>().unwrap(), Probability::ratio(1, 3));
        assert_eq!("25e-2".parse::<Probability>().unwrap(), Probability::ratio(1, 4));
        assert!("x".parse::<Probability>().is_err());
        assert!("1/0".parse::<Probability>().is_err());
        let p: Probability = serde_json::from_str("0.1").unwrap();
        assert_eq!(p, Probability::ratio(1, 10));
    }

    #[test]
    fn invariants_rejected() {
        assert!(chain("2/3", "1/3", "1").validate().is_err());
        assert!(chain("0.5", "0.6", "1").validate().is_err());
        assert!(chain("0.1", "0.2", "0").validate().is_err());
        let mut p = chain("0.1", "0.2", "1");
        p.speeds = LevelRule { prefix: vec![2.0, 1.0], tail: Tail::Constant(3.0) };
        assert!(p.validate().is_err());
        p.speeds = LevelRule::constant(1.0);
        p.xi_law = XiLaw::UserTable { values: vec![vec![0.0], vec![1.0], vec![-1.0]], probs: vec![0.2, 0.4, 0.4] };
        assert!(p.validate().is_err());
        p.xi_law = XiLaw::UserTable { values: vec![vec![1.0], vec![-1.0]], probs: vec![0.5, 0.5] };
        assert!(p.validate().is_ok());
        p.d = 2;
        p.xi_law = XiLaw::GaussianD { covariance: vec![vec![1.0, 2.0], vec![2.0, 1.0]] };
        assert!(p.validate().is_err());
    }

    #[test]
    fn alpha_examples() {
        assert!((alpha_exponent(2.0, 1.0 / 3.0, 2.0 / 3.0, true).unwrap() - 1.0).abs() < 1e-15);
        assert!((alpha_exponent(3.0, 0.25, 0.75, true).unwrap() - 1.0).abs() < 1e-15);
        assert!(alpha_exponent(2.0, 0.2, 0.8, true).is_err());
        assert!((alpha_exponent(2.0, 0.2, 0.8, false).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn make_anomalous_examples() {
        let spec = AnomalousParams::from_alpha(2.0, 1.0).unwrap();
        let p = make_anomalous(&spec);
        assert_eq!(p.p_up, Probability::ratio(1, 3));
        assert_eq!(p.p_down, Probability::ratio(2, 3));
        assert_eq!(p.anomalous_lambda(), Some(2.0));
        assert!((AnomalousParams::from_beta(2.0, 0.5).unwrap().a - 0.5).abs() < 1e-15);
        let a = AnomalousParams::from_beta(3.0, 0.3).unwrap().a;
        assert!((a - 0.54795).abs() < 5e-6);
    }

    #[test]
    fn diffusion_examples() {
        let mut p = chain("0.1", "0.9", "1");
        let dc = diffusion_constants(&p, 1e-14).unwrap();
        assert!((dc.v_bar - 1.0).abs() < 1e-13);
        p.speeds = LevelRule::geometric(1.0, 2.0);
        let dc = diffusion_constants(&p, 1e-14).unwrap();
        assert!(dc.finite);
        assert!((dc.v_bar - 4.0).abs() < 1e-12);
        assert!((dc.m - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
        let anomalous = make_anomalous(&AnomalousParams::from_alpha(2.0, 1.0).unwrap());
        assert!(!diffusion_constants(&anomalous, 1e-12).unwrap().finite);
    }

    #[test]
    fn gaussian_norm_mean() {
        assert!((gaussian_mean_norm(&[1.0]) - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-10);
        assert!((gaussian_mean_norm(&[1.0, 1.0]) - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-10);
        assert!((gaussian_mean_norm(&[4.0]) - 2.0 * (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-10);
    }
}
