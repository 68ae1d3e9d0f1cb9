use std::io::Write;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::level::{step_level, LevelPath};
use crate::model::{Kernel, ModelParams, XiLaw};

/// Draws ξ according to the model's jump law.
#[derive(Clone, Debug)]
pub enum XiSampler {
    Gaussian1d,
    GaussianD { chol: DMatrix<f64> },
    Table { values: Vec<Vec<f64>>, cumulative: Vec<f64> },
}

impl XiSampler {
    pub fn new(params: &ModelParams) -> Self {
        match &params.xi_law {
            XiLaw::StandardGaussian1d => XiSampler::Gaussian1d,
            XiLaw::GaussianD { .. } => {
                let chol = params.covariance().cholesky().expect("validated positive definite").l();
                XiSampler::GaussianD { chol }
            }
            XiLaw::UserTable { values, probs } => {
                let mut acc = 0.0;
                let mut cumulative: Vec<f64> = probs
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect();
                *cumulative.last_mut().unwrap() = 1.0;
                XiSampler::Table { values: values.clone(), cumulative }
            }
        }
    }

    /// Fills `out` (length d) and returns |ξ|.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> f64 {
        match self {
            XiSampler::Gaussian1d => {
                let z: f64 = rng.sample(StandardNormal);
                out[0] = z;
                z.abs()
            }
            XiSampler::GaussianD { chol } => {
                let d = out.len();
                let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                for i in 0..d {
                    out[i] = (0..=i).map(|j| chol[(i, j)] * z[j]).sum();
                }
                out.iter().map(|x| x * x).sum::<f64>().sqrt()
            }
            XiSampler::Table { values, cumulative } => {
                let u: f64 = rng.random();
                let i = cumulative.partition_point(|c| *c <= u).min(values.len() - 1);
                out.copy_from_slice(&values[i]);
                out.iter().map(|x| x * x).sum::<f64>().sqrt()
            }
        }
    }
}

/// Incremental simulator shared by the stored and streaming modes.
#[derive(Clone, Debug)]
pub struct WalkStepper<'a> {
    params: &'a ModelParams,
    kernel: Kernel,
    sampler: XiSampler,
    speed_times_sigma: Vec<f64>,
    sigma: Vec<f64>,
    lambda2: Option<f64>,
    lambda2_pow: Vec<f64>,
    pub level: u32,
    pub n: u64,
    /// M_n
    pub m: Vec<f64>,
    /// 𝒯(n)
    pub t: f64,
    /// V_n (exponential class only, 0 otherwise)
    pub v: f64,
    /// ξ_{n-1} and X_{n-1} of the last step
    pub last_xi: Vec<f64>,
    pub last_x: Vec<f64>,
    pub last_dt: f64,
    pub last_level: u32,
}

impl<'a> WalkStepper<'a> {
    pub fn new(params: &'a ModelParams, l0: u32) -> Self {
        let d = params.d;
        WalkStepper {
            params,
            kernel: params.kernel(),
            sampler: XiSampler::new(params),
            speed_times_sigma: Vec::new(),
            sigma: Vec::new(),
            lambda2: params.anomalous_lambda().map(|l| l * l),
            lambda2_pow: vec![1.0],
            level: l0,
            n: 0,
            m: vec![0.0; d],
            t: 0.0,
            v: 0.0,
            last_xi: vec![0.0; d],
            last_x: vec![0.0; d],
            last_dt: 0.0,
            last_level: l0,
        }
    }

    fn ensure_level(&mut self, level: u32) {
        while self.sigma.len() <= level as usize {
            let l = self.sigma.len() as u32;
            let s = self.params.timescale(l);
            self.sigma.push(s);
            self.speed_times_sigma.push(self.params.speed(l) * s);
        }
        if let Some(l2) = self.lambda2 {
            while self.lambda2_pow.len() <= level as usize {
                let last = *self.lambda2_pow.last().unwrap();
                self.lambda2_pow.push(last * l2);
            }
        }
    }

    /// Performs displacement n: draws ξ_n, sets X_n, advances M, 𝒯, V and draws L_{n+1}.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let l = self.level;
        self.ensure_level(l);
        let abs_xi = self.sampler.sample(rng, &mut self.last_xi);
        let us = self.speed_times_sigma[l as usize];
        for (x, xi) in self.last_x.iter_mut().zip(&self.last_xi) {
            *x = us * xi;
        }
        for (m, x) in self.m.iter_mut().zip(&self.last_x) {
            *m += x;
        }
        self.last_dt = self.sigma[l as usize] * abs_xi;
        self.t += self.last_dt;
        if self.lambda2.is_some() {
            self.v += self.lambda2_pow[l as usize];
        }
        self.last_level = l;
        self.level = step_level(l, &self.kernel, rng);
        self.n += 1;
    }

    /// Runs until 𝒯 reaches `t_abs` and returns W⁽¹⁾ at absolute time `t_abs`.
    pub fn position_at_time<R: Rng + ?Sized>(&mut self, t_abs: f64, rng: &mut R) -> Vec<f64> {
        while self.t < t_abs {
            self.step(rng);
        }
        if self.n == 0 || self.last_dt == 0.0 {
            return self.m.clone();
        }
        // Back off the part of the last flight after t_abs.
        let overshoot = (self.t - t_abs) / self.last_dt;
        self.m.iter().zip(&self.last_x).map(|(m, x)| m - overshoot * x).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkSample {
    pub d: usize,
    pub levels: LevelPath,
    /// ξ_k, row-major `n × d`.
    pub xi: Vec<f64>,
    /// X_k = U σ ξ_k, row-major `n × d`.
    pub displacements: Vec<f64>,
    /// M_n for n = 0..=N, row-major `(N+1) × d`.
    pub m_partial: Vec<f64>,
    /// 𝒯(n) for n = 0..=N.
    pub t_partial: Vec<f64>,
    /// V_n for n = 0..=N, present for the exponential example class.
    pub v_partial: Option<Vec<f64>>,
}

impl WalkSample {
    pub fn n_steps(&self) -> usize {
        self.t_partial.len() - 1
    }

    pub fn m_at(&self, n: usize) -> &[f64] {
        &self.m_partial[n * self.d..(n + 1) * self.d]
    }

    pub fn x_at(&self, n: usize) -> &[f64] {
        &self.displacements[n * self.d..(n + 1) * self.d]
    }

    pub fn xi_at(&self, n: usize) -> &[f64] {
        &self.xi[n * self.d..(n + 1) * self.d]
    }
}

pub fn simulate_walk<R: Rng + ?Sized>(params: &ModelParams, n_steps: u64, l0: u32, rng: &mut R) -> Result<WalkSample> {
    if n_steps < 1 {
        return Err(CoreError::InvalidInput("n_steps must be at least 1".into()));
    }
    params.validate()?;
    let d = params.d;
    let n = n_steps as usize;
    let mut st = WalkStepper::new(params, l0);
    let mut levels = Vec::with_capacity(n + 1);
    let mut xi = Vec::with_capacity(n * d);
    let mut xs = Vec::with_capacity(n * d);
    let mut m_partial = Vec::with_capacity((n + 1) * d);
    let mut t_partial = Vec::with_capacity(n + 1);
    let track_v = params.anomalous_lambda().is_some();
    let mut v_partial = Vec::with_capacity(if track_v { n + 1 } else { 0 });
    levels.push(l0);
    m_partial.extend_from_slice(&st.m);
    t_partial.push(0.0);
    if track_v {
        v_partial.push(0.0);
    }
    for _ in 0..n {
        st.step(rng);
        levels.push(st.level);
        xi.extend_from_slice(&st.last_xi);
        xs.extend_from_slice(&st.last_x);
        m_partial.extend_from_slice(&st.m);
        t_partial.push(st.t);
        if track_v {
            v_partial.push(st.v);
        }
    }
    Ok(WalkSample {
        d,
        levels: LevelPath::from_levels(levels),
        xi,
        displacements: xs,
        m_partial,
        t_partial,
        v_partial: track_v.then_some(v_partial),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkPoint {
    pub t: f64,
    pub position: Vec<f64>,
    pub level: u32,
}

/// W_t: locates 𝒯(k) <= t < 𝒯(k+1) and interpolates linearly within flight k.
pub fn evaluate_walk_at(sample: &WalkSample, t: f64) -> Result<WalkPoint> {
    let n = sample.n_steps();
    let horizon = sample.t_partial[n];
    if !(t >= 0.0) || t > horizon {
        return Err(CoreError::InvalidInput(format!("t = {t} is outside the simulated horizon [0, {horizon}]")));
    }
    if t == horizon {
        return Ok(WalkPoint { t, position: sample.m_at(n).to_vec(), level: sample.levels.levels[n] });
    }
    let k = sample.t_partial.partition_point(|s| *s <= t) - 1;
    let span = sample.t_partial[k + 1] - sample.t_partial[k];
    let frac = if span > 0.0 { (t - sample.t_partial[k]) / span } else { 0.0 };
    let position = sample.m_at(k).iter().zip(sample.x_at(k)).map(|(m, x)| m + frac * x).collect();
    Ok(WalkPoint { t, position, level: sample.levels.levels[k] })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceProfile {
    pub times: Vec<u64>,
    pub values: Vec<f64>,
    /// V at each zero-return time τ₀^{(k)}.
    pub at_zero_returns: Vec<f64>,
}

/// V_n at the requested displacement times, plus at every return to 0.
pub fn variance_profile(sample: &WalkSample, times: &[u64]) -> Result<VarianceProfile> {
    let v = sample
        .v_partial
        .as_ref()
        .ok_or_else(|| CoreError::InvalidInput("V_n is only defined for the exponential example class".into()))?;
    let n = sample.n_steps() as u64;
    if let Some(bad) = times.iter().find(|t| **t > n) {
        return Err(CoreError::InvalidInput(format!("time {bad} is beyond the horizon {n}")));
    }
    Ok(VarianceProfile {
        times: times.to_vec(),
        values: times.iter().map(|t| v[*t as usize]).collect(),
        at_zero_returns: sample.levels.zero_returns.iter().map(|t| v[*t as usize]).collect(),
    })
}

/// Trajectory CSV: step, level, xi, displacement, m_partial, t_partial, v_partial.
/// Row `n` holds L_n, ξ_n, X_n, M_n, 𝒯(n), V_n; the final row has no ξ or X.
pub fn write_trajectory_csv<W: Write>(w: W, sample: &WalkSample) -> Result<()> {
    let d = sample.d;
    let mut wr = csv::Writer::from_writer(w);
    let cols = |name: &str| -> Vec<String> {
        if d == 1 {
            vec![name.to_string()]
        } else {
            (0..d).map(|i| format!("{name}_{i}")).collect()
        }
    };
    let mut header = vec!["step".to_string(), "level".to_string()];
    header.extend(cols("xi"));
    header.extend(cols("displacement"));
    header.extend(cols("m_partial"));
    header.push("t_partial".into());
    header.push("v_partial".into());
    wr.write_record(&header)?;
    let n = sample.n_steps();
    for k in 0..=n {
        let mut row = vec![k.to_string(), sample.levels.levels[k].to_string()];
        if k < n {
            row.extend(sample.xi_at(k).iter().map(|x| format!("{x:e}")));
            row.extend(sample.x_at(k).iter().map(|x| format!("{x:e}")));
        } else {
            row.extend(std::iter::repeat_n(String::new(), 2 * d));
        }
        row.extend(sample.m_at(k).iter().map(|x| format!("{x:e}")));
        row.push(format!("{:e}", sample.t_partial[k]));
        row.push(sample.v_partial.as_ref().map(|v| format!("{:e}", v[k])).unwrap_or_default());
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}
