use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::model::{AnomalousParams, Kernel, ModelParams};
use crate::parallel::{map_indices, Execution};
use crate::rng::{StreamRng, StreamSeed};

pub const DEFAULT_EXCURSION_CAP: u64 = 10_000_000;

/// One kernel step from `current`.
pub fn step_level<R: Rng + ?Sized>(current: u32, kernel: &Kernel, rng: &mut R) -> u32 {
    let u: f64 = rng.random();
    if current == 0 {
        if u < kernel.p_up0 {
            1
        } else {
            0
        }
    } else if u < kernel.p_up {
        current + 1
    } else if u < kernel.p_up + kernel.p_down {
        current - 1
    } else {
        current
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelPath {
    pub levels: Vec<u32>,
    /// Times j >= 1 with L_j = 0.
    pub zero_returns: Vec<u64>,
    /// N_n(0) = #{1 <= j <= n : L_j = 0}.
    pub local_time_zero: u64,
}

impl LevelPath {
    pub fn from_levels(levels: Vec<u32>) -> Self {
        let zero_returns: Vec<u64> =
            levels.iter().enumerate().skip(1).filter(|(_, l)| **l == 0).map(|(j, _)| j as u64).collect();
        let local_time_zero = zero_returns.len() as u64;
        LevelPath { levels, zero_returns, local_time_zero }
    }

    pub fn len_steps(&self) -> u64 {
        self.levels.len() as u64 - 1
    }
}

pub fn simulate_levels<R: Rng + ?Sized>(params: &ModelParams, n: u64, l0: u32, rng: &mut R) -> LevelPath {
    let kernel = params.kernel();
    let mut levels = Vec::with_capacity(n as usize + 1);
    let mut cur = l0;
    levels.push(cur);
    for _ in 0..n {
        cur = step_level(cur, &kernel, rng);
        levels.push(cur);
    }
    LevelPath::from_levels(levels)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcursionRecord {
    /// Stream index the excursion was drawn from.
    pub stream: u64,
    /// First return time to 0 (or the cap when truncated).
    pub tau0: u64,
    /// Number of visits to level 1 before the return (𝒩).
    pub n_visits_level1: u64,
    /// Z = Σ_{j<τ0} Λ^{2 L_j}, accumulated in `f64`.
    pub z_value: f64,
    /// Z as an exact integer when Λ is an integer and the sum fits in `u128`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub z_exact: Option<u128>,
    pub truncated: bool,
    /// The `f64` accumulator overflowed (the excursion is also marked truncated).
    pub overflow: bool,
}

impl ExcursionRecord {
    pub fn is_complete(&self) -> bool {
        !self.truncated
    }
}

/// Runs the level chain from 0 until its first return to 0, or `cap` steps.
pub fn sample_excursion<R: Rng + ?Sized>(spec: &AnomalousParams, cap: u64, rng: &mut R) -> Result<ExcursionRecord> {
    if cap < 2 {
        return Err(CoreError::InvalidInput(format!("excursion cap must be at least 2, got {cap}")));
    }
    let kernel = Kernel { p_up: spec.p_up(), p_down: spec.p_down(), p_up0: 1.0 };
    let lambda2 = spec.lambda * spec.lambda;
    let int_lambda2 = spec.integer_lambda().map(|l| (l * l) as u128);
    let mut pow_cache: Vec<f64> = vec![1.0];
    let mut level = 0u32;
    let mut z = 0.0f64;
    let mut z_exact: Option<u128> = int_lambda2.map(|_| 0);
    let mut n1 = 0u64;
    let mut steps = 0u64;
    loop {
        while pow_cache.len() <= level as usize {
            let last = *pow_cache.last().unwrap();
            pow_cache.push(last * lambda2);
        }
        z += pow_cache[level as usize];
        if let (Some(acc), Some(l2)) = (z_exact, int_lambda2) {
            z_exact = l2.checked_pow(level).and_then(|p| acc.checked_add(p));
        }
        if level == 1 {
            n1 += 1;
        }
        level = step_level(level, &kernel, rng);
        steps += 1;
        if level == 0 {
            let overflow = !z.is_finite();
            return Ok(ExcursionRecord {
                stream: 0,
                tau0: steps,
                n_visits_level1: n1,
                z_value: z,
                z_exact,
                truncated: overflow,
                overflow,
            });
        }
        if steps >= cap {
            return Ok(ExcursionRecord {
                stream: 0,
                tau0: steps,
                n_visits_level1: n1,
                z_value: z,
                z_exact,
                truncated: true,
                overflow: !z.is_finite(),
            });
        }
    }
}

/// Draws `count` independent excursions; excursion `i` uses stream `("excursion", i)`.
pub fn simulate_excursions(
    spec: &AnomalousParams,
    count: u64,
    cap: u64,
    seed: StreamSeed,
    exec: Execution,
) -> Result<Vec<ExcursionRecord>> {
    if cap < 2 {
        return Err(CoreError::InvalidInput(format!("excursion cap must be at least 2, got {cap}")));
    }
    let out = map_indices(exec, count, |i| {
        let mut rng = seed.stream("excursion", i);
        let mut rec = sample_excursion(spec, cap, &mut rng).expect("cap validated");
        rec.stream = i;
        rec
    });
    Ok(out)
}

/// A sample of Z assembled from the random-stability identity
/// Z = 1 + Λ² + Λ² Σ_{k=1}^{𝒩-1} Z_k, 𝒩 ~ Geometric(p_down) on {1, 2, ...},
/// instead of from a level path.
pub fn sample_z_by_stability<R: Rng + ?Sized>(spec: &AnomalousParams, rng: &mut R) -> f64 {
    let l2 = spec.lambda * spec.lambda;
    let geo = Geometric::new(spec.p_down()).expect("p_down in (0,1)");
    // Each pending node contributes (1 + Λ²) scaled by Λ^{2 depth}.
    let mut stack: Vec<f64> = vec![1.0];
    let mut z = 0.0;
    while let Some(scale) = stack.pop() {
        z += scale * (1.0 + l2);
        let children = geo.sample(rng); // failures before the first success = 𝒩 - 1
        for _ in 0..children {
            stack.push(scale * l2);
        }
    }
    z
}

pub fn simulate_z_by_stability(spec: &AnomalousParams, count: u64, seed: StreamSeed, exec: Execution) -> Vec<f64> {
    map_indices(exec, count, |i| {
        let mut rng: StreamRng = seed.stream("stability", i);
        sample_z_by_stability(spec, &mut rng)
    })
}

/// Writes excursions as CSV: seed, stream, tau0, n_visits_level1, z_value, truncated.
pub fn write_excursions_csv<W: Write>(w: W, seed: StreamSeed, records: &[ExcursionRecord]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["seed", "stream", "tau0", "n_visits_level1", "z_value", "truncated"])?;
    for r in records {
        let z = match r.z_exact {
            Some(z) if !r.truncated => z.to_string(),
            _ => format!("{:e}", r.z_value),
        };
        wr.write_record([
            seed.0.to_string(),
            r.stream.to_string(),
            r.tau0.to_string(),
            r.n_visits_level1.to_string(),
            z,
            r.truncated.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}
