use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{CoreError, Result};
use crate::level::{ExcursionRecord, LevelPath};
use crate::model::{diffusion_constants, make_anomalous, AnomalousParams, ModelParams, StationaryMeasure};
use crate::parallel::{map_indices, Execution};
use crate::rng::StreamSeed;
use crate::walk::WalkStepper;

/// Default significance level for pass/fail decisions.
pub const DEFAULT_LEVEL: f64 = 1e-3;

const BOOTSTRAP_REPS: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: String,
    pub statistic: f64,
    pub p_value: f64,
    pub n_samples: u64,
    /// Set when a check failed regardless of the p-value (e.g. a lattice violation).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub detail: BTreeMap<String, f64>,
}

impl TestReport {
    pub fn new(test: &str, statistic: f64, p_value: f64, n_samples: u64) -> Self {
        TestReport {
            test: test.to_string(),
            statistic,
            p_value: p_value.clamp(0.0, 1.0),
            n_samples,
            failure: None,
            detail: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.detail.insert(key.to_string(), value);
        self
    }

    pub fn passes(&self, level: f64) -> bool {
        self.failure.is_none() && self.p_value >= level
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn csv_header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["test", "statistic", "p_value", "n_samples", "failure"].map(String::from).to_vec();
        h.extend(self.detail.keys().cloned());
        h
    }

    fn csv_row(&self) -> Vec<String> {
        let mut r = vec![
            self.test.clone(),
            format!("{:e}", self.statistic),
            format!("{:e}", self.p_value),
            self.n_samples.to_string(),
            self.failure.clone().unwrap_or_default(),
        ];
        r.extend(self.detail.values().map(|v| format!("{v:e}")));
        r
    }

    /// Writes a header line and one row.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(self.csv_header())?;
        wr.write_record(self.csv_row())?;
        wr.flush()?;
        Ok(())
    }

    /// Appends a row to `path`, writing the header only when the file is new or empty.
    pub fn append_csv(&self, path: &Path) -> Result<()> {
        let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
        let file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
        let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        if fresh {
            wr.write_record(self.csv_header())?;
        }
        wr.write_record(self.csv_row())?;
        wr.flush()?;
        Ok(())
    }
}

/// Asymptotic Kolmogorov p-value with Stephens' small-sample correction.
pub fn kolmogorov_pvalue(d: f64, n_eff: f64) -> f64 {
    let sn = n_eff.sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS statistic and p-value.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len() as f64;
    let d = s
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = cdf(*x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    (d, kolmogorov_pvalue(d, n))
}

/// Two-sample KS statistic and p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    (d, kolmogorov_pvalue(d, na * nb / (na + nb)))
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("valid normal")
}

fn two_sided_normal_p(z: f64) -> f64 {
    if !z.is_finite() {
        return 0.0;
    }
    2.0 * standard_normal().cdf(-z.abs())
}

/// Chi-square goodness of fit for counts against expected frequencies.
pub fn chi_square(observed: &[f64], expected: &[f64]) -> (f64, f64, usize) {
    let stat: f64 = observed.iter().zip(expected).map(|(o, e)| (o - e) * (o - e) / e).sum();
    let df = observed.len().saturating_sub(1).max(1);
    let p = ChiSquared::new(df as f64).expect("df > 0").sf(stat);
    (stat, p, df)
}

/// FCLT endpoint check: √(m/(v̄ n)) W⁽¹⁾_n against N(0, Σ), starting from level 0.
pub fn fclt_check(
    params: &ModelParams,
    n: u64,
    n_samples: u64,
    seed: StreamSeed,
    exec: Execution,
) -> Result<TestReport> {
    params.validate()?;
    if n_samples < 2 || n == 0 {
        return Err(CoreError::InvalidInput("need n >= 1 and at least 2 samples".into()));
    }
    let dc = diffusion_constants(params, 1e-12)?;
    if !dc.finite {
        return Err(CoreError::NotSquareIntegrable(
            "v̄ = Σ μ_l U_l² σ_l² diverges (for U_l = Λ^l, σ ≡ 1 this means p_down/p_up <= Λ²), so the diffusive limit does not apply".into(),
        ));
    }
    let scale = (dc.m / (dc.v_bar * n as f64)).sqrt();
    let endpoints = map_indices(exec, n_samples, |i| {
        let mut rng = seed.stream("fclt", i);
        let mut st = WalkStepper::new(params, 0);
        st.position_at_time(n as f64, &mut rng).into_iter().map(|x| x * scale).collect::<Vec<f64>>()
    });
    let d = params.d;
    let sigma = params.covariance();
    let ns = n_samples as f64;
    let mean: Vec<f64> = (0..d).map(|i| endpoints.iter().map(|e| e[i]).sum::<f64>() / ns).collect();
    let mut cov = vec![vec![0.0; d]; d];
    for e in &endpoints {
        for i in 0..d {
            for j in 0..d {
                cov[i][j] += (e[i] - mean[i]) * (e[j] - mean[j]);
            }
        }
    }
    let mut max_rel = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            cov[i][j] /= ns - 1.0;
            let scale = (sigma[(i, i)] * sigma[(j, j)]).sqrt();
            max_rel = max_rel.max((cov[i][j] - sigma[(i, j)]).abs() / scale);
        }
    }
    let trace_ratio = (0..d).map(|i| cov[i][i]).sum::<f64>() / sigma.trace();
    let sd0 = sigma[(0, 0)].sqrt();
    let first: Vec<f64> = endpoints.iter().map(|e| e[0] / sd0).collect();
    let normal = standard_normal();
    let (ks, p) = ks_test(&first, |x| normal.cdf(x));
    let mut r = TestReport::new("fclt", ks, p, n_samples)
        .with("variance_ratio", trace_ratio)
        .with("covariance_max_rel_error", max_rel)
        .with("mean", mean[0])
        .with("v_bar", dc.v_bar)
        .with("m", dc.m)
        .with("n", n as f64);
    if d > 1 {
        r = r.with("ks_coordinate", 0.0);
    }
    Ok(r)
}

fn median(v: &mut [f64]) -> f64 {
    let n = v.len();
    let mid = n / 2;
    v.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
    let hi = v[mid];
    if n % 2 == 1 {
        hi
    } else {
        let lo = v[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lo + hi)
    }
}

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let pos = q * (v.len() - 1) as f64;
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    if i + 1 < v.len() {
        v[i] * (1.0 - f) + v[i + 1] * f
    } else {
        v[i]
    }
}

/// |M_n| on the grid for `n_samples` independent walks started at level 0.
pub fn martingale_norms_on_grid(
    params: &ModelParams,
    grid: &[u64],
    n_samples: u64,
    seed: StreamSeed,
    exec: Execution,
) -> Vec<Vec<f64>> {
    map_indices(exec, n_samples, |i| {
        let mut rng = seed.stream("scaling", i);
        let mut st = WalkStepper::new(params, 0);
        grid.iter()
            .map(|&n| {
                while st.n < n {
                    st.step(&mut rng);
                }
                st.m.iter().map(|x| x * x).sum::<f64>().sqrt()
            })
            .collect()
    })
}

/// Least-squares slope of log median|M_n| against log n, with a percentile
/// bootstrap half-width. `expected` is the exponent used for the p-value.
pub fn scaling_exponent_model(
    params: &ModelParams,
    grid: &[u64],
    n_samples: u64,
    expected: Option<f64>,
    seed: StreamSeed,
    exec: Execution,
) -> Result<TestReport> {
    params.validate()?;
    if grid.len() < 3 || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] == 0 {
        return Err(CoreError::InvalidInput("grid must be increasing, positive, with at least 3 points".into()));
    }
    if n_samples < 10 {
        return Err(CoreError::InvalidInput("need at least 10 samples".into()));
    }
    let norms = martingale_norms_on_grid(params, grid, n_samples, seed, exec);
    let logn: Vec<f64> = grid.iter().map(|n| (*n as f64).ln()).collect();
    let medians_of = |rows: &mut dyn Iterator<Item = &Vec<f64>>| -> Vec<f64> {
        let rows: Vec<&Vec<f64>> = rows.collect();
        (0..grid.len())
            .map(|g| {
                let mut col: Vec<f64> = rows.iter().map(|r| r[g]).collect();
                median(&mut col)
            })
            .collect()
    };
    let medians = medians_of(&mut norms.iter());
    let slope = ls_slope(&logn, &medians.iter().map(|m| m.ln()).collect::<Vec<_>>());
    let mut rng = seed.stream("bootstrap", 0);
    let mut boot: Vec<f64> = (0..BOOTSTRAP_REPS)
        .map(|_| {
            let idx: Vec<usize> = (0..norms.len()).map(|_| rng.random_range(0..norms.len())).collect();
            let med = medians_of(&mut idx.iter().map(|i| &norms[*i]));
            ls_slope(&logn, &med.iter().map(|m| m.ln()).collect::<Vec<_>>())
        })
        .collect();
    boot.sort_by(|a, b| a.total_cmp(b));
    let half_width = 0.5 * (quantile_sorted(&boot, 0.975) - quantile_sorted(&boot, 0.025));
    let p = match expected {
        Some(e) if half_width > 0.0 => two_sided_normal_p((slope - e) / (half_width / 1.96)),
        _ => 1.0,
    };
    let mut r =
        TestReport::new("scaling", slope, p, n_samples).with("slope", slope).with("bootstrap_half_width", half_width);
    if let Some(e) = expected {
        r = r.with("expected_exponent", e);
    }
    for (n, m) in grid.iter().zip(&medians) {
        r = r.with(&format!("median_n{n}"), *m);
    }
    Ok(r)
}

/// Scaling exponent for the exponential example class; the reference exponent is 1/α.
pub fn scaling_exponent(
    spec: &AnomalousParams,
    grid: &[u64],
    n_samples: u64,
    seed: StreamSeed,
    exec: Execution,
) -> Result<TestReport> {
    scaling_exponent_model(&make_anomalous(spec), grid, n_samples, Some(1.0 / spec.alpha), seed, exec)
}

/// Under-scaling surrogate: along n_j = ⌊Λ^{αj}⌋ and b_n = n^{1/α}/ln n,
/// estimates P(|M_{n_j}|/b_{n_j} > r). The p-value is one-sided against
/// H0: P >= 1/2 at the largest n_j, so small values mean the exceedance
/// probability looks small.
pub fn underscaling_check(
    spec: &AnomalousParams,
    js: &[u32],
    r: f64,
    n_samples: u64,
    seed: StreamSeed,
    exec: Execution,
) -> Result<TestReport> {
    let mut grid: Vec<u64> = js.iter().map(|j| spec.lambda.powf(spec.alpha * *j as f64).floor() as u64).collect();
    grid.dedup();
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] < 2 {
        return Err(CoreError::InvalidInput("j values must give increasing n_j >= 2".into()));
    }
    let params = make_anomalous(spec);
    let norms = martingale_norms_on_grid(&params, &grid, n_samples, seed, exec);
    let mut report = TestReport::new("underscaling", 0.0, 1.0, n_samples).with("r", r);
    let mut last = 0.0;
    for (g, n) in grid.iter().enumerate() {
        let nf = *n as f64;
        let b = nf.powf(1.0 / spec.alpha) / nf.ln();
        let frac = norms.iter().filter(|row| row[g] / b > r).count() as f64 / n_samples as f64;
        report = report.with(&format!("exceed_n{n}"), frac);
        last = frac;
    }
    let se = (0.25 / n_samples as f64).sqrt();
    report.statistic = last;
    report.p_value = standard_normal().cdf((last - 0.5) / se);
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeCheck {
    pub checked: u64,
    pub unchecked: u64,
    pub violations: Vec<u64>,
}

fn exact_z(r: &ExcursionRecord) -> Option<u128> {
    r.z_exact.or_else(|| {
        (r.z_value.fract() == 0.0 && r.z_value >= 0.0 && r.z_value < 9.007_199_254_740_992e15)
            .then_some(r.z_value as u128)
    })
}

/// Checks Z ∈ (1+Λ²) + (Λ²+Λ⁴)ℕ for every complete record (integer Λ only).
pub fn lattice_check(records: &[ExcursionRecord], lambda: u64) -> LatticeCheck {
    let l2 = (lambda * lambda) as u128;
    let base = 1 + l2;
    let step = l2 + l2 * l2;
    let mut out = LatticeCheck { checked: 0, unchecked: 0, violations: Vec::new() };
    for (i, r) in records.iter().enumerate().filter(|(_, r)| !r.truncated) {
        match exact_z(r) {
            Some(z) => {
                out.checked += 1;
                if z < base || !(z - base).is_multiple_of(step) {
                    out.violations.push(i as u64);
                }
            }
            None => out.unchecked += 1,
        }
    }
    out
}

/// Chi-square of 𝒩 against Geometric(p_down), lattice membership of Z, censoring.
pub fn excursion_tests(records: &[ExcursionRecord], spec: &AnomalousParams) -> Result<TestReport> {
    let complete: Vec<&ExcursionRecord> = records.iter().filter(|r| !r.truncated).collect();
    if complete.is_empty() {
        return Err(CoreError::InvalidInput("every excursion in the batch is truncated".into()));
    }
    if complete.len() < 1000 {
        return Err(CoreError::InvalidInput(format!("need at least 1000 complete excursions, got {}", complete.len())));
    }
    let pd = spec.p_down();
    let n = complete.len() as f64;
    // Bins k = 1..K-1 and a pooled tail k >= K, all with expected count >= 5.
    let mut probs = Vec::new();
    let mut k = 1u64;
    loop {
        let p = pd * (1.0 - pd).powi(k as i32 - 1);
        let tail_after = (1.0 - pd).powi(k as i32);
        if n * tail_after < 5.0 {
            probs.push(p + tail_after);
            break;
        }
        probs.push(p);
        k += 1;
    }
    let kmax = probs.len() as u64;
    let mut observed = vec![0.0; probs.len()];
    for r in &complete {
        let idx = r.n_visits_level1.clamp(1, kmax) - 1;
        observed[idx as usize] += 1.0;
    }
    let expected: Vec<f64> = probs.iter().map(|p| p * n).collect();
    let (stat, p, df) = chi_square(&observed, &expected);
    let truncated = records.len() - complete.len();
    let overflow = records.iter().filter(|r| r.overflow).count();
    let mut report = TestReport::new("excursions", stat, p, complete.len() as u64)
        .with("chi2_df", df as f64)
        .with("censored_fraction", truncated as f64 / records.len() as f64)
        .with("censored", truncated as f64)
        .with("overflowed", overflow as f64)
        .with("mean_n_visits_level1", complete.iter().map(|r| r.n_visits_level1 as f64).sum::<f64>() / n);
    if let Some(lambda) = spec.integer_lambda() {
        let lc = lattice_check(records, lambda);
        report = report
            .with("lattice_checked", lc.checked as f64)
            .with("lattice_unchecked", lc.unchecked as f64)
            .with("lattice_violations", lc.violations.len() as f64);
        if !lc.violations.is_empty() {
            report.failure = Some(format!("{} excursions have Z outside the lattice", lc.violations.len()));
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharfuncPoint {
    pub theta: f64,
    pub value: Complex64,
    pub std_error: f64,
}

/// (1/N) Σ e^{iθZ_j} with standard error sqrt((1 - |φ̂|²)/N).
pub fn empirical_charfunc(z: &[f64], thetas: &[f64]) -> Result<Vec<CharfuncPoint>> {
    if z.is_empty() {
        return Err(CoreError::InvalidInput("no samples".into()));
    }
    let n = z.len() as f64;
    Ok(thetas
        .iter()
        .map(|&theta| {
            let (mut c, mut s) = (0.0, 0.0);
            for zj in z {
                let (sn, cs) = (theta * zj).sin_cos();
                c += cs;
                s += sn;
            }
            let value = Complex64::new(c / n, s / n);
            let var = (1.0 - value.norm_sqr()).max(0.0);
            CharfuncPoint { theta, value, std_error: (var / n).sqrt() }
        })
        .collect())
}

/// Compares occupation frequencies of L_1..L_n with μ. Transitions that the
/// kernel forbids make the path invalid.
pub fn occupation_test(path: &LevelPath, mu: &StationaryMeasure) -> Result<TestReport> {
    let n = path.len_steps();
    if n < 1000 {
        return Err(CoreError::InvalidInput(format!("path has {n} steps, need at least 1000")));
    }
    for (j, w) in path.levels.windows(2).enumerate() {
        if mu.kernel.prob(w[0], w[1]) <= 0.0 {
            return Err(CoreError::InvalidInput(format!(
                "transition {} -> {} at step {j} has probability 0 under the kernel",
                w[0], w[1]
            )));
        }
    }
    let lmax = mu.max_level() as usize;
    let mut counts = vec![0u64; lmax + 2];
    for l in &path.levels[1..] {
        counts[(*l as usize).min(lmax + 1)] += 1;
    }
    let nf = n as f64;
    let mut tv = 0.0;
    for l in 0..=lmax {
        tv += (counts[l] as f64 / nf - mu.weights[l]).abs();
    }
    tv += (counts[lmax + 1] as f64 / nf - mu.tail_bound).abs();
    tv *= 0.5;
    let f0 = path.local_time_zero as f64 / nf;
    // Batch means for the level-0 indicator.
    let batches = 100usize;
    let size = n as usize / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| path.levels[1 + b * size..1 + (b + 1) * size].iter().filter(|l| **l == 0).count() as f64 / size as f64)
        .collect();
    let bm = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - bm) * (m - bm)).sum::<f64>() / (batches - 1) as f64;
    let se = (var / batches as f64).sqrt();
    let z = if se > 0.0 { (f0 - mu.weights[0]) / se } else { f64::INFINITY };
    Ok(TestReport::new("occupation", z, two_sided_normal_p(z), n)
        .with("tv_distance", tv)
        .with("level0_frequency", f0)
        .with("mu0", mu.weights[0])
        .with("level0_se", se)
        .with("max_level", lmax as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_tail_values() {
        // P(K > 1.36) ≈ 0.049
        let p = kolmogorov_pvalue(1.36 / 1e3f64.sqrt(), 1e3);
        assert!((p - 0.0494).abs() < 3e-3, "{p}");
        assert_eq!(kolmogorov_pvalue(0.0, 100.0), 1.0);
    }

    #[test]
    fn chi_square_perfect_fit() {
        let (s, p, df) = chi_square(&[10.0, 20.0, 30.0], &[10.0, 20.0, 30.0]);
        assert_eq!((s, df), (0.0, 2));
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn median_and_slope() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        let x = [0.0, 1.0, 2.0];
        assert!((ls_slope(&x, &[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn lattice_violation_flagged() {
        let rec = |z: f64| ExcursionRecord {
            stream: 0,
            tau0: 2,
            n_visits_level1: 1,
            z_value: z,
            z_exact: None,
            truncated: false,
            overflow: false,
        };
        let lc = lattice_check(&[rec(5.0), rec(25.0), rec(7.0), rec(45.0)], 2);
        assert_eq!(lc.checked, 4);
        assert_eq!(lc.violations, vec![2]);
    }

    #[test]
    fn charfunc_at_zero() {
        let pts = empirical_charfunc(&[5.0, 25.0, 45.0], &[0.0]).unwrap();
        assert_eq!(pts[0].value, Complex64::new(1.0, 0.0));
        assert!(empirical_charfunc(&[], &[0.0]).is_err());
    }
}
