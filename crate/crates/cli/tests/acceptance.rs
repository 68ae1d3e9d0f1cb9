//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use mlwalk_bignum::{agree_at_precision, Agreement as _, BigComplex, BigReal, Precision};
use mlwalk_certify::*;
use mlwalk_core::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// (Λ, β, n, ℓ(θ₁), ℓ(θ₂), ratio, rhs), reference values.
const ROWS: [(u64, &str, u32, [&str; 4], &str, &str); 17] = [
    (2, "0.27", 191, ["4.7468", "-56.570", "5.4773", "-56.865"], "0.99372", "0.99407"),
    (2, "0.3", 65, ["3.9459", "-19.540", "4.5780", "-19.765"], "0.98258", "0.98526"),
    (2, "0.4", 18, ["2.30871", "-4.0115", "2.6873", "-4.0863"], "0.94635", "0.96133"),
    (2, "0.5", 10, ["1.4283", "-1.4456", "1.6410", "-1.4570"], "0.92605", "0.93946"),
    (2, "0.6", 8, ["0.89810", "-0.60217", "1.0150", "-0.60137"], "0.91651", "0.92128"),
    (2, "0.7", 11, ["0.54303", "-0.23698", "0.59588", "-0.22898"], "0.92814", "0.94599"),
    (2, "0.8", 18, ["0.29541", "-0.076955", "0.31356", "-0.071333"], "0.94930", "0.95659"),
    (2, "0.9", 43, ["0.12122", "-0.014441", "0.12461", "-0.012843"], "0.97450", "0.97650"),
    (3, "0.13", 91, ["7.1152", "-54.501", "4.5850", "-55.227"], "0.99180", "0.99185"),
    (3, "0.2", 24, ["2.8396", "-9.7361", "4.4837", "-9.1033"], "0.99942", "0.99959"),
    (3, "0.3", 9, ["1.8538", "-3.6337", "2.7803", "-3.0738"], "0.98422", "0.98490"),
    (3, "0.4", 8, ["1.3517", "-1.8439", "1.8460", "-1.3854"], "0.99053", "0.99636"),
    (3, "0.5", 9, ["1.2385", "-0.66371", "1.0090", "-0.99722"], "0.99050", "0.99464"),
    (3, "0.6", 9, ["0.81913", "-0.31535", "0.73372", "-0.52578"], "0.97239", "0.97407"),
    (3, "0.7", 12, ["0.51139", "-0.13439", "0.49445", "-0.24327"], "0.95954", "0.96633"),
    (3, "0.8", 19, ["0.28495", "-0.045883", "0.28805", "-0.087170"], "0.95902", "0.96697"),
    (3, "0.9", 42, ["0.11951", "-0.0089062", "0.12198", "-0.017123"], "0.97295", "0.97430"),
];

/// Within one unit of the 5th significant digit of the printed value.
fn within_ulp(x: &BigReal, printed: &str) -> bool {
    let want: f64 = printed.parse().unwrap();
    let ulp = 10f64.powi(want.abs().log10().floor() as i32 - 4);
    (x.to_f64() - want).abs() <= ulp * 1.000001
}

fn table_rows() -> Vec<(TableRow, Duration)> {
    let opts = TableOptions::default();
    ROWS.iter()
        .map(|(l, b, ..)| {
            let t = Instant::now();
            let row = reproduce_table(*l, b, &opts).expect("table row");
            (row, t.elapsed())
        })
        .collect()
}

fn c1_tables(rows: &[(TableRow, Duration)]) -> Outcome {
    let mut bad = Vec::new();
    let mut slowest = (Duration::ZERO, Duration::ZERO);
    for ((row, dt), (l, b, n, ells, ratio, rhs)) in rows.iter().zip(ROWS) {
        let r = &row.result;
        let parts = [&r.ell1.re, &r.ell1.im, &r.ell2.re, &r.ell2.im];
        let values_ok = parts.iter().zip(ells).all(|(v, p)| within_ulp(v, p))
            && within_ulp(&r.ratio, ratio)
            && within_ulp(&r.rhs, rhs);
        let budget = if n <= 20 { Duration::from_secs(1) } else { Duration::from_secs(30) };
        if n <= 20 {
            slowest.0 = slowest.0.max(*dt);
        } else {
            slowest.1 = slowest.1.max(*dt);
        }
        if !(values_ok && row.n == n && r.certified && *dt < budget) {
            bad.push(format!("Λ={l} β={b} (n={} certified={} {:.2?})", row.n, r.certified, dt));
        }
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            format!("17/17 rows match, slowest small row {:.2?}, slowest large row {:.2?}", slowest.0, slowest.1)
        } else {
            format!("mismatches: {}", bad.join("; "))
        },
    )
}

fn c2_lattice() -> Outcome {
    let p = Precision::DEFAULT;
    let hp = p.doubled();
    let mut worst = u32::MAX;
    for lambda in [2u64, 3] {
        for a in ["0.2", "0.5", "0.8"] {
            let m = ModelSpec::from_a(&lambda.to_string(), a).at(p).unwrap();
            let l2 = BigReal::from_i64((lambda * lambda) as i64, hp);
            let av = BigReal::parse_decimal(a, hp).unwrap();
            for k in 1..=20u64 {
                let got = ell_exact_lattice(&m, k).unwrap();
                let two_pi_k = BigReal::pi(hp).mul_i64(2 * k as i64);
                let (s, c) = (&two_pi_k / &l2).sin_cos();
                let theta = &two_pi_k / &(&l2 + &l2.square());
                let scale = theta.pow(&(-av.clone())).unwrap();
                let want = BigComplex::new(&(&BigReal::one(hp) - &c) * &scale, -(&s * &scale));
                let digits = if k % (lambda * lambda) == 0 {
                    if got.is_zero() && want.abs().log10_abs() < -(p.get() as f64 - 5.0) {
                        u32::MAX
                    } else {
                        0
                    }
                } else {
                    got.digits_agreed(&want.with_precision(p))
                };
                worst = worst.min(digits);
            }
        }
    }
    outcome(
        worst >= p.get() - 5,
        format!("worst agreement {} digits at P={} (need {})", worst.min(p.get()), p.get(), p.get() - 5),
    )
}

fn c3_psi() -> Outcome {
    let p = Precision::digits(60);
    let margin = BigReal::parse_decimal("1e-10", p).unwrap();
    let mut fails = 0;
    let mut tightest = f64::INFINITY;
    for lambda in ["2", "3"] {
        for a in ["0.2", "0.5", "0.8"] {
            let m = ModelSpec::from_a(lambda, a).at(p).unwrap();
            let k = if lambda == "2" { 2 } else { 9 };
            let th = ThetaSpec::new(k, 10).unwrap().value(&m).unwrap();
            let psi2 = psi_bound(&m, &th, 2).unwrap();
            for n in 1..=15 {
                let d = matrix_discrepancy(&m, &th, n).unwrap();
                let gap = &psi2 - &d;
                tightest = tightest.min((&d / &psi2).to_f64());
                if !(gap > &psi2 * &margin) {
                    fails += 1;
                }
            }
        }
    }
    outcome(fails == 0, format!("90 cases, {fails} violations, largest discrepancy/Ψ₂ = {tightest:.6}"))
}

fn c4_fixed_point() -> Outcome {
    let t = Instant::now();
    let spec = AnomalousParams::from_alpha(2.0, 1.0).unwrap();
    let recs = simulate_excursions(&spec, 1_000_000, DEFAULT_EXCURSION_CAP, StreamSeed::new(2024), Execution::Parallel)
        .unwrap();
    let z: Vec<f64> = recs.iter().filter(|r| !r.truncated).map(|r| r.z_value).collect();
    let thetas = [0.1, 0.3, 1.0];
    let mc = empirical_charfunc(&z, &thetas).unwrap();
    let p = Precision::digits(30);
    let m = ModelSpec::from_alpha("2", "1").at(p).unwrap();
    let tol = BigReal::parse_decimal("1e-20", p).unwrap();
    let mut worst = 0.0f64;
    for pt in &mc {
        let (re, im) = phi_fixed_point(&m, &BigReal::from_f64(pt.theta, p), &tol).unwrap().to_f64_pair();
        let dev = ((re - pt.value.re).powi(2) + (im - pt.value.im).powi(2)).sqrt() / pt.std_error;
        worst = worst.max(dev);
    }
    let dt = t.elapsed();
    outcome(
        worst <= 3.0 && dt < Duration::from_secs(120),
        format!("largest deviation {worst:.2} s.e. over {} samples, {dt:.1?}", z.len()),
    )
}

fn c5_support() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (lambda, modulus) in [(2u64, 20u128), (3, 90)] {
        let spec = AnomalousParams::from_alpha(lambda as f64, 1.0).unwrap();
        let recs = simulate_excursions(&spec, 100_000, DEFAULT_EXCURSION_CAP, StreamSeed::new(5), Execution::Parallel)
            .unwrap();
        let base = 1 + (lambda * lambda) as u128;
        let complete: Vec<_> = recs.iter().filter(|r| !r.truncated).collect();
        let good = complete.iter().filter(|r| r.z_exact.is_some_and(|z| z % modulus == base % modulus)).count();
        ok &= good == complete.len() && complete.len() >= 99_000;
        parts.push(format!("Λ={lambda}: {good}/{} on {base}+{modulus}ℕ", complete.len()));
    }
    outcome(ok, parts.join(", "))
}

fn c6_geometric() -> Outcome {
    let spec = AnomalousParams::from_alpha(2.0, 1.0).unwrap();
    let ps: Vec<f64> = (1..=5)
        .map(|s| {
            let recs =
                simulate_excursions(&spec, 100_000, DEFAULT_EXCURSION_CAP, StreamSeed::new(s), Execution::Parallel)
                    .unwrap();
            excursion_tests(&recs, &spec).unwrap().p_value
        })
        .collect();
    let passing = ps.iter().filter(|p| **p > 1e-3).count();
    outcome(
        passing >= 4,
        format!(
            "p↓ = {:.4}, chi-square p-values {:?}, {passing}/5 above 1e-3",
            spec.p_down(),
            ps.iter().map(|p| format!("{p:.3}")).collect::<Vec<_>>()
        ),
    )
}

fn reference_model() -> ModelParams {
    ModelParams {
        d: 1,
        p_up: Probability::ratio(1, 10),
        p_down: Probability::ratio(9, 10),
        p_up0: Probability::ratio(1, 1),
        speeds: LevelRule::geometric(1.0, 2.0),
        timescales: LevelRule::constant(1.0),
        xi_law: XiLaw::StandardGaussian1d,
    }
}

fn c7_fclt() -> Outcome {
    let t = Instant::now();
    let p = reference_model();
    let dc = diffusion_constants(&p, 1e-14).unwrap();
    let constants_ok = (dc.v_bar - 4.0).abs() < 1e-9 && (dc.m - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12;
    let mut ratios = Vec::new();
    let mut passing = 0;
    for s in 1..=5 {
        let r = fclt_check(&p, 10_000, 10_000, StreamSeed::new(s), Execution::Parallel).unwrap();
        ratios.push(r.detail["variance_ratio"]);
        if r.p_value > 1e-3 {
            passing += 1;
        }
    }
    let var_ok = ratios.iter().all(|v| (0.95..=1.05).contains(v));
    let dt = t.elapsed();
    outcome(
        constants_ok && var_ok && passing >= 4 && dt < Duration::from_secs(300),
        format!(
            "v̄={:.6} m={:.6}, variance ratios {:?}, KS {passing}/5 above 1e-3, {dt:.1?}",
            dc.v_bar,
            dc.m,
            ratios.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()
        ),
    )
}

fn c8_scaling() -> Outcome {
    let t = Instant::now();
    let grid: Vec<u64> = (10..=16).map(|k| 1u64 << k).collect();
    let spec = AnomalousParams::from_alpha(2.0, 1.0).unwrap();
    let main = scaling_exponent(&spec, &grid, 10_000, StreamSeed::new(7), Execution::Parallel).unwrap().statistic;
    let mut control = make_anomalous(&spec);
    control.p_up = Probability::ratio(1, 9);
    control.p_down = Probability::ratio(8, 9);
    let ctrl = scaling_exponent_model(&control, &grid, 10_000, Some(0.5), StreamSeed::new(7), Execution::Parallel)
        .unwrap()
        .statistic;
    let dt = t.elapsed();
    outcome(
        (0.9..=1.1).contains(&main) && (0.45..=0.55).contains(&ctrl) && dt < Duration::from_secs(600),
        format!("anomalous slope {main:.4}, control (p↓/p↑ = 8 > Λ²) slope {ctrl:.4}, {dt:.1?}"),
    )
}

fn c9_occupation() -> Outcome {
    let p = ModelParams {
        speeds: LevelRule::constant(1.0),
        p_up: Probability::ratio(1, 3),
        p_down: Probability::ratio(2, 3),
        ..reference_model()
    };
    let path = simulate_levels(&p, 1_000_000, 0, &mut StreamSeed::new(9).stream("levels", 0));
    let mu = stationary_measure(&p, 60).unwrap();
    let r = occupation_test(&path, &mu).unwrap();
    let f0 = r.detail["level0_frequency"];
    let tv = r.detail["tv_distance"];
    outcome((f0 - 0.25).abs() <= 0.005 && tv < 0.01, format!("level-0 frequency {f0:.5}, TV distance {tv:.5}"))
}

fn c10_precision(rows: &[(TableRow, Duration)]) -> Outcome {
    let mut bad = Vec::new();
    for (row, _) in rows.iter().filter(|(r, _)| r.result.certified) {
        let input = row.result.inputs.clone();
        let p = input.precision.get();
        let values = |digits: u32| {
            let mut i = input.clone();
            i.precision = Precision::digits(digits);
            let e = evaluate(&i, i.precision).unwrap();
            let b = e.bounds.expect("Ψ preconditions hold");
            vec![e.ell1.re, e.ell1.im, e.ell2.re, e.ell2.im, b.rhs]
        };
        let agrees = agree_at_precision(values, p, 2 * p, 6).unwrap_or(false);
        let mut doubled = input.clone();
        doubled.precision = doubled.precision.doubled();
        let still = certify_pair(&doubled).map(|r| r.certified).unwrap_or(false);
        if !(agrees && still && row.result.agreement) {
            bad.push(format!("Λ={} β={}", row.lambda, row.beta));
        }
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            "17/17 rows agree to 6 digits at (P, 2P), no verdict flips".to_string()
        } else {
            format!("failing rows: {}", bad.join(", "))
        },
    )
}

fn main() -> ExitCode {
    // `cargo test` passes filter arguments; this suite always runs in full.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let rows = table_rows();
    let checks: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 table reproduction", Box::new(|| c1_tables(&rows))),
        ("2 exact lattice values", Box::new(c2_lattice)),
        ("3 Ψ-bound oracle", Box::new(c3_psi)),
        ("4 fixed point vs Monte Carlo", Box::new(c4_fixed_point)),
        ("5 Z support", Box::new(c5_support)),
        ("6 𝒩 geometric law", Box::new(c6_geometric)),
        ("7 FCLT endpoints", Box::new(c7_fclt)),
        ("8 anomalous scaling", Box::new(c8_scaling)),
        ("9 stationary occupation", Box::new(c9_occupation)),
        ("10 precision robustness", Box::new(|| c10_precision(&rows))),
    ];
    let mut failed = 0;
    for (name, f) in &checks {
        let o = f();
        println!("criterion {name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {}/{} criteria passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
