use mlwalk_core::*;
use proptest::prelude::*;

fn chain(p_up: (i64, i64), p_down: (i64, i64)) -> ModelParams {
    ModelParams {
        d: 1,
        p_up: Probability::ratio(p_up.0, p_up.1),
        p_down: Probability::ratio(p_down.0, p_down.1),
        p_up0: Probability::ratio(1, 1),
        speeds: LevelRule::constant(1.0),
        timescales: LevelRule::constant(1.0),
        xi_law: XiLaw::StandardGaussian1d,
    }
}

#[test]
fn stationary_measure_closed_form() {
    let mu = stationary_measure(&chain((1, 3), (2, 3)), 60).unwrap();
    assert!((mu.weights[0] - 0.25).abs() < 1e-15);
    // μ_l = p⇑ p↑^{l-1}/p↓^l · μ0
    assert!((mu.weights[1] - 1.5 * 0.25).abs() < 1e-15);
    assert!((mu.weights[3] - 0.25 * 1.5 * 0.25).abs() < 1e-15);
    assert!(mu.stationarity_residual() < 1e-14);
    assert!(mu.tail_bound < 1e-17);
}

#[test]
fn up_fraction_is_binomial() {
    let p = chain((1, 3), (2, 3));
    let mut rng = StreamSeed::new(11).stream("levels", 0);
    let path = simulate_levels(&p, 200_000, 0, &mut rng);
    let (mut ups, mut moves) = (0u64, 0u64);
    for w in path.levels.windows(2) {
        if w[0] > 0 {
            moves += 1;
            if w[1] > w[0] {
                ups += 1;
            }
        } else {
            assert_eq!(w[1], 1);
        }
    }
    let f = ups as f64 / moves as f64;
    let se = (1.0 / 3.0 * 2.0 / 3.0 / moves as f64).sqrt();
    assert!((f - 1.0 / 3.0).abs() < 4.0 * se, "{f}");
}

#[test]
fn random_stability_matches_excursions() {
    let spec = AnomalousParams::from_alpha(2.0, 1.0).unwrap();
    let seed = StreamSeed::new(5);
    let recs = simulate_excursions(&spec, 20_000, DEFAULT_EXCURSION_CAP, seed, Execution::Parallel).unwrap();
    let direct: Vec<f64> = recs.iter().filter(|r| !r.truncated).map(|r| r.z_value).collect();
    let stable = simulate_z_by_stability(&spec, 20_000, seed, Execution::Parallel);
    let (_, p) = ks_two_sample(&direct, &stable);
    assert!(p > 1e-3, "p = {p}");
    for z in &stable {
        assert_eq!((*z as u64 - 5) % 20, 0);
    }
}

#[test]
fn truncation_is_monotone_in_cap() {
    let spec = AnomalousParams::from_alpha(2.0, 1.5).unwrap();
    let seed = StreamSeed::new(9);
    let counts: Vec<usize> = [4u64, 16, 64, 1024]
        .iter()
        .map(|cap| {
            let r = simulate_excursions(&spec, 5000, *cap, seed, Execution::Sequential).unwrap();
            r.iter().filter(|r| r.truncated).count()
        })
        .collect();
    assert!(counts.windows(2).all(|w| w[0] >= w[1]), "{counts:?}");
    let small = simulate_excursions(&spec, 5000, 16, seed, Execution::Sequential).unwrap();
    let large = simulate_excursions(&spec, 5000, 1024, seed, Execution::Sequential).unwrap();
    for (s, l) in small.iter().zip(&large) {
        if !s.truncated {
            assert_eq!(s, l);
        } else {
            assert!(l.tau0 >= s.tau0);
        }
    }
}

#[test]
fn parallel_and_sequential_agree() {
    let spec = AnomalousParams::from_alpha(3.0, 0.8).unwrap();
    let seed = StreamSeed::new(21);
    let a = simulate_excursions(&spec, 3000, 10_000, seed, Execution::Parallel).unwrap();
    let b = simulate_excursions(&spec, 3000, 10_000, seed, Execution::Sequential).unwrap();
    assert_eq!(a, b);
}

#[test]
fn lattice_holds_for_lambda_three() {
    let spec = AnomalousParams::from_alpha(3.0, 1.0).unwrap();
    let recs =
        simulate_excursions(&spec, 20_000, DEFAULT_EXCURSION_CAP, StreamSeed::new(2), Execution::Parallel).unwrap();
    let lc = lattice_check(&recs, 3);
    assert!(lc.violations.is_empty());
    assert_eq!(lc.checked as usize, recs.iter().filter(|r| !r.truncated).count());
}

#[test]
fn excursion_csv_layout() {
    let spec = AnomalousParams::from_alpha(2.0, 1.0).unwrap();
    let recs = simulate_excursions(&spec, 5, 1000, StreamSeed::new(1), Execution::Sequential).unwrap();
    let mut buf = Vec::new();
    write_excursions_csv(&mut buf, StreamSeed::new(1), &recs).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "seed,stream,tau0,n_visits_level1,z_value,truncated");
    assert_eq!(lines.len(), 6);
    assert!(lines[1].starts_with("1,0,"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stationary_weights_sum_to_one(up in 1i64..40, extra in 1i64..40) {
        let p = chain((up, 2 * up + extra), (up + extra, 2 * up + extra));
        let mu = stationary_measure(&p, 200).unwrap();
        let total: f64 = mu.weights.iter().sum::<f64>() + mu.tail_bound;
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(mu.stationarity_residual() < 1e-12);
    }

    #[test]
    fn excursion_z_on_lattice(seed in 0u64..1000, alpha in 0.2f64..1.9) {
        let spec = AnomalousParams::from_alpha(2.0, alpha).unwrap();
        let mut rng = StreamSeed::new(seed).stream("p", 0);
        let r = sample_excursion(&spec, 100_000, &mut rng).unwrap();
        if !r.truncated {
            let z = r.z_exact.unwrap();
            prop_assert_eq!((z - 5) % 20, 0);
            prop_assert!(r.n_visits_level1 >= 1);
        }
    }

    #[test]
    fn path_bookkeeping(seed in 0u64..1000, n in 1u64..500) {
        let mut rng = StreamSeed::new(seed).stream("p", 0);
        let path = simulate_levels(&chain((1, 3), (2, 3)), n, 0, &mut rng);
        prop_assert_eq!(path.len_steps(), n);
        prop_assert!(path.levels.windows(2).all(|w| w[0].abs_diff(w[1]) <= 1));
        prop_assert_eq!(path.local_time_zero as usize, path.zero_returns.len());
    }
}
