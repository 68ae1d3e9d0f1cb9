use mlwalk_bignum::{BigReal, Precision};
use mlwalk_certify::*;

/// (Λ, β, n, s₁ is π/5, ℓ(θ₁), ℓ(θ₂), ratio, rhs), reference values at 5 significant digits.
const ROWS: [(u64, &str, u32, bool, (&str, &str), (&str, &str), &str, &str); 17] = [
    (2, "0.27", 191, true, ("4.7468", "-56.570"), ("5.4773", "-56.865"), "0.99372", "0.99407"),
    (2, "0.3", 65, true, ("3.9459", "-19.540"), ("4.5780", "-19.765"), "0.98258", "0.98526"),
    (2, "0.4", 18, true, ("2.30871", "-4.0115"), ("2.6873", "-4.0863"), "0.94635", "0.96133"),
    (2, "0.5", 10, true, ("1.4283", "-1.4456"), ("1.6410", "-1.4570"), "0.92605", "0.93946"),
    (2, "0.6", 8, true, ("0.89810", "-0.60217"), ("1.0150", "-0.60137"), "0.91651", "0.92128"),
    (2, "0.7", 11, true, ("0.54303", "-0.23698"), ("0.59588", "-0.22898"), "0.92814", "0.94599"),
    (2, "0.8", 18, true, ("0.29541", "-0.076955"), ("0.31356", "-0.071333"), "0.94930", "0.95659"),
    (2, "0.9", 43, true, ("0.12122", "-0.014441"), ("0.12461", "-0.012843"), "0.97450", "0.97650"),
    (3, "0.13", 91, false, ("7.1152", "-54.501"), ("4.5850", "-55.227"), "0.99180", "0.99185"),
    (3, "0.2", 24, true, ("2.8396", "-9.7361"), ("4.4837", "-9.1033"), "0.99942", "0.99959"),
    (3, "0.3", 9, true, ("1.8538", "-3.6337"), ("2.7803", "-3.0738"), "0.98422", "0.98490"),
    (3, "0.4", 8, true, ("1.3517", "-1.8439"), ("1.8460", "-1.3854"), "0.99053", "0.99636"),
    (3, "0.5", 9, false, ("1.2385", "-0.66371"), ("1.0090", "-0.99722"), "0.99050", "0.99464"),
    (3, "0.6", 9, false, ("0.81913", "-0.31535"), ("0.73372", "-0.52578"), "0.97239", "0.97407"),
    (3, "0.7", 12, false, ("0.51139", "-0.13439"), ("0.49445", "-0.24327"), "0.95954", "0.96633"),
    (3, "0.8", 19, false, ("0.28495", "-0.045883"), ("0.28805", "-0.087170"), "0.95902", "0.96697"),
    (3, "0.9", 42, false, ("0.11951", "-0.0089062"), ("0.12198", "-0.017123"), "0.97295", "0.97430"),
];

/// |x − printed| ≤ one unit in the 5th significant digit of `printed`.
fn within_ulp(x: &BigReal, printed: &str) -> bool {
    let want: f64 = printed.parse().unwrap();
    let ulp = 10f64.powi(want.abs().log10().floor() as i32 - 4);
    (x.to_f64() - want).abs() <= ulp * 1.000001
}

#[test]
fn all_rows_match_reference_values() {
    let opts = TableOptions::default();
    for (lambda, beta, n, s1_is_first, l1, l2, ratio, rhs) in ROWS {
        let row = reproduce_table(lambda, beta, &opts).unwrap();
        let r = &row.result;
        let tag = format!("Λ={lambda} β={beta}");
        assert_eq!(row.n, n, "{tag}");
        assert_eq!(row.s1, if s1_is_first { "π/5" } else { "2π/5" }, "{tag}");
        assert!(r.certified && r.agreement && r.lower_bounds_positive, "{tag}");
        for (v, p) in [(&r.ell1.re, l1.0), (&r.ell1.im, l1.1), (&r.ell2.re, l2.0), (&r.ell2.im, l2.1)] {
            assert!(within_ulp(v, p), "{tag}: {} vs {p}", v.to_sig_string(6));
        }
        assert!(within_ulp(&r.ratio, ratio), "{tag}");
        assert!(within_ulp(&r.rhs, rhs), "{tag}");
        assert!(r.rhs > r.ratio);
        assert_eq!(r.precision, Precision::digits(50.max(2 * n)));
    }
}

#[test]
fn certify_pair_examples() {
    let input = CertInput::new(
        ModelSpec::from_beta("2", "0.5"),
        ThetaSpec::new(2, 10).unwrap(),
        ThetaSpec::new(4, 10).unwrap(),
    );
    let r = certify_pair(&input).unwrap();
    assert!(r.certified);
    assert_eq!(r.ratio.to_sig_string(5), "0.92605");
    assert_eq!(r.rhs.to_sig_string(5), "0.93946");

    let mut input = CertInput::new(
        ModelSpec::from_beta("3", "0.13"),
        ThetaSpec::new(18, 91).unwrap(),
        ThetaSpec::new(9, 91).unwrap(),
    );
    input.precision = Precision::digits(182);
    let r = certify_pair(&input).unwrap();
    assert!(r.certified && !r.swapped);
    assert_eq!(r.ratio.to_sig_string(5), "0.99180");
    assert_eq!(r.rhs.to_sig_string(5), "0.99185");
}

#[test]
fn small_n_does_not_certify() {
    for (l, b, k1, k2) in [(2, "0.5", 2, 4), (3, "0.13", 18, 9), (2, "0.27", 2, 4)] {
        let input = CertInput::new(
            ModelSpec::from_beta(&l.to_string(), b),
            ThetaSpec::new(k1, 1).unwrap(),
            ThetaSpec::new(k2, 1).unwrap(),
        );
        match certify_pair(&input) {
            Ok(r) => assert!(!r.certified),
            Err(CertError::PsiDomain(_)) => {}
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn equivalent_thetas_rejected() {
    let input = CertInput::new(
        ModelSpec::from_beta("2", "0.5"),
        ThetaSpec::new(2, 10).unwrap(),
        ThetaSpec::new(8, 11).unwrap(),
    );
    assert_eq!(certify_pair(&input), Err(CertError::EquivalentThetas));
}

#[test]
fn doubling_precision_keeps_verdicts() {
    let opts = TableOptions::default();
    for (lambda, beta) in [(2, "0.5"), (2, "0.9"), (3, "0.4"), (3, "0.7")] {
        let row = reproduce_table(lambda, beta, &opts).unwrap();
        let mut input = row.result.inputs.clone();
        for _ in 0..2 {
            input.precision = input.precision.doubled();
            let r = certify_pair(&input).unwrap();
            assert!(r.certified && r.agreement, "Λ={lambda} β={beta} P={}", input.precision.get());
            assert!(r.digits_agreed >= AGREEMENT_DIGITS);
        }
    }
}

#[test]
fn deterministic_and_serializable() {
    let input =
        CertInput::new(ModelSpec::from_beta("3", "0.3"), ThetaSpec::new(9, 9).unwrap(), ThetaSpec::new(18, 9).unwrap());
    let a = certify_pair(&input).unwrap();
    let b = certify_pair(&input).unwrap();
    assert_eq!(a, b);
    let json = a.to_json().unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    for key in ["inputs", "ell1", "ell2", "ratio", "rhs", "certified", "agreement"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let back: CertResult = serde_json::from_str(&json).unwrap();
    assert_eq!(back, a);
}

#[test]
fn rhs_forms() {
    let mut input = CertInput::new(
        ModelSpec::from_beta("2", "0.5"),
        ThetaSpec::new(2, 10).unwrap(),
        ThetaSpec::new(4, 10).unwrap(),
    );
    let tab = certify_pair(&input).unwrap();
    input.rhs_form = RhsForm::Conservative;
    let cons = certify_pair(&input).unwrap();
    input.rhs_form = RhsForm::Printed;
    let printed = certify_pair(&input).unwrap();
    assert!(cons.rhs <= tab.rhs && cons.rhs <= printed.rhs);
    assert_eq!(cons.rhs, tab.rhs_conservative);
    assert!("bogus".parse::<RhsForm>().is_err());
}

#[test]
fn formatted_table() {
    let opts = TableOptions::default();
    let rows = vec![reproduce_table(2, "0.5", &opts).unwrap(), reproduce_table(2, "0.6", &opts).unwrap()];
    let text = format_table(&rows);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].contains("4^-10·π/5") && lines[1].contains("1.4283 - 1.4456i"));
    assert!(lines[2].contains("0.36848"));
}
