use std::fs::File;
use std::io::BufWriter;

use mlwalk_bignum::{BigReal, Precision};
use mlwalk_certify::{
    certify_pair, full_table, phi_fixed_point, reproduce_table, CertInput, ModelSpec, RhsForm, TableOptions, ThetaSpec,
};
use mlwalk_core::{
    empirical_charfunc, excursion_tests, fclt_check, scaling_exponent_model, simulate_excursions, simulate_walk,
    write_excursions_csv, write_trajectory_csv, Execution, StreamSeed, TestReport, DEFAULT_EXCURSION_CAP,
    DEFAULT_LEVEL,
};

use crate::args::*;
use crate::config::*;
use crate::error::{CliError, Result};
use crate::report::*;

fn exec(out: &OutputArgs) -> Execution {
    if out.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn seed(s: Option<u64>) -> Result<StreamSeed> {
    Ok(StreamSeed::new(require(s, "seed")?))
}

fn emit_report(r: &TestReport, out: &OutputArgs, name: &str, level: f64) -> Result<()> {
    let format = out.format.unwrap_or(Format::Json);
    write_test_report(r, format, open_output(&out.output, &format!("{name}.{}", extension(format)))?)?;
    if let Some(f) = &r.failure {
        return Err(CliError::Statistical(f.clone()));
    }
    if r.p_value < level {
        return Err(CliError::Statistical(format!("{} p-value {} is below {level}", r.test, sig5(r.p_value))));
    }
    Ok(())
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let seed = seed(a.seed)?;
    let n = require(a.n, "n")?;
    let mut rng = seed.stream("simulate", 0);
    let sample = simulate_walk(model.params(), n, a.l0.unwrap_or(0), &mut rng)?;
    let format = a.out.format.unwrap_or(Format::Csv);
    let w = open_output(&a.out.output, &format!("simulate.{}", extension(format)))?;
    match format {
        Format::Csv => Ok(write_trajectory_csv(w, &sample)?),
        Format::Json => write_json(&sample, w),
        Format::Table => Err(unsupported(format, "a trajectory")),
    }
}

pub fn fclt(a: FcltArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let seed = seed(a.seed)?;
    let level = a.level.unwrap_or(DEFAULT_LEVEL);
    let mut r = fclt_check(model.params(), a.n.unwrap_or(10_000), a.samples.unwrap_or(10_000), seed, exec(&a.out))?;
    let tol = a.variance_tol.unwrap_or(0.05);
    let vr = r.detail["variance_ratio"];
    if (vr - 1.0).abs() > tol {
        r.failure = Some(format!("variance ratio {} is outside 1 ± {tol}", sig5(vr)));
    }
    emit_report(&r, &a.out, "fclt", level)
}

pub fn scaling(a: ScalingArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let seed = seed(a.seed)?;
    let grid = parse_grid(a.grid.as_deref().unwrap_or("1024..65536"))?;
    let expected = match (&model, a.expected) {
        (_, Some(e)) => e,
        (Model::Anomalous(spec, _), None) => 1.0 / spec.alpha,
        (Model::General(_), None) => {
            return Err(CliError::Input("--expected is required with --params".into()));
        }
    };
    let mut r =
        scaling_exponent_model(model.params(), &grid, a.samples.unwrap_or(10_000), Some(expected), seed, exec(&a.out))?;
    let tol = a.tolerance.unwrap_or(0.1);
    if (r.statistic - expected).abs() > tol {
        r.failure = Some(format!("slope {} is not within {tol} of {expected}", sig5(r.statistic)));
    }
    // The bootstrap p-value is reported but the tolerance decides.
    emit_report(&r, &a.out, "scaling", 0.0)
}

pub fn excursions(a: ExcursionArgs) -> Result<()> {
    let spec = anomalous(a.lambda, a.alpha, a.beta)?;
    let seed = seed(a.seed)?;
    let recs = simulate_excursions(
        &spec,
        a.count.unwrap_or(100_000),
        a.cap.unwrap_or(DEFAULT_EXCURSION_CAP),
        seed,
        exec(&a.out),
    )?;
    if let Some(p) = &a.records {
        let f = File::create(p).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display())))?;
        write_excursions_csv(BufWriter::new(f), seed, &recs)?;
    }
    let r = excursion_tests(&recs, &spec)?;
    emit_report(&r, &a.out, "excursions", a.level.unwrap_or(DEFAULT_LEVEL))
}

pub fn charfunc(a: CharfuncArgs) -> Result<()> {
    let spec = anomalous(a.lambda, a.alpha, a.beta)?;
    let seed = seed(a.seed)?;
    let thetas = parse_list(a.thetas.as_deref().unwrap_or("0.1,0.3,1.0"))?;
    let recs = simulate_excursions(
        &spec,
        a.count.unwrap_or(1_000_000),
        a.cap.unwrap_or(DEFAULT_EXCURSION_CAP),
        seed,
        exec(&a.out),
    )?;
    let z: Vec<f64> = recs.iter().filter(|r| !r.truncated).map(|r| r.z_value).collect();
    let mc = empirical_charfunc(&z, &thetas)?;
    let prec = Precision::digits(a.precision.unwrap_or(30).max(10));
    let model = ModelSpec::from_params(&spec).at(prec)?;
    let tol =
        BigReal::parse_decimal(&format!("1e-{}", prec.get() - 5), prec).map_err(mlwalk_certify::CertError::from)?;
    let mut rows = Vec::new();
    for pt in &mc {
        let fp = phi_fixed_point(&model, &BigReal::from_f64(pt.theta, prec), &tol)?;
        let (re, im) = fp.to_f64_pair();
        let dist = ((re - pt.value.re).powi(2) + (im - pt.value.im).powi(2)).sqrt();
        rows.push(CharfuncRow {
            theta: pt.theta,
            fixed_point_re: re,
            fixed_point_im: im,
            monte_carlo_re: pt.value.re,
            monte_carlo_im: pt.value.im,
            std_error: pt.std_error,
            deviation: if pt.std_error > 0.0 {
                dist / pt.std_error
            } else if dist == 0.0 {
                0.0
            } else {
                f64::INFINITY
            },
        });
    }
    let format = a.out.format.unwrap_or(Format::Table);
    write_charfunc(&rows, format, open_output(&a.out.output, &format!("charfunc.{}", extension(format)))?)?;
    let sigmas = a.sigmas.unwrap_or(3.0);
    if let Some(bad) = rows.iter().find(|r| r.deviation > sigmas) {
        return Err(CliError::Statistical(format!(
            "at θ = {} the estimate is {} standard errors from the fixed point",
            bad.theta,
            sig5(bad.deviation)
        )));
    }
    Ok(())
}

fn rhs_form(s: &Option<String>) -> Result<RhsForm> {
    Ok(match s {
        Some(s) => s.parse()?,
        None => RhsForm::default(),
    })
}

pub fn certify(a: CertifyArgs) -> Result<()> {
    let lambda = require(a.lambda.clone(), "lambda")?;
    let model = match (&a.beta, &a.a, &a.alpha) {
        (Some(b), None, None) => ModelSpec::from_beta(&lambda, b),
        (None, Some(x), None) => ModelSpec::from_a(&lambda, x),
        (None, None, Some(x)) => ModelSpec::from_alpha(&lambda, x),
        _ => return Err(CliError::Input("give exactly one of --beta, --a, --alpha".into())),
    };
    let n1 = a.n1.or(a.n);
    let n2 = a.n2.or(a.n);
    let input = CertInput {
        model,
        theta1: ThetaSpec::new(require(a.k1, "k1")?, require(n1, "n1 (or --n)")?)?,
        theta2: ThetaSpec::new(require(a.k2, "k2")?, require(n2, "n2 (or --n)")?)?,
        q: a.q.unwrap_or(2),
        precision: Precision::digits(a.precision.unwrap_or(50).max(10)),
        rhs_form: rhs_form(&a.rhs_form)?,
    };
    let r = certify_pair(&input)?;
    let format = a.out.format.unwrap_or(Format::Json);
    write_cert(&r, format, open_output(&a.out.output, &format!("certify.{}", extension(format)))?)?;
    if !r.certified {
        return Err(CliError::Certification(format!(
            "rhs {} does not exceed ratio {}",
            r.rhs.to_sig_string(5),
            r.ratio.to_sig_string(5)
        )));
    }
    if !r.agreement {
        return Err(CliError::Certification(format!("only {} digits agree between P and 2P", r.digits_agreed)));
    }
    Ok(())
}

pub fn table(a: TableArgs) -> Result<()> {
    let lambda = require(a.lambda, "lambda")?;
    let opts = TableOptions {
        n_cap: a.n_cap.unwrap_or(TableOptions::default().n_cap),
        q: a.q.unwrap_or(2),
        rhs_form: rhs_form(&a.rhs_form)?,
        ..TableOptions::default()
    };
    let rows = match &a.beta {
        Some(b) => vec![reproduce_table(lambda, b, &opts)?],
        None => full_table(lambda, &opts, exec(&a.out))?,
    };
    let format = a.out.format.unwrap_or(Format::Table);
    write_table(&rows, format, open_output(&a.out.output, &format!("table.{}", extension(format)))?)?;
    if let Some(r) = rows.iter().find(|r| !(r.result.certified && r.result.agreement)) {
        return Err(CliError::Certification(format!("row β = {} is not certified", r.beta)));
    }
    Ok(())
}
