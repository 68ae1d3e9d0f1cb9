use std::io::Write;

use mlwalk_certify::{format_table, CertResult, TableRow, TABLE_HEADER};
use mlwalk_core::TestReport;
use serde::Serialize;

use crate::args::Format;
use crate::error::{CliError, Result};

/// Five significant digits, positional for moderate magnitudes.
pub fn sig5(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        format!("{:.*}", (4 - mag).max(0) as usize, x)
    } else {
        format!("{x:.4e}")
    }
}

fn aligned(rows: &[(String, String)]) -> String {
    let w = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    rows.iter().map(|(k, v)| format!("{k}{}  {v}\n", " ".repeat(w - k.chars().count()))).collect()
}

fn csv_line(cells: &[String]) -> String {
    let quoted: Vec<String> = cells
        .iter()
        .map(|c| if c.contains([',', '"', '\n']) { format!("\"{}\"", c.replace('"', "\"\"")) } else { c.clone() })
        .collect();
    quoted.join(",") + "\n"
}

pub fn write_json<T: Serialize, W: Write>(value: &T, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn write_test_report<W: Write>(r: &TestReport, format: Format, mut w: W) -> Result<()> {
    match format {
        Format::Json => write_json(r, w),
        Format::Csv => {
            r.write_csv(&mut w)?;
            Ok(w.flush()?)
        }
        Format::Table => {
            let mut rows = vec![
                ("test".to_string(), r.test.clone()),
                ("statistic".to_string(), sig5(r.statistic)),
                ("p_value".to_string(), sig5(r.p_value)),
                ("n_samples".to_string(), r.n_samples.to_string()),
            ];
            if let Some(f) = &r.failure {
                rows.push(("failure".into(), f.clone()));
            }
            rows.extend(r.detail.iter().map(|(k, v)| (k.clone(), sig5(*v))));
            w.write_all(aligned(&rows).as_bytes())?;
            Ok(w.flush()?)
        }
    }
}

fn cert_cells(r: &CertResult) -> Vec<(String, String)> {
    let th = |t: &mlwalk_certify::ThetaSpec| format!("k={} n={}", t.k, t.n);
    vec![
        ("a".into(), r.a.to_sig_string(5)),
        ("beta".into(), r.beta.to_sig_string(5)),
        ("theta1".into(), th(&r.theta1)),
        ("theta2".into(), th(&r.theta2)),
        ("ell1".into(), r.ell1.to_sig_string(5)),
        ("ell2".into(), r.ell2.to_sig_string(5)),
        ("psi1".into(), r.psi1.to_sci_string(5)),
        ("psi2".into(), r.psi2.to_sci_string(5)),
        ("ratio".into(), r.ratio.to_sig_string(5)),
        ("rhs".into(), r.rhs.to_sig_string(5)),
        ("rhs_conservative".into(), r.rhs_conservative.to_sig_string(5)),
        ("certified".into(), r.certified.to_string()),
        ("certified_conservative".into(), r.certified_conservative.to_string()),
        ("agreement".into(), r.agreement.to_string()),
        ("digits_agreed".into(), r.digits_agreed.to_string()),
        ("precision".into(), r.precision.get().to_string()),
    ]
}

pub fn write_cert<W: Write>(r: &CertResult, format: Format, mut w: W) -> Result<()> {
    match format {
        Format::Json => write_json(r, w),
        Format::Table => {
            w.write_all(aligned(&cert_cells(r)).as_bytes())?;
            Ok(w.flush()?)
        }
        Format::Csv => {
            let cells = cert_cells(r);
            let (h, v): (Vec<String>, Vec<String>) = cells.into_iter().unzip();
            w.write_all(csv_line(&h).as_bytes())?;
            w.write_all(csv_line(&v).as_bytes())?;
            Ok(w.flush()?)
        }
    }
}

pub fn write_table<W: Write>(rows: &[TableRow], format: Format, mut w: W) -> Result<()> {
    match format {
        Format::Json => write_json(&rows, w),
        Format::Table => {
            w.write_all(format_table(rows).as_bytes())?;
            Ok(w.flush()?)
        }
        Format::Csv => {
            let mut head: Vec<String> = vec!["lambda".into()];
            head.extend(TABLE_HEADER.iter().map(|s| s.to_string()));
            head.push("certified".into());
            w.write_all(csv_line(&head).as_bytes())?;
            for r in rows {
                let mut cells = vec![r.lambda.to_string()];
                cells.extend(r.cells());
                cells.push(r.result.certified.to_string());
                w.write_all(csv_line(&cells).as_bytes())?;
            }
            Ok(w.flush()?)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct CharfuncRow {
    pub theta: f64,
    pub fixed_point_re: f64,
    pub fixed_point_im: f64,
    pub monte_carlo_re: f64,
    pub monte_carlo_im: f64,
    pub std_error: f64,
    /// |fixed point − estimate| / standard error
    pub deviation: f64,
}

pub fn write_charfunc<W: Write>(rows: &[CharfuncRow], format: Format, mut w: W) -> Result<()> {
    let head =
        ["theta", "fixed_point_re", "fixed_point_im", "monte_carlo_re", "monte_carlo_im", "std_error", "deviation"];
    let cells = |r: &CharfuncRow, f: fn(f64) -> String| {
        [r.theta, r.fixed_point_re, r.fixed_point_im, r.monte_carlo_re, r.monte_carlo_im, r.std_error, r.deviation]
            .map(f)
            .to_vec()
    };
    match format {
        Format::Json => write_json(&rows, w),
        Format::Csv => {
            w.write_all(csv_line(&head.map(String::from)).as_bytes())?;
            for r in rows {
                w.write_all(csv_line(&cells(r, |x| format!("{x:e}"))).as_bytes())?;
            }
            Ok(w.flush()?)
        }
        Format::Table => {
            let mut grid = vec![head.map(String::from).to_vec()];
            grid.extend(rows.iter().map(|r| cells(r, sig5)));
            let widths: Vec<usize> = (0..head.len()).map(|c| grid.iter().map(|r| r[c].len()).max().unwrap()).collect();
            for row in grid {
                let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
                writeln!(w, "{}", line.join("  "))?;
            }
            Ok(w.flush()?)
        }
    }
}

pub fn unsupported(format: Format, what: &str) -> CliError {
    CliError::Input(format!("{what} cannot be written as {format:?}"))
}
