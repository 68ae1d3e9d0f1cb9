use mlwalk_bignum::Precision;
use mlwalk_core::{map_indices, Execution};
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::charfunc::EllStepper;
use crate::error::{CertError, Result};
use crate::model::{ModelSpec, ThetaSpec};
use crate::scheme::{certify_pair, evaluate_with_ells, CertInput, CertResult, RhsForm};

/// β values swept for Λ = 2 and Λ = 3.
pub const TABLE_BETAS_2: [&str; 8] = ["0.27", "0.3", "0.4", "0.5", "0.6", "0.7", "0.8", "0.9"];
pub const TABLE_BETAS_3: [&str; 9] = ["0.13", "0.2", "0.3", "0.4", "0.5", "0.6", "0.7", "0.8", "0.9"];

pub fn table_betas(lambda: u64) -> Result<&'static [&'static str]> {
    match lambda {
        2 => Ok(&TABLE_BETAS_2),
        3 => Ok(&TABLE_BETAS_3),
        _ => Err(CertError::InvalidInput(format!("tables exist for Λ = 2 and 3, not {lambda}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableOptions {
    /// Largest n tried before giving up.
    pub n_cap: u32,
    pub q: u32,
    pub rhs_form: RhsForm,
    /// Precision used while scanning n; the final row is recomputed at max(this, 2n).
    pub search_precision: Precision,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions { n_cap: 400, q: 2, rhs_form: RhsForm::Tabulated, search_precision: Precision::DEFAULT }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub lambda: u64,
    pub beta: String,
    pub n: u32,
    /// s₁ and s₂ as multiples of π, e.g. "π/5".
    pub s1: String,
    pub s2: String,
    pub result: CertResult,
}

/// Lattice index k with 2πk/(Λ²+Λ⁴) = π·num/den.
fn lattice_k(lambda: u64, num: u64, den: u64) -> Result<u64> {
    let l2l4 = lambda * lambda * (1 + lambda * lambda);
    if !(l2l4 * num).is_multiple_of(2 * den) {
        return Err(CertError::InvalidInput(format!("π·{num}/{den} is not a lattice point for Λ = {lambda}")));
    }
    Ok(l2l4 * num / (2 * den))
}

/// s = 2πk/(Λ²+Λ⁴) written as a multiple of π.
pub fn s_label(lambda: u64, k: u64) -> String {
    let l2l4 = lambda * lambda * (1 + lambda * lambda);
    let (num, den) = (2 * k, l2l4);
    let g = num.gcd(&den);
    let (num, den) = (num / g, den / g);
    match (num, den) {
        (1, 1) => "π".into(),
        (1, d) => format!("π/{d}"),
        (n, 1) => format!("{n}π"),
        (n, d) => format!("{n}π/{d}"),
    }
}

/// Smallest n at which the pair s = π/5, 2π/5 certifies for (Λ, β).
pub fn reproduce_table(lambda: u64, beta: &str, opts: &TableOptions) -> Result<TableRow> {
    let spec = ModelSpec::from_beta(&lambda.to_string(), beta);
    let k1 = lattice_k(lambda, 1, 5)?;
    let k2 = lattice_k(lambda, 2, 5)?;
    let m = spec.at(opts.search_precision)?;
    let mut s1 = EllStepper::from_lattice(&m, k1)?;
    let mut s2 = EllStepper::from_lattice(&m, k2)?;
    let make_input = |n: u32, prec: Precision| -> Result<CertInput> {
        Ok(CertInput {
            model: spec.clone(),
            theta1: ThetaSpec::new(k1, n)?,
            theta2: ThetaSpec::new(k2, n)?,
            q: opts.q,
            precision: prec,
            rhs_form: opts.rhs_form,
        })
    };
    for n in 1..=opts.n_cap {
        s1.step()?;
        s2.step()?;
        let input = make_input(n, opts.search_precision)?;
        let ev = evaluate_with_ells(&m, &input, s1.ell.clone(), s2.ell.clone())?;
        let hit = match &ev.bounds {
            Some(b) => b.lower_bounds_positive && b.rhs > &ev.ell1.abs() / &ev.ell2.abs(),
            None => false,
        };
        if !hit {
            continue;
        }
        let prec = Precision::digits(opts.search_precision.get().max(2 * n));
        let result = certify_pair(&make_input(n, prec)?)?;
        if !result.certified {
            continue;
        }
        if n > 1 {
            let prev = certify_pair(&make_input(n - 1, prec)?);
            if matches!(prev, Ok(ref r) if r.certified) {
                return Err(CertError::InvalidInput(format!(
                    "scan at {} digits missed a certifying n = {}",
                    opts.search_precision.get(),
                    n - 1
                )));
            }
        }
        return Ok(TableRow {
            lambda,
            beta: beta.to_string(),
            n,
            s1: s_label(lambda, result.theta1.k),
            s2: s_label(lambda, result.theta2.k),
            result,
        });
    }
    Err(CertError::NoCertifyingN(opts.n_cap))
}

/// All rows for Λ, computed in parallel.
pub fn full_table(lambda: u64, opts: &TableOptions, exec: Execution) -> Result<Vec<TableRow>> {
    let betas = table_betas(lambda)?;
    map_indices(exec, betas.len() as u64, |i| reproduce_table(lambda, betas[i as usize], opts)).into_iter().collect()
}

impl TableRow {
    pub fn theta_label(&self, s: &str) -> String {
        format!("{}^-{}·{}", self.lambda * self.lambda, self.n, s)
    }

    /// Cells at 5 significant digits: β, a, n, θ₁, θ₂, ℓ(θ₁), ℓ(θ₂), ratio, rhs.
    pub fn cells(&self) -> Vec<String> {
        let r = &self.result;
        vec![
            self.beta.clone(),
            r.a.to_sig_string(5),
            self.n.to_string(),
            self.theta_label(&self.s1),
            self.theta_label(&self.s2),
            r.ell1.to_sig_string(5),
            r.ell2.to_sig_string(5),
            r.ratio.to_sig_string(5),
            r.rhs.to_sig_string(5),
        ]
    }
}

pub const TABLE_HEADER: [&str; 9] = ["β", "a", "n", "θ₁", "θ₂", "ℓ(θ₁)", "ℓ(θ₂)", "|ℓ(θ₁)/ℓ(θ₂)|", "r.h.s. (q=2)"];

/// Aligned plain-text table.
pub fn format_table(rows: &[TableRow]) -> String {
    let mut grid: Vec<Vec<String>> = vec![TABLE_HEADER.iter().map(|s| s.to_string()).collect()];
    grid.extend(rows.iter().map(TableRow::cells));
    let widths: Vec<usize> =
        (0..TABLE_HEADER.len()).map(|c| grid.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in &grid {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell}{}", " ".repeat(w - cell.chars().count())))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}
