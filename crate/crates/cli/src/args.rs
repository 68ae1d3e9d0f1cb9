use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mlwalk_core::ModelParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "mlwalk",
    version,
    about = "Multi-level random walk simulator, statistical checks and characteristic-function certifier"
)]
pub struct Cli {
    /// JSON file whose keys override the command-line flags of the chosen subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one walk and write its trajectory.
    Simulate(SimulateArgs),
    /// Endpoint check of the diffusive limit.
    Fclt(FcltArgs),
    /// Fit the growth exponent of median |M_n|.
    Scaling(ScalingArgs),
    /// Sample excursions from level 0 and test 𝒩 and the support of Z.
    Excursions(ExcursionArgs),
    /// Compare the fixed-point φ_Z with a Monte Carlo estimate.
    Charfunc(CharfuncArgs),
    /// Run the non-constancy certificate for one pair of θ.
    Certify(CertifyArgs),
    /// Reproduce one row or a whole table of certificates.
    Table(TableArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Table,
}

/// Model document given inline (config files only) or as a path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamsRef {
    Path(PathBuf),
    Inline(Box<ModelParams>),
}

impl FromStr for ParamsRef {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(ParamsRef::Path(PathBuf::from(s)))
    }
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; defaults to stdout, or to $MLWALK_OUTPUT_DIR/<subcommand>.<ext> when that is set.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Run without the thread pool.
    #[arg(long)]
    #[serde(default)]
    pub sequential: bool,
}

/// Either a full model document or the exponential example class.
#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
pub struct ModelArgs {
    /// Model parameter document (JSON).
    #[arg(long)]
    pub params: Option<ParamsRef>,
    /// Λ of the exponential class.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, conflicts_with = "beta")]
    pub alpha: Option<f64>,
    /// β = Λ^{-α}
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Number of displacements.
    #[arg(long)]
    pub n: Option<u64>,
    /// Starting level.
    #[arg(long)]
    pub l0: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct FcltArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Absolute time n at which W is evaluated.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Significance level of the KS test.
    #[arg(long)]
    pub level: Option<f64>,
    /// Allowed |variance ratio − 1|.
    #[arg(long)]
    pub variance_tol: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct ScalingArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// "a..b" doubles from a up to b; otherwise a comma-separated list.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Reference exponent; defaults to 1/α for the exponential class.
    #[arg(long)]
    pub expected: Option<f64>,
    /// Allowed |slope − expected|.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct ExcursionArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, conflicts_with = "beta")]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub count: Option<u64>,
    /// Steps after which an excursion is reported as truncated.
    #[arg(long)]
    pub cap: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub level: Option<f64>,
    /// Also write every excursion as CSV here.
    #[arg(long)]
    pub records: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct CharfuncArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, conflicts_with = "beta")]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Comma-separated θ values.
    #[arg(long)]
    pub thetas: Option<String>,
    #[arg(long)]
    pub count: Option<u64>,
    #[arg(long)]
    pub cap: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Digits used for the fixed point.
    #[arg(long)]
    pub precision: Option<u32>,
    /// Largest allowed |fixed point − estimate| in standard errors.
    #[arg(long)]
    pub sigmas: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct CertifyArgs {
    /// Λ as a decimal string.
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long, conflicts_with_all = ["a", "alpha"])]
    pub beta: Option<String>,
    #[arg(long, conflicts_with = "alpha")]
    pub a: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    /// Lattice index of θ₁ = Λ^{-2 n₁}·2πk₁/(Λ²+Λ⁴).
    #[arg(long)]
    pub k1: Option<u64>,
    #[arg(long)]
    pub k2: Option<u64>,
    /// Sets both n₁ and n₂.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub n1: Option<u32>,
    #[arg(long)]
    pub n2: Option<u32>,
    #[arg(long)]
    pub q: Option<u32>,
    /// Working precision in decimal digits; 2P is used for the agreement check.
    #[arg(long)]
    pub precision: Option<u32>,
    /// tabulated, printed or conservative.
    #[arg(long)]
    pub rhs_form: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct TableArgs {
    #[arg(long)]
    pub lambda: Option<u64>,
    /// One row only.
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long)]
    pub q: Option<u32>,
    #[arg(long)]
    pub rhs_form: Option<String>,
    /// Largest n searched.
    #[arg(long)]
    pub n_cap: Option<u32>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}
