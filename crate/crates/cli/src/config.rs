use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::args::{Format, ModelArgs, ParamsRef};
use crate::error::{CliError, Result};
use mlwalk_core::{make_anomalous, AnomalousParams, ModelParams};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "MLWALK_OUTPUT_DIR";

/// Overlays the keys of the JSON config file onto the parsed flags.
/// Keys that the subcommand does not know are rejected.
pub fn apply_config<T: Serialize + DeserializeOwned>(flags: T, config: Option<&Path>) -> Result<T> {
    let Some(path) = config else { return Ok(flags) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
    let overlay: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("config {} is not valid JSON: {e}", path.display())))?;
    let Value::Object(overlay) = overlay else {
        return Err(CliError::Input(format!("config {} must be a JSON object", path.display())));
    };
    let Value::Object(mut base) = serde_json::to_value(&flags)? else {
        unreachable!("argument structs serialize to objects")
    };
    for (k, v) in overlay {
        if !base.contains_key(&k) {
            let mut known: Vec<&String> = base.keys().collect();
            known.sort();
            return Err(CliError::Input(format!("unknown config key {k:?}; expected one of {known:?}")));
        }
        base.insert(k, v);
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))
}

pub fn require<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| CliError::Input(format!("--{name} is required")))
}

pub fn anomalous(lambda: Option<f64>, alpha: Option<f64>, beta: Option<f64>) -> Result<AnomalousParams> {
    let lambda = require(lambda, "lambda")?;
    Ok(match (alpha, beta) {
        (Some(a), None) => AnomalousParams::from_alpha(lambda, a)?,
        (None, Some(b)) => AnomalousParams::from_beta(lambda, b)?,
        (None, None) => return Err(CliError::Input("one of --alpha or --beta is required".into())),
        (Some(_), Some(_)) => return Err(CliError::Input("give --alpha or --beta, not both".into())),
    })
}

pub enum Model {
    General(ModelParams),
    Anomalous(AnomalousParams, ModelParams),
}

impl Model {
    pub fn params(&self) -> &ModelParams {
        match self {
            Model::General(p) | Model::Anomalous(_, p) => p,
        }
    }
}

pub fn load_model(m: &ModelArgs) -> Result<Model> {
    match (&m.params, m.lambda) {
        (Some(_), Some(_)) => Err(CliError::Input("give --params or --lambda, not both".into())),
        (Some(ParamsRef::Path(p)), None) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Input(format!("cannot read params {}: {e}", p.display())))?;
            Ok(Model::General(ModelParams::from_json(&text)?))
        }
        (Some(ParamsRef::Inline(p)), None) => {
            p.validate()?;
            Ok(Model::General((**p).clone()))
        }
        (None, _) => {
            let spec = anomalous(m.lambda, m.alpha, m.beta)?;
            Ok(Model::Anomalous(spec, make_anomalous(&spec)))
        }
    }
}

/// Where a subcommand's main artifact goes.
pub fn open_output(output: &Option<PathBuf>, default_name: &str) -> Result<Box<dyn Write>> {
    let path = match output {
        Some(p) => Some(p.clone()),
        None => std::env::var_os(OUTPUT_DIR_ENV).map(|dir| {
            let dir = PathBuf::from(dir);
            dir.join(default_name)
        }),
    };
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                if output.is_none() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            let f = File::create(&p).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

pub fn extension(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
        Format::Table => "txt",
    }
}

/// "a..b" doubles from a to b inclusive; otherwise a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<u64>> {
    let bad = || CliError::Input(format!("cannot parse grid {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if a == 0 || b < a {
            return Err(bad());
        }
        let mut g = vec![a];
        while let Some(next) = g.last().unwrap().checked_mul(2).filter(|n| *n <= b) {
            g.push(next);
        }
        Ok(g)
    } else {
        s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| CliError::Input(format!("cannot parse {x:?} as a number"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1024..65536").unwrap(), vec![1024, 2048, 4096, 8192, 16384, 32768, 65536]);
        assert_eq!(parse_grid("3..20").unwrap(), vec![3, 6, 12]);
        assert_eq!(parse_grid("5, 7,9").unwrap(), vec![5, 7, 9]);
        assert!(parse_grid("0..8").is_err());
        assert!(parse_grid("x").is_err());
    }
}
