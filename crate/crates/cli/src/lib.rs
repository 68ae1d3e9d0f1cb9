//! The `mlwalk` command-line runner.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use args::{Cli, Command};
use config::apply_config;
pub use error::{CliError, Result};

pub fn run(cli: Cli) -> Result<()> {
    let cfg = cli.config.as_deref();
    match cli.command {
        Command::Simulate(a) => commands::simulate(apply_config(a, cfg)?),
        Command::Fclt(a) => commands::fclt(apply_config(a, cfg)?),
        Command::Scaling(a) => commands::scaling(apply_config(a, cfg)?),
        Command::Excursions(a) => commands::excursions(apply_config(a, cfg)?),
        Command::Charfunc(a) => commands::charfunc(apply_config(a, cfg)?),
        Command::Certify(a) => commands::certify(apply_config(a, cfg)?),
        Command::Table(a) => commands::table(apply_config(a, cfg)?),
    }
}
