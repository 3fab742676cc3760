use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hns_core::harness::{run, Command, RunConfig};

/// Hermite neural solver for time-fractional PDEs.
///
/// Settings are `key=value` pairs, read from `--config FILE` and then from
/// the command line (later ones win). Commands: quad-check, solve, inverse,
/// fdm, table, kernels.
#[derive(Parser, Debug)]
#[command(name = "hns", version)]
struct Cli {
    command: String,
    /// Flat key=value file, `#` starts a comment.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Settings such as `problem=fde p=3 mt=11`.
    settings: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| {
        let command: Command = cli.command.parse()?;
        let file = cli.config.as_ref().map(std::fs::read_to_string).transpose()?;
        let cfg = RunConfig::parse(command, file.as_deref(), &cli.settings)?;
        run(&cfg, &mut std::io::stdout().lock())
    })();
    match result {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("hns: {e}");
            ExitCode::from(2)
        }
    }
}
