use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bridgeland_cli::{load_scenario_file, run_command, CliError, RunOptions};
use clap::Parser;

/// Exact computations on Bridgeland local models, driven by a scenario file.
#[derive(Parser, Debug)]
#[command(name = "bridgeland", version)]
struct Cli {
    /// Command group: lattice, quiver, rep, stability, walls, wall or stratum.
    group: String,
    /// Action within the group, e.g. `pair` or `analyze`.
    action: String,
    /// Vector or stability-function names; vectors may also be given as `[1,0,-1]`.
    args: Vec<String>,
    #[arg(long)]
    scenario: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    bound: Option<u32>,
    /// Compact JSON (the default).
    #[arg(long, conflicts_with = "pretty")]
    json: bool,
    /// Indented JSON.
    #[arg(long)]
    pretty: bool,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let scenario = load_scenario_file(&cli.scenario)?;
    let options = RunOptions {
        seed: cli.seed,
        budget: cli.budget,
        bound: cli.bound,
    };
    let report = run_command(&scenario, &format!("{} {}", cli.group, cli.action), &cli.args, &options)?;
    let mut text = if cli.pretty {
        serde_json::to_string_pretty(&report)
    } else {
        serde_json::to_string(&report)
    }
    .expect("report serializes");
    text.push('\n');
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Usage(format!("cannot write report: {e}"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
