use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use crimedde_cli::{run_scenario, Command, Format, RunOptions};

/// Simulate and analyse the delayed crime model from scenario files.
///
/// Exit status: 0 on success, 2 for configuration or I/O problems,
/// 3 for numerical faults.
#[derive(Parser)]
#[command(name = "crimedde", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Output directory (default: `out/<scenario name>`).
    #[arg(long, global = true, env = "CRIMEDDE_OUT")]
    out: Option<PathBuf>,
    /// Artifact format.
    #[arg(long, global = true, env = "CRIMEDDE_FORMAT", value_parser = parse_format)]
    format: Option<Format>,
    /// Sweep worker threads (0: all cores).
    #[arg(long, global = true, env = "CRIMEDDE_THREADS", default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate the model and write the trajectory.
    Simulate { config: String },
    /// List the equilibria and their admissibility.
    Equilibria { config: String },
    /// Stability verdicts for every equilibrium.
    Stability { config: String },
    /// Find a periodic orbit under periodic enforcement.
    Periodic { config: String },
    /// Stability over a parameter grid.
    Sweep { config: String },
    /// Plain-language crime-control thresholds.
    Report { config: String },
    /// Run the command named by the scenario's `run` key.
    Run { config: String },
}

fn parse_format(s: &str) -> Result<Format, String> {
    match s {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        _ => Err(format!("expected csv or json, got {s:?}")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (command, config) = match cli.command {
        Cmd::Simulate { config } => (Some(Command::Simulate), config),
        Cmd::Equilibria { config } => (Some(Command::Equilibria), config),
        Cmd::Stability { config } => (Some(Command::Stability), config),
        Cmd::Periodic { config } => (Some(Command::Periodic), config),
        Cmd::Sweep { config } => (Some(Command::Sweep), config),
        Cmd::Report { config } => (Some(Command::Report), config),
        Cmd::Run { config } => (None, config),
    };
    let opts = RunOptions {
        out: cli.out,
        format: cli.format,
        threads: cli.threads,
    };
    match run_scenario(&config, command, &opts) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            println!(
                "wrote {} artifacts and manifest.json to {}",
                outcome.artifacts.len(),
                outcome.dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
