use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use holo_sim::{parse, run, CliError, Command};

#[derive(Parser)]
#[command(name = "holo-sim", version, about = "Holonomic gates on Josephson charge-qubit networks")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct Io {
    /// Scenario file (TOML).
    config: PathBuf,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Sub {
    /// Phase gate: closed form, Wilson loop and adiabatic evolution.
    GateZ(Io),
    /// Rotation gate on the X block.
    GateX(Io),
    /// Controlled phase gate on the CZ block.
    GateCz(Io),
    /// Leakage against adiabaticity with a log-linear fit.
    LzScan(Io),
    /// Error-budget fidelity over a parameter grid.
    Fidelity(Io),
    /// Sampled control path of the scenario loop, for plotting.
    LoopDump(Io),
}

fn execute(command: Command, io: &Io) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&io.config)
        .map_err(|e| CliError::Validation(vec![format!("cannot read {}: {e}", io.config.display())]))?;
    let scenario = parse(&text, command).map_err(CliError::Validation)?;
    let out = run(command, &scenario)?;
    let body = match io.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out.document).map_err(|e| CliError::Io(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => out.table.to_csv()?,
    };
    match &io.out {
        Some(p) => std::fs::write(p, body).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, io) = match &cli.command {
        Sub::GateZ(io) => (Command::GateZ, io),
        Sub::GateX(io) => (Command::GateX, io),
        Sub::GateCz(io) => (Command::GateCz, io),
        Sub::LzScan(io) => (Command::LzScan, io),
        Sub::Fidelity(io) => (Command::Fidelity, io),
        Sub::LoopDump(io) => (Command::LoopDump, io),
    };
    match execute(command, io) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprint!("holo-sim {}: {e}", command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
