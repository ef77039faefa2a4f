//! Batch front-end for the holonomic gate simulator: scenario files in,
//! versioned JSON or CSV result documents out.

pub mod document;
pub mod expr;
pub mod pipeline;
pub mod scenario;

use holo_core::HoloError;

pub use document::{validate_document, SCHEMA};
pub use pipeline::{run, Output, Table};
pub use scenario::{parse, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    GateZ,
    GateX,
    GateCz,
    LzScan,
    Fidelity,
    LoopDump,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::GateZ,
        Command::GateX,
        Command::GateCz,
        Command::LzScan,
        Command::Fidelity,
        Command::LoopDump,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::GateZ => "gate-z",
            Command::GateX => "gate-x",
            Command::GateCz => "gate-cz",
            Command::LzScan => "lz-scan",
            Command::Fidelity => "fidelity",
            Command::LoopDump => "loop-dump",
        }
    }

    pub fn from_name(s: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Input violates a precondition; every problem found is listed.
    Validation(Vec<String>),
    /// The numerics failed on valid input.
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(errs) => {
                writeln!(f, "invalid scenario ({} problem{}):", errs.len(), if errs.len() == 1 { "" } else { "s" })?;
                for e in errs {
                    writeln!(f, "  - {e}")?;
                }
                Ok(())
            }
            CliError::Numerical(m) => writeln!(f, "numerical failure: {m}"),
            CliError::Io(m) => writeln!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<HoloError> for CliError {
    fn from(e: HoloError) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(vec![e.to_string()])
        }
    }
}
