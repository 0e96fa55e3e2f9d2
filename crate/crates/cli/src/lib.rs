//! Command-line front end and thread-parallel Monte Carlo drivers for the
//! equilibrium library. All numerics live in `lqgame-core`; this crate only
//! orchestrates, parallelizes path loops, and writes CSV/JSON outputs.

pub mod args;
pub mod commands;
pub mod mc;
pub mod output;

use std::fmt;

/// Exit-code contract: 0 ok, 1 verification failure, 2 validation,
/// 3 numerical, 4 simulation.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Simulation(String),
    VerificationFailed,
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerificationFailed => 1,
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Simulation(_) => 4,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
            CliError::Simulation(m) => write!(f, "simulation error: {m}"),
            CliError::VerificationFailed => write!(f, "verification failed"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl From<lqgame_core::Error> for CliError {
    fn from(e: lqgame_core::Error) -> Self {
        use lqgame_core::Error as E;
        match e {
            E::InvalidParam { .. } => CliError::Validation(e.to_string()),
            E::SimulationFailure { .. } => CliError::Simulation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
