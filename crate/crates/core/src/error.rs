use core::fmt;

/// Errors shared across the crate.
///
/// Callers that need an exit-code triage can map: `InvalidParam` →
/// validation, `Domain`/`Accuracy`/`IntegrationFailure`/`Resource` →
/// numerical, `SimulationFailure` → simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Parameter violates a documented precondition.
    InvalidParam { name: &'static str, reason: &'static str },
    /// Input outside the mathematical domain of the operation.
    Domain(&'static str),
    /// Backward integration produced a non-finite value.
    IntegrationFailure { time: f64 },
    /// An adaptive scheme stopped before reaching the requested tolerance.
    Accuracy { wanted: f64, achieved: f64 },
    /// Problem size exceeds a hard implementation limit.
    Resource(&'static str),
    /// A simulated state became non-finite.
    SimulationFailure { path: usize, time: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParam { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::IntegrationFailure { time } => {
                write!(f, "integration blew up near t = {time}")
            }
            Error::Accuracy { wanted, achieved } => {
                write!(f, "tolerance {wanted:e} not reached (achieved {achieved:e})")
            }
            Error::Resource(what) => write!(f, "resource limit: {what}"),
            Error::SimulationFailure { path, time } => {
                write!(f, "non-finite state on path {path} near t = {time}")
            }
        }
    }
}
