//! Scenario runner for the relational measurement simulator.

pub mod config;
pub mod output;
pub mod scenarios;

use modal_core::ModalError;

pub use config::{ConfigError, Scenario, ScenarioConfig};
pub use output::{Check, Report, Table};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration:\n{0}")]
    Config(#[from] ConfigError),
    #[error("invalid parameter: {0}")]
    Validation(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// 1 for anything the user can fix in the inputs, 2 for a numerical
    /// invariant that failed during the run.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Invariant(_) => 2,
            _ => 1,
        }
    }
}

impl From<ModalError> for RunError {
    fn from(e: ModalError) -> Self {
        match e {
            ModalError::InvalidParameter(_)
            | ModalError::ImageOutsideDetector { .. }
            | ModalError::Infeasible(_)
            | ModalError::InsufficientTrials(_)
            | ModalError::ZeroTime
            | ModalError::NoDetectableMass
            | ModalError::MassOutsideDetector(_) => RunError::Validation(e.to_string()),
            other => RunError::Invariant(other.to_string()),
        }
    }
}

/// Fails with an invariant error naming `what` unless `ok`.
pub(crate) fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), RunError> {
    if ok {
        Ok(())
    } else {
        Err(RunError::Invariant(what()))
    }
}

/// Runs the configured scenario and writes its two output files.
pub fn run_to_dir(cfg: &ScenarioConfig, dir: &std::path::Path) -> Result<Report, RunError> {
    let report = scenarios::run(cfg)?;
    report.write(dir, cfg.scenario.name(), &cfg.echo())?;
    Ok(report)
}
