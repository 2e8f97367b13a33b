//! One function per scenario, each returning a data table, metrics and
//! threshold checks.

mod decoherence;
mod deloc;
mod epr;
mod oracle;
mod photon;
mod trajectory;

use modal_core::photon::{build_transfer_functions, ImageMap, ObjectGrid, TransferFunctions};

use crate::config::{Scenario, ScenarioConfig};
use crate::output::Report;
use crate::RunError;

pub fn run(cfg: &ScenarioConfig) -> Result<Report, RunError> {
    match cfg.scenario {
        Scenario::Localization => photon::localization(cfg),
        Scenario::TwoObservers => photon::two_observers(cfg),
        Scenario::Recoil => photon::recoil(cfg),
        Scenario::Trajectory => trajectory::run(cfg),
        Scenario::DelocDevice => deloc::run(cfg),
        Scenario::Decoherence => decoherence::run(cfg),
        Scenario::Epr => epr::run(cfg),
        Scenario::OracleSuite => oracle::run(cfg),
    }
}

fn grid(cfg: &ScenarioConfig) -> Result<ObjectGrid, RunError> {
    Ok(ObjectGrid::new(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.m)?)
}

fn image(cfg: &ScenarioConfig) -> Result<ImageMap, RunError> {
    Ok(ImageMap::new(cfg.detector.image_scale, cfg.detector.image_offset)?)
}

/// Transfer functions on `grid` from the detector section, with the column
/// normalisation re-checked.
fn transfer(cfg: &ScenarioConfig, grid: &ObjectGrid) -> Result<TransferFunctions, RunError> {
    let c = build_transfer_functions(grid, cfg.detector.n, cfg.detector.sigma, image(cfg)?)?;
    let res = c.normalization_residual();
    crate::ensure(res <= 1e-10, || {
        format!("transfer-function column norms off by {res:.3e}")
    })?;
    Ok(c)
}

/// Probabilities must be nonnegative and sum to one.
fn ensure_distribution(what: &str, p: &[f64], tol: f64) -> Result<(), RunError> {
    let total: f64 = p.iter().sum();
    crate::ensure((total - 1.0).abs() <= tol, || {
        format!("{what}: probabilities sum to {total:.15}")
    })?;
    let low = p.iter().cloned().fold(f64::INFINITY, f64::min);
    crate::ensure(low >= -1e-12, || format!("{what}: negative probability {low:.3e}"))
}
