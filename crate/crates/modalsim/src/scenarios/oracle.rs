use modal_core::oracle::{run_battery, OracleParams};

use crate::config::ScenarioConfig;
use crate::output::{Check, Report, Table};
use crate::RunError;

pub const TOLERANCE: f64 = 1e-9;

/// Closed forms against the explicit receptor/display tensor construction.
pub fn run(cfg: &ScenarioConfig) -> Result<Report, RunError> {
    let params = OracleParams {
        m: cfg.oracle.m,
        n: cfg.oracle.n,
        env_dim: cfg.oracle.env_dim,
        ..OracleParams::default()
    };
    let cases = run_battery(&params, cfg.seed)?;
    let mut table = Table::new(&[("case", "label"), ("max_deviation", "1")]);
    let mut rep = Report::default();
    for c in &cases {
        table.push(vec![c.name.into(), c.max_deviation.into()]);
        rep.check(Check::at_most(c.name, c.max_deviation, TOLERANCE));
    }
    let worst = cases.iter().map(|c| c.max_deviation).fold(0.0, f64::max);
    rep.metric("max_deviation", worst);
    rep.table = table;
    Ok(rep)
}
