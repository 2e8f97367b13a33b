use modal_core::deloc::{deloc_joint_prob, relative_state, JointObjectDeviceState};
use modal_core::linalg::{hermiticity_residual, trace};
use modal_core::observers::agreement_mass;
use modal_core::photon::ObjectGrid;

use super::{ensure_distribution, grid, transfer};
use crate::config::ScenarioConfig;
use crate::ensure;
use crate::output::{Check, Report, Table};
use crate::RunError;

/// Largest dense joint amplitude array accepted.
pub const MAX_JOINT_POINTS: usize = 1 << 16;
const PAIR_CUTOFF: f64 = 1e-3;

/// Object and device centre of mass both spread out; outcomes conditioned on
/// two arrays mounted on the device.
pub fn run(cfg: &ScenarioConfig) -> Result<Report, RunError> {
    let xg = grid(cfg)?;
    let yg = xg.clone();
    if xg.len() * yg.len() > MAX_JOINT_POINTS {
        return Err(RunError::Validation(format!(
            "grid.M: joint object-device array of {}x{} exceeds {MAX_JOINT_POINTS} points",
            xg.len(),
            yg.len()
        )));
    }
    let half = 0.5 * cfg.deloc.rel_cells as f64 * xg.dx();
    let rel = ObjectGrid::new(-half, half, cfg.deloc.rel_cells)?;
    let c = transfer(cfg, &rel)?;
    let dl = &cfg.deloc;
    let state = JointObjectDeviceState::product_com_relative(
        xg.clone(),
        yg,
        dl.com_center,
        dl.com_width,
        dl.rel_center,
        dl.rel_width,
    )?;
    let joint = deloc_joint_prob(&state, &c, &c)?;
    let flat: Vec<f64> = joint.p.iter().copied().collect();
    ensure_distribution("joint outcome table", &flat, 1e-10)?;

    let mut table = Table::new(&[
        ("block_1", "index"),
        ("block_2", "index"),
        ("joint_probability", "1"),
        ("relative_std", "length"),
        ("com_std", "length"),
    ]);
    let n = c.n_blocks();
    let (mut worst_rel, mut narrowest_com) = (0.0_f64, f64::INFINITY);
    for j in 0..n {
        for k in 0..n {
            let p = joint.p[(j, k)];
            if p < PAIR_CUTOFF {
                continue;
            }
            let rs = relative_state(&state, &c, &c, j, k)?;
            let tr = trace(&rs.rho).re;
            ensure((tr - 1.0).abs() <= 1e-10, || {
                format!("relative state ({j}, {k}) has trace {tr:.15}")
            })?;
            let herm = hermiticity_residual(&rs.rho);
            ensure(herm <= 1e-10, || {
                format!("relative state ({j}, {k}) is not Hermitian ({herm:.3e})")
            })?;
            let (r, m) = (rs.rel_std(), rs.com_std());
            worst_rel = worst_rel.max(r);
            narrowest_com = narrowest_com.min(m);
            table.push(vec![j.into(), k.into(), p.into(), r.into(), m.into()]);
        }
    }
    ensure(!table.rows.is_empty(), || {
        "no outcome pair reaches the probability cutoff".into()
    })?;
    let sigma = c.sigma_image();
    let mut rep = Report {
        table,
        ..Report::default()
    };
    let a1 = agreement_mass(&joint, 1);
    rep.metric("agreement_mass_w0", agreement_mass(&joint, 0));
    rep.metric("agreement_mass_w1", a1);
    rep.metric("transfer_width", sigma);
    rep.metric("max_relative_std", worst_rel);
    rep.metric("min_com_std", narrowest_com);
    rep.check(Check::at_least(
        "com width over transfer width",
        dl.com_width / sigma,
        10.0,
    ));
    rep.check(Check::at_least("agreement mass within one block", a1, 0.99));
    rep.check(Check::at_most(
        "relative-coordinate std (worst pair)",
        worst_rel,
        2.0 * sigma,
    ));
    rep.check(Check::at_least(
        "com std over relative std",
        narrowest_com / worst_rel,
        10.0,
    ));
    Ok(rep)
}
