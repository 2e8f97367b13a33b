use modal_core::dynamics::{
    classical_endpoint, gaussian_packet, momentum_check, third_conditional, two_time_joint, two_time_state,
    window_mass, Propagator,
};

use super::{ensure_distribution, grid, transfer};
use crate::config::ScenarioConfig;
use crate::ensure;
use crate::output::{Check, Report, Table};
use crate::RunError;

/// Pairs with a smaller joint probability are skipped; their conditional
/// states are dominated by the tails of the prior.
pub const PAIR_CUTOFF: f64 = 1e-3;
/// Window around the block nearest the classical endpoint, in blocks.
pub const WINDOW: usize = 2;

/// Packet measured, evolved for `t`, measured, evolved for `t'`, measured.
pub fn run(cfg: &ScenarioConfig) -> Result<Report, RunError> {
    let g = grid(cfg)?;
    let c = transfer(cfg, &g)?;
    let d = &cfg.dynamics;
    let psi0 = gaussian_packet(&g, d.x0, d.width0, d.p0, d.hbar)?;
    let g_t = Propagator::free(&g, d.mass, d.t, d.hbar)?;
    let g_tp = Propagator::free(&g, d.mass, d.t_prime, d.hbar)?;
    let joint = two_time_joint(&psi0, &c, &g_t)?;
    let flat: Vec<f64> = joint.p.iter().copied().collect();
    ensure_distribution("two-time joint table", &flat, 1e-9)?;

    let mut table = Table::new(&[
        ("block_1", "index"),
        ("block_2", "index"),
        ("x_1", "length"),
        ("x_2", "length"),
        ("joint_probability", "1"),
        ("p_peak", "momentum"),
        ("p_classical", "momentum"),
        ("momentum_offset", "grid_steps"),
        ("momentum_spread", "momentum"),
        ("classical_endpoint", "length"),
        ("endpoint_block", "index"),
        ("window_mass", "1"),
        ("mean_position_after", "length"),
    ]);
    let n = c.n_blocks();
    let (mut covered, mut worst_mass, mut worst_steps, mut worst_ehrenfest) = (0.0, 1.0_f64, 0.0_f64, 0.0_f64);
    let mut near_edge = 0usize;
    let margin = 8.0 * c.sigma_image();
    for j in 0..n {
        for k in 0..n {
            let pjk = joint.p[(j, k)];
            if pjk < PAIR_CUTOFF {
                continue;
            }
            covered += pjk;
            let (xj, xk) = (c.block_position(j), c.block_position(k));
            let state = two_time_state(&psi0, &c, j, &g_t, k)?;
            let norm = state.norm();
            ensure((norm - 1.0).abs() <= 1e-12, || {
                format!("conditional state ({j}, {k}) has norm {norm:.15}")
            })?;
            let mc = momentum_check(&state, &g, d.mass, d.t, d.hbar, xj, xk)?;
            let q = third_conditional(&psi0, &c, &g_t, &g_tp, j, k)?;
            ensure_distribution("third-measurement conditional", &q, 1e-9)?;
            let end = classical_endpoint(xj, xk, d.t, d.t_prime)?;
            if end - g.x_min() < margin || g.x_max() - end < margin {
                near_edge += 1;
            }
            let nb = c.nearest_block(end);
            let mass = window_mass(&q, nb, WINDOW);
            let evolved = g_tp.apply(&state);
            let mean: f64 = evolved.iter().enumerate().map(|(i, z)| z.norm_sqr() * g.x(i)).sum();
            worst_mass = worst_mass.min(mass);
            worst_steps = worst_steps.max(mc.offset_in_steps());
            worst_ehrenfest = worst_ehrenfest.max((mean - end).abs() / g.dx());
            table.push(vec![
                j.into(),
                k.into(),
                xj.into(),
                xk.into(),
                pjk.into(),
                mc.p_peak.into(),
                mc.p_classical.into(),
                mc.offset_in_steps().into(),
                mc.spread.into(),
                end.into(),
                nb.into(),
                mass.into(),
                mean.into(),
            ]);
        }
    }
    ensure(!table.rows.is_empty(), || {
        "no outcome pair reaches the probability cutoff".into()
    })?;
    let mut rep = Report {
        table,
        ..Report::default()
    };
    rep.metric("pairs_evaluated", rep.table.rows.len() as f64);
    rep.metric("probability_covered", covered);
    rep.metric("pair_cutoff", PAIR_CUTOFF);
    rep.metric("worst_window_mass", worst_mass);
    rep.metric("worst_momentum_offset_steps", worst_steps);
    rep.metric("worst_mean_vs_endpoint_cells", worst_ehrenfest);
    rep.metric("momentum_grid_step", 2.0 * std::f64::consts::PI * d.hbar / g.length());
    rep.metric(
        "packet_action_over_hbar",
        d.mass * d.width0 * (d.p0 / d.mass) * d.t / d.hbar,
    );
    rep.check(Check::at_least(
        "third-display mass within two blocks of the classical endpoint",
        worst_mass,
        0.95,
    ));
    rep.check(Check::at_most(
        "momentum peak offset from classical value",
        worst_steps,
        3.0,
    ));
    if near_edge > 0 {
        rep.note(format!(
            "warning: {near_edge} classical endpoints lie within 8 sigma of the grid edge; the periodic grid may wrap them"
        ));
    }
    Ok(rep)
}
