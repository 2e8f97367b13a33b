use modal_core::linalg::{max_abs_diff, CMatrix};
use modal_core::observers::{epr_scenario, QubitBasis};

use crate::config::ScenarioConfig;
use crate::ensure;
use crate::output::{num, Check, Report, Table};
use crate::RunError;

fn matrix_text(m: &CMatrix) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| {
            let cells: Vec<String> = (0..m.ncols())
                .map(|j| format!("{}{:+}i", num(m[(i, j)].re), num(m[(i, j)].im)))
                .collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    rows.join(" ")
}

/// Singlet pair, one particle measured by a pointer in several bases.
pub fn run(cfg: &ScenarioConfig) -> Result<Report, RunError> {
    let bases = [
        QubitBasis::z(),
        QubitBasis::x(),
        QubitBasis::y(),
        QubitBasis::bloch("bloch", cfg.epr.theta, cfg.epr.phi),
    ];
    let half = CMatrix::identity(2, 2).scale(0.5);
    let mut table = Table::new(&[
        ("basis", "label"),
        ("reading", "index"),
        ("probability", "1"),
        ("partner_fidelity", "1"),
        ("particle2_purity", "1"),
        ("rho2_change", "1"),
    ]);
    let (mut worst_signal, mut worst_before, mut worst_fid, mut worst_prob) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let mut notes = Vec::new();
    for (i, basis) in bases.iter().enumerate() {
        let r = epr_scenario(basis, cfg.seed.wrapping_add(i as u64))?;
        worst_signal = worst_signal.max(r.no_signal_deviation);
        worst_before = worst_before.max(max_abs_diff(r.relational_before.matrix(), &half));
        let pair_pure = r
            .pair_candidates_before
            .first()
            .is_some_and(|c| c.multiplicity == 1 && (c.probability - 1.0).abs() < 1e-12);
        ensure(pair_pure, || {
            "the pair is not pure with respect to itself before the measurement".into()
        })?;
        let p2_degenerate = r.particle2_candidates.len() == 1 && r.particle2_candidates[0].multiplicity == 2;
        ensure(p2_degenerate, || {
            "particle 2 with respect to itself is not the degenerate I/2".into()
        })?;
        let total: f64 = r.outcomes.iter().map(|o| o.probability).sum();
        ensure((total - 1.0).abs() <= 1e-12, || {
            format!("pointer readings sum to {total:.15}")
        })?;
        notes.push(format!(
            "basis {}: particle 2 w.r.t. the pair before: {}",
            basis.label,
            matrix_text(r.relational_before.matrix())
        ));
        for o in &r.outcomes {
            worst_fid = worst_fid.max(1.0 - o.partner_fidelity);
            worst_prob = worst_prob.max((o.probability - 0.5).abs());
            notes.push(format!(
                "basis {} reading {}: particle 2 w.r.t. the pair: {}",
                basis.label,
                o.reading,
                matrix_text(o.particle2.matrix())
            ));
            table.push(vec![
                basis.label.clone().into(),
                o.reading.into(),
                o.probability.into(),
                o.partner_fidelity.into(),
                o.particle2_purity.into(),
                r.no_signal_deviation.into(),
            ]);
        }
        notes.push(format!("basis {}: sampled reading {}", basis.label, r.sampled_reading));
    }
    let mut rep = Report {
        table,
        notes,
        ..Report::default()
    };
    rep.metric("max_reduced_rho2_change", worst_signal);
    rep.metric("max_before_deviation_from_half_identity", worst_before);
    rep.metric("max_partner_infidelity", worst_fid);
    rep.metric("max_reading_probability_offset", worst_prob);
    rep.check(Check::at_most("reduced rho2 change across bases", worst_signal, 1e-12));
    rep.check(Check::at_most("relational state before is I/2", worst_before, 1e-12));
    rep.check(Check::at_most(
        "relational state after is the partner (1 - fidelity)",
        worst_fid,
        1e-12,
    ));
    Ok(rep)
}
