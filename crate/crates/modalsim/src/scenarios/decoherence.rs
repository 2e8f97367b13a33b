use modal_core::decoherence::{
    definiteness_check, evolve_sector, haar_overlap, reduced_display, scaling_experiment, trial_seed,
    DecoherenceReport, DisplayState, ScalingParams, SectorModel,
};
use modal_core::linalg::{CVector, C64};

use crate::config::ScenarioConfig;
use crate::ensure;
use crate::output::{Check, Report, Table};
use crate::RunError;

/// Environment dimension of the counterexample that should stay indefinite.
pub const SMALL_ENV: usize = 2;

fn env_ground(d: usize) -> CVector {
    let mut xi = CVector::zeros(d);
    xi[0] = C64::new(1.0, 0.0);
    xi
}

fn evolved_report(
    cfg: &ScenarioConfig,
    env: usize,
    phi: &DisplayState,
    seed: u64,
) -> Result<DecoherenceReport, RunError> {
    let dc = &cfg.decoherence;
    let dims = [dc.k1, dc.k2];
    let model = SectorModel::two_sector(dc.k1, dc.k2, env, dc.beta, seed)?;
    let state = evolve_sector(&model, phi, &env_ground(env), dc.t, cfg.dynamics.hbar)?;
    let before = phi.sectors.iter().map(|v| v.norm_squared());
    for (n, (a, b)) in before.zip(state.sector_populations()).enumerate() {
        ensure((a - b).abs() <= 1e-9, || {
            format!("population of sector {n} drifted from {a:.12} to {b:.12}")
        })?;
    }
    Ok(definiteness_check(&reduced_display(&state), &dims))
}

/// Off-diagonal suppression against environment size, then the level-spacing
/// verdict at the largest and at a tiny environment.
pub fn run(cfg: &ScenarioConfig) -> Result<Report, RunError> {
    let dc = &cfg.decoherence;
    let params = ScalingParams {
        env_dims: dc.d_list.clone(),
        trials: dc.trials,
        k1: dc.sweep_k1,
        k2: dc.sweep_k2,
        beta: dc.beta,
        t: dc.t,
        hbar: cfg.dynamics.hbar,
        seed: cfg.seed,
    };
    let sweep = scaling_experiment(&params)?;
    let late = scaling_experiment(&ScalingParams {
        env_dims: dc.d_list[..2].to_vec(),
        t: 2.0 * dc.t,
        ..params.clone()
    })?;

    let mut table = Table::new(&[
        ("env_dim", "1"),
        ("mean_offdiag_max", "1"),
        ("sem_offdiag_max", "1"),
        ("mean_offdiag_fro", "1"),
        ("sem_offdiag_fro", "1"),
        ("haar_mean_overlap_sq", "1"),
        ("haar_sem", "1"),
        ("inverse_env_dim", "1"),
        ("two_pow_one_minus_env_dim", "1"),
    ]);
    let mut worst_haar = 0.0_f64;
    // the overlap law read literally with D as the dimension, for comparison
    let mut worst_literal = 0.0_f64;
    for pt in &sweep.points {
        let (h, hs) = haar_overlap(pt.env_dim, dc.haar_trials, trial_seed(cfg.seed ^ 0x4A5A, pt.env_dim, 0));
        let inv = 1.0 / pt.env_dim as f64;
        worst_haar = worst_haar.max((h / inv - 1.0).abs());
        let literal = (-(pt.env_dim as f64 - 1.0)).exp2();
        worst_literal = worst_literal.max(h / literal);
        table.push(vec![
            pt.env_dim.into(),
            pt.mean_max.into(),
            pt.sem_max.into(),
            pt.mean_fro.into(),
            pt.sem_fro.into(),
            h.into(),
            hs.into(),
            inv.into(),
            literal.into(),
        ]);
    }
    let inversions = sweep
        .points
        .windows(2)
        .filter(|w| w[1].mean_max > w[0].mean_max)
        .count();
    let (p0, q0) = (&sweep.points[0], &late.points[0]);
    let plateau_gap = (p0.mean_max - q0.mean_max).abs() / (p0.sem_max.powi(2) + q0.sem_max.powi(2)).sqrt();

    let dims = [dc.k1, dc.k2];
    let big = *dc.d_list.last().expect("validated non-empty");
    let ready = DisplayState::ready_dominated(&dims, dc.excited_amplitude)?;
    let large = evolved_report(cfg, big, &ready, trial_seed(cfg.seed, big, usize::MAX))?;
    let small = evolved_report(
        cfg,
        SMALL_ENV,
        &DisplayState::uniform(&dims),
        trial_seed(cfg.seed, SMALL_ENV, usize::MAX),
    )?;
    let min_pur = |r: &DecoherenceReport| r.sector_purities.iter().cloned().fold(1.0, f64::min);

    let mut rep = Report {
        table,
        ..Report::default()
    };
    rep.metric("exponent_offdiag_max", sweep.exponent_max);
    rep.metric("exponent_offdiag_fro", sweep.exponent_fro);
    rep.metric("paper_qubit_exponent_if_D_is_2^N", -0.5);
    rep.metric("monotonicity_inversions", inversions as f64);
    rep.metric("plateau_gap_in_sem_at_smallest_D", plateau_gap);
    rep.metric("haar_worst_relative_error", worst_haar);
    rep.metric("haar_worst_ratio_to_two_pow_one_minus_d", worst_literal);
    rep.metric("level_spacing_ref", large.level_spacing_ref);
    rep.metric("definiteness_threshold", large.threshold);
    rep.metric("large_env_dim", big as f64);
    rep.metric("large_env_offdiag_max", large.offdiag_max);
    rep.metric("large_env_min_sector_purity", min_pur(&large));
    rep.metric("large_env_definite", f64::from(u8::from(large.definite)));
    rep.metric("small_env_dim", SMALL_ENV as f64);
    rep.metric("small_env_offdiag_max", small.offdiag_max);
    rep.metric("small_env_min_sector_purity", min_pur(&small));
    rep.metric("small_env_definite", f64::from(u8::from(small.definite)));
    rep.check(Check::at_least(
        "fitted exponent lower bound",
        sweep.exponent_max,
        -0.65,
    ));
    rep.check(Check::at_most("fitted exponent upper bound", sweep.exponent_max, -0.35));
    rep.check(Check::at_most("Haar control relative error", worst_haar, 0.10));
    rep.check(Check::at_most("monotonicity inversions", inversions as f64, 1.0));
    rep.check(Check::at_most(
        "plateau: t vs 2t gap in standard errors",
        plateau_gap,
        3.0,
    ));
    rep.check(Check::at_least(
        "large environment verdict (1 = definite)",
        f64::from(u8::from(large.definite)),
        1.0,
    ));
    rep.check(Check::at_most(
        "small environment verdict (1 = definite)",
        f64::from(u8::from(small.definite)),
        0.0,
    ));
    rep.check(Check::at_most(
        "small environment mixes sectors (min purity)",
        min_pur(&small),
        0.9,
    ));
    rep.note(format!(
        "The sweep uses {}+{} display levels with equal weights; the verdict at D={big} uses excited amplitude {} and at D={SMALL_ENV} equal weights.",
        dc.sweep_k1, dc.sweep_k2, dc.excited_amplitude
    ));
    rep.note("Fitted against D directly: E|<a|b>|^2 = 1/D for Haar vectors. The column two_pow_one_minus_env_dim reads the overlap law with D as the dimension and is far off; reading D as 2^N for N qubits turns 2^-(N-1) into 2/D, the same -1/2 exponent in D.");
    Ok(rep)
}
