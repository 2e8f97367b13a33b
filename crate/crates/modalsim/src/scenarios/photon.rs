use modal_core::linalg::{hermiticity_residual, trace, CVector, C64};
use modal_core::observers::{agreement_mass, two_device_joint};
use modal_core::photon::{
    display_probabilities, display_probabilities_recoil, object_state_after_light, relational_object_state,
    ObjectDensity, RecoilKernel,
};

use super::{ensure_distribution, grid, transfer};
use crate::config::ScenarioConfig;
use crate::ensure;
use crate::output::{Check, Report, Table};
use crate::RunError;

/// Uniform prior, one array; how narrow is the object from each display's
/// point of view.
pub fn localization(cfg: &ScenarioConfig) -> Result<Report, RunError> {
    let g = grid(cfg)?;
    let c = transfer(cfg, &g)?;
    let rho = ObjectDensity::uniform_pure(g.clone());
    let p = display_probabilities(&rho, &c)?;
    ensure_distribution("display probabilities", &p, 1e-10)?;

    let after = object_state_after_light(&rho, &c)?;
    let diag_drift = rho
        .diagonal()
        .iter()
        .zip(after.diagonal())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(diag_drift <= 1e-13, || {
        format!("object diagonal changed by the light by {diag_drift:.3e}")
    })?;

    let mut table = Table::new(&[
        ("block", "index"),
        ("block_position", "length"),
        ("probability", "1"),
        ("mean_position", "length"),
        ("position_std", "length"),
    ]);
    let mut worst = 0.0_f64;
    for (j, &pj) in p.iter().enumerate() {
        if pj <= 1e-14 {
            continue;
        }
        let r = relational_object_state(&rho, &c, j)?;
        let tr = trace(&r.rho).re;
        ensure((tr - 1.0).abs() <= 1e-10, || {
            format!("relational state {j} has trace {tr:.15}")
        })?;
        let herm = hermiticity_residual(&r.rho);
        ensure(herm <= 1e-10, || {
            format!("relational state {j} is not Hermitian ({herm:.3e})")
        })?;
        let s = r.position_std();
        worst = worst.max(s);
        table.push(vec![
            j.into(),
            c.block_position(j).into(),
            pj.into(),
            r.mean_position().into(),
            s.into(),
        ]);
    }
    let prior = rho.position_std();
    let bound = 2.0 * c.sigma_image();
    let mut rep = Report {
        table,
        ..Report::default()
    };
    rep.metric("prior_position_std", prior);
    rep.metric("sigma_image", c.sigma_image());
    rep.metric("max_relational_position_std", worst);
    rep.metric("prior_to_relational_ratio", prior / worst);
    rep.check(Check::at_most("relational position std (worst reading)", worst, bound));
    rep.check(Check::at_least("prior std over 2 sigma_image", prior / bound, 25.0));
    Ok(rep)
}

/// Two identical arrays, uniform prior.
pub fn two_observers(cfg: &ScenarioConfig) -> Result<Report, RunError> {
    let g = grid(cfg)?;
    let c = transfer(cfg, &g)?;
    let rho = ObjectDensity::uniform_pure(g.clone());
    let table_p = two_device_joint(&rho, &c, &c)?;
    let flat: Vec<f64> = table_p.p.iter().copied().collect();
    ensure_distribution("joint outcome table", &flat, 1e-10)?;
    let single = display_probabilities(&rho, &c)?;
    let drift = table_p
        .first_marginal()
        .iter()
        .zip(&single)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(drift <= 1e-10, || {
        format!("joint table marginal differs from single device by {drift:.3e}")
    })?;

    let n = c.n_blocks();
    let mut table = Table::new(&[("block_1", "index"), ("block_2", "index"), ("joint_probability", "1")]);
    for j in 0..n {
        for k in 0..n {
            table.push(vec![j.into(), k.into(), table_p.p[(j, k)].into()]);
        }
    }
    let mut rep = Report {
        table,
        ..Report::default()
    };
    let a0 = agreement_mass(&table_p, 0);
    let a1 = agreement_mass(&table_p, 1);
    let a2 = agreement_mass(&table_p, 2);
    rep.metric("agreement_mass_w0", a0);
    rep.metric("agreement_mass_w1", a1);
    rep.metric("agreement_mass_w2", a2);
    rep.metric("sigma_over_pitch", c.sigma / c.blocks.pitch);
    rep.check(Check::at_least("agreement mass within one block", a1, 0.99));
    Ok(rep)
}

/// Two packets on neighbouring blocks with opposite sign, so the outcome
/// probabilities depend on coherences once recoil stops separating them.
pub fn recoil(cfg: &ScenarioConfig) -> Result<Report, RunError> {
    let g = grid(cfg)?;
    let c = transfer(cfg, &g)?;
    let n = c.n_blocks();
    let (a, b) = (c.block_position(n / 2 - 1), c.block_position(n / 2));
    let s = 0.5 * c.sigma_image();
    let psi = CVector::from_fn(g.len(), |i, _| {
        let x = g.x(i);
        let f = |x0: f64| (-(x - x0).powi(2) / (4.0 * s * s)).exp();
        C64::new(f(a) - f(b), 0.0)
    });
    let rho = ObjectDensity::from_amplitudes(g.clone(), &psi)?;
    let free = display_probabilities(&rho, &c)?;
    let orth = display_probabilities_recoil(&rho, &c, &RecoilKernel::orthogonal(g.len()))?;
    let finite = display_probabilities_recoil(&rho, &c, &RecoilKernel::gaussian(&g, cfg.recoil.w)?)?;
    let coherent = display_probabilities_recoil(&rho, &c, &RecoilKernel::coherent(g.len()))?;
    for (what, p) in [
        ("recoil-free", &free),
        ("orthogonal kernel", &orth.probabilities),
        ("finite-width kernel", &finite.probabilities),
        ("identical recoil states", &coherent.probabilities),
    ] {
        ensure_distribution(what, p, 1e-10)?;
    }
    let max_diff = |p: &[f64]| p.iter().zip(&free).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);

    let mut table = Table::new(&[
        ("block", "index"),
        ("p_recoil_free", "1"),
        ("p_orthogonal", "1"),
        ("p_width_w", "1"),
        ("p_identical", "1"),
        ("raw_width_w", "1"),
        ("raw_identical", "1"),
    ]);
    #[allow(clippy::needless_range_loop)]
    for j in 0..n {
        table.push(vec![
            j.into(),
            free[j].into(),
            orth.probabilities[j].into(),
            finite.probabilities[j].into(),
            coherent.probabilities[j].into(),
            finite.raw[j].into(),
            coherent.raw[j].into(),
        ]);
    }
    let mut rep = Report {
        table,
        ..Report::default()
    };
    rep.metric("packet_separation", b - a);
    rep.metric("norm_width_w", finite.norm);
    rep.metric("norm_identical", coherent.norm);
    rep.metric("max_diff_orthogonal", max_diff(&orth.probabilities));
    rep.metric("max_diff_width_w", max_diff(&finite.probabilities));
    rep.metric("max_diff_identical", max_diff(&coherent.probabilities));
    rep.check(Check::at_most(
        "orthogonal kernel vs recoil-free",
        max_diff(&orth.probabilities),
        1e-12,
    ));
    rep.check(Check::at_least(
        "infinitely wide kernel vs recoil-free",
        max_diff(&coherent.probabilities),
        0.01,
    ));
    rep.note("Recoil probabilities are divided by the norm of the recoiled state; the raw columns are the unnormalised sums.");
    Ok(rep)
}
