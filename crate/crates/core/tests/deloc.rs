use modal_core::deloc::{deloc_joint_prob, relative_state, JointObjectDeviceState};
use modal_core::linalg::{c, CMatrix};
use modal_core::photon::{build_transfer_functions, ImageMap, ObjectGrid, TransferFunctions};

fn grids() -> (ObjectGrid, TransferFunctions) {
    let g = ObjectGrid::new(0.0, 256.0, 256).unwrap();
    let rel = ObjectGrid::new(-32.5, 32.5, 65).unwrap();
    let t = build_transfer_functions(&rel, 13, 2.0, ImageMap::IDENTITY).unwrap();
    (g, t)
}

fn state(com_center: f64, com_width: f64, rel_center: f64) -> JointObjectDeviceState {
    let (g, _) = grids();
    JointObjectDeviceState::product_com_relative(g.clone(), g, com_center, com_width, rel_center, 0.5).unwrap()
}

#[test]
fn common_translation_changes_nothing() {
    let (_, t) = grids();
    let a = deloc_joint_prob(&state(128.0, 8.0, 0.0), &t, &t).unwrap();
    let b = deloc_joint_prob(&state(141.0, 8.0, 0.0), &t, &t).unwrap();
    assert!((&a.p - &b.p).amax() <= 1e-12);
}

#[test]
fn relative_shift_by_one_pitch_shifts_both_readings() {
    let (_, t) = grids();
    let a = deloc_joint_prob(&state(128.0, 12.0, 0.0), &t, &t).unwrap();
    let b = deloc_joint_prob(&state(128.0, 12.0, 5.0), &t, &t).unwrap();
    let mut worst: f64 = 0.0;
    for j in 0..12 {
        for k in 0..12 {
            worst = worst.max((a.p[(j, k)] - b.p[(j + 1, k + 1)]).abs());
        }
    }
    assert!(worst <= 1e-12, "{worst:e}");
}

#[test]
fn readings_ignore_the_spread_of_the_centre_of_mass() {
    let (_, t) = grids();
    let base = deloc_joint_prob(&state(128.0, 4.0, 0.0), &t, &t).unwrap();
    let base_rel = relative_state(&state(128.0, 4.0, 0.0), &t, &t, 6, 6).unwrap();
    for w in [8.0, 16.0] {
        let s = state(128.0, w, 0.0);
        let p = deloc_joint_prob(&s, &t, &t).unwrap();
        assert!((&p.p - &base.p).amax() <= 1e-10, "width {w}");
        let rs = relative_state(&s, &t, &t, 6, 6).unwrap();
        assert!((rs.rel_std() - base_rel.rel_std()).abs() <= 1e-8 * base_rel.rel_std());
        assert!(rs.com_std() > base_rel.com_std());
    }
}

#[test]
fn point_masses_give_a_product_of_transfer_weights() {
    let (g, t) = grids();
    let mut psi = CMatrix::zeros(256, 256);
    psi[(70, 63)] = c(1.0, 0.0);
    let s = JointObjectDeviceState::new(g.clone(), g, psi).unwrap();
    let p = deloc_joint_prob(&s, &t, &t).unwrap();
    // x - y = 7 sits at relative index 39
    let r = 39;
    assert!((t.grid.x(r) - 7.0).abs() <= 1e-12);
    for j in 0..13 {
        for k in 0..13 {
            let want = t.c[(j, r)].norm_sqr() * t.c[(k, r)].norm_sqr();
            assert!((p.p[(j, k)] - want).abs() <= 1e-15);
        }
    }
}

#[test]
fn relative_state_is_a_density() {
    let (_, t) = grids();
    let s = state(128.0, 20.0, 0.0);
    let rs = relative_state(&s, &t, &t, 6, 6).unwrap();
    let tr: f64 = (0..rs.rho.nrows()).map(|i| rs.rho[(i, i)].re).sum();
    assert!((tr - 1.0).abs() <= 1e-12);
    assert!((rs.com_marginal.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    assert!(rs.rel_std() <= 1.0);
}
