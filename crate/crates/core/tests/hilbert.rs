mod common;

use common::*;
use modal_core::hilbert::{schmidt_decompose, DensityOperator, PureState, QuantumState, DEFAULT_DEGENERACY_TOL};
use modal_core::linalg::{hermitian_eigen, hermiticity_residual, max_abs_diff, min_eigenvalue, CMatrix, C64};
use proptest::prelude::*;

const TRI: [(&str, usize); 3] = [("a", 2), ("b", 3), ("c", 2)];

#[test]
fn tensor_matches_index_loop() {
    let a = random_pure(&[("a", 2)], 1);
    let b = random_pure(&[("b", 3)], 2);
    let ab = a.tensor(&b).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..3 {
            let want = a.amplitudes()[i] * b.amplitudes()[j];
            worst = worst.max((ab.amplitudes()[i * 3 + j] - want).norm());
        }
    }
    assert!(worst <= 1e-14, "{worst:e}");
}

#[test]
fn middle_factor_contraction() {
    let rho = random_density(&TRI, 5, 3);
    let got = rho.partial_trace(&["b"]).unwrap();
    let m = rho.matrix();
    let mut want = CMatrix::zeros(3, 3);
    for b1 in 0..3 {
        for b2 in 0..3 {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..2 {
                for c in 0..2 {
                    acc += m[(a * 6 + b1 * 2 + c, a * 6 + b2 * 2 + c)];
                }
            }
            want[(b1, b2)] = acc;
        }
    }
    assert!(max_abs_diff(got.matrix(), &want) <= 1e-12);
}

#[test]
fn product_state_traces_to_its_factor() {
    let a = random_density(&[("a", 3)], 2, 4);
    let b = random_density(&[("b", 2)], 2, 5);
    let space = a.space().join(b.space()).unwrap();
    let ab = DensityOperator::new(space, a.matrix().kronecker(b.matrix())).unwrap();
    let back = ab.partial_trace(&["a"]).unwrap();
    assert!(max_abs_diff(back.matrix(), a.matrix()) <= 1e-12);
}

#[test]
fn pure_and_mixed_paths_agree() {
    let psi = random_pure(&TRI, 6);
    let rho = psi.to_density();
    for keep in [vec!["a"], vec!["b"], vec!["a", "c"], vec!["c", "b"]] {
        let p = psi.partial_trace(&keep).unwrap();
        let r = rho.partial_trace(&keep).unwrap();
        assert!(max_abs_diff(p.matrix(), r.matrix()) <= 1e-13, "{keep:?}");
    }
}

#[test]
fn product_state_has_one_schmidt_term() {
    let a = random_pure(&[("a", 3)], 7);
    let b = random_pure(&[("b", 4)], 8);
    let terms = schmidt_decompose(&a.tensor(&b).unwrap(), &["a"]).unwrap();
    assert_eq!(terms.len(), 1);
    assert!((terms[0].coeff - 1.0).abs() <= 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_trace_is_a_density(seed in any::<u64>(), rank in 1usize..=12) {
        let rho = random_density(&TRI, rank, seed);
        for keep in [vec!["a"], vec!["b"], vec!["c"], vec!["a", "b"], vec!["b", "c"]] {
            let r = rho.partial_trace(&keep).unwrap();
            prop_assert!((r.trace().re - 1.0).abs() <= 1e-12);
            prop_assert!(r.trace().im.abs() <= 1e-12);
            prop_assert!(hermiticity_residual(r.matrix()) <= 1e-12);
            prop_assert!(min_eigenvalue(r.matrix()) >= -1e-12);
        }
    }

    #[test]
    fn partial_traces_compose(seed in any::<u64>()) {
        let rho = random_density(&[("a", 2), ("b", 2), ("c", 3), ("d", 2)], 6, seed);
        let stepwise = rho
            .partial_trace(&["a", "c", "d"])
            .unwrap()
            .partial_trace(&["a", "c"])
            .unwrap();
        let direct = rho.partial_trace(&["a", "c"]).unwrap();
        prop_assert!(max_abs_diff(stepwise.matrix(), direct.matrix()) <= 1e-12);
    }

    #[test]
    fn spectral_projectors_resolve_the_state(seed in any::<u64>(), rank in 1usize..=6) {
        let rho = random_density(&[("a", 2), ("b", 3)], rank, seed);
        let res = rho.spectral_resolution(DEFAULT_DEGENERACY_TOL);
        let mut sum = CMatrix::zeros(6, 6);
        for (i, e) in res.entries.iter().enumerate() {
            prop_assert!(max_abs_diff(&(&e.projector * &e.projector), &e.projector) <= 1e-12);
            prop_assert!(hermiticity_residual(&e.projector) <= 1e-12);
            for f in &res.entries[i + 1..] {
                prop_assert!(max_abs(&(&e.projector * &f.projector)) <= 1e-12);
                prop_assert!(e.eigenvalue > f.eigenvalue);
            }
            sum += &e.projector;
        }
        prop_assert!(max_abs_diff(&sum, &CMatrix::identity(6, 6)) <= 1e-12);
        prop_assert!(max_abs_diff(&res.reconstruct(), rho.matrix()) <= 1e-12);
        prop_assert!((res.total_weight() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn schmidt_coefficients_square_to_the_reduced_spectrum(seed in any::<u64>()) {
        let psi = random_pure(&TRI, seed);
        let terms = schmidt_decompose(&psi, &["b"]).unwrap();
        let (vals, _) = hermitian_eigen(psi.partial_trace(&["b"]).unwrap().matrix());
        for (t, v) in terms.iter().zip(&vals) {
            prop_assert!((t.coeff * t.coeff - v).abs() <= 1e-11);
        }
        let total: f64 = terms.iter().map(|t| t.coeff * t.coeff).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn schmidt_coefficients_ignore_local_unitaries(seed in any::<u64>()) {
        let psi = random_pure(&TRI, seed);
        let moved = psi
            .apply_unitary(&random_unitary(3, seed ^ 1), &["b"])
            .unwrap()
            .apply_unitary(&random_unitary(4, seed ^ 2), &["a", "c"])
            .unwrap();
        let before = schmidt_decompose(&psi, &["b"]).unwrap();
        let after = schmidt_decompose(&moved, &["b"]).unwrap();
        prop_assert_eq!(before.len(), after.len());
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x.coeff - y.coeff).abs() <= 1e-10);
        }
    }

    #[test]
    fn local_unitary_leaves_other_factors_alone(seed in any::<u64>()) {
        let psi = random_pure(&TRI, seed);
        let moved = psi.apply_unitary(&random_unitary(3, seed.wrapping_add(9)), &["b"]).unwrap();
        let before = psi.partial_trace(&["a", "c"]).unwrap();
        let after = moved.partial_trace(&["a", "c"]).unwrap();
        prop_assert!(max_abs_diff(before.matrix(), after.matrix()) <= 1e-12);

        let rho = random_density(&TRI, 4, seed);
        let moved = rho.apply_unitary(&random_unitary(4, seed), &["c", "a"]).unwrap();
        let before = rho.partial_trace(&["b"]).unwrap();
        let after = moved.partial_trace(&["b"]).unwrap();
        prop_assert!(max_abs_diff(before.matrix(), after.matrix()) <= 1e-12);
    }

    #[test]
    fn reduced_trait_matches_named_trace(seed in any::<u64>()) {
        let psi: PureState = random_pure(&TRI, seed);
        let by_pos = psi.reduced(&[0, 2]);
        let by_name = psi.partial_trace(&["a", "c"]).unwrap();
        prop_assert!(max_abs_diff(by_pos.matrix(), by_name.matrix()) <= 1e-15);
    }
}
