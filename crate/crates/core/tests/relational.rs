mod common;

use common::*;
use modal_core::hilbert::{DensityOperator, PureState, QuantumState, DEFAULT_DEGENERACY_TOL};
use modal_core::linalg::{c, hermitian_eigen, max_abs_diff, trace, CMatrix, CVector};
use modal_core::relational::{
    evolve_closed, joint_assignment_probability, relational_state, self_state_candidates, Assignment,
    JointAssignmentTable,
};
use modal_core::ModalError;
use proptest::prelude::*;

const TRI: [(&str, usize); 3] = [("a", 2), ("b", 3), ("c", 2)];

fn bell() -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let amps = CVector::from_vec(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]);
    PureState::new(space(&[("a", 2), ("b", 2)]), amps).unwrap()
}

#[test]
fn candidate_probabilities_are_reduced_eigenvalues() {
    let psi = random_pure(&TRI, 11);
    let cands = self_state_candidates(&psi, &["b"], DEFAULT_DEGENERACY_TOL).unwrap();
    let (vals, _) = hermitian_eigen(psi.partial_trace(&["b"]).unwrap().matrix());
    assert_eq!(cands.len(), 3);
    for (cand, v) in cands.iter().zip(&vals) {
        assert!((cand.probability - v).abs() <= 1e-11);
    }
    let total: f64 = cands.iter().map(|c| c.probability).sum();
    assert!((total - 1.0).abs() <= 1e-12);
}

#[test]
fn product_factor_has_a_single_live_candidate() {
    let zero = PureState::basis(space(&[("q", 2)]), 0).unwrap();
    let u = zero.tensor(&random_pure(&[("rest", 3)], 12)).unwrap();
    let cands = self_state_candidates(&u, &["q"], DEFAULT_DEGENERACY_TOL).unwrap();
    let live: Vec<_> = cands.iter().filter(|c| c.probability > 1e-12).collect();
    assert_eq!(live.len(), 1);
    assert!((live[0].probability - 1.0).abs() <= 1e-12);
    let mut want = CMatrix::zeros(2, 2);
    want[(0, 0)] = c(1.0, 0.0);
    assert!(max_abs_diff(&live[0].projector, &want) <= 1e-12);
}

#[test]
fn relational_state_of_the_whole_is_itself() {
    let rho = random_density(&TRI, 3, 13);
    let same = relational_state(&rho, &["a", "b", "c"]).unwrap();
    assert!(max_abs_diff(same.matrix(), rho.matrix()) <= 1e-15);
}

#[test]
fn relational_state_of_a_product_factor() {
    let a = random_density(&[("a", 2)], 2, 14);
    let b = random_density(&[("b", 3)], 3, 15);
    let ab = DensityOperator::new(a.space().join(b.space()).unwrap(), a.matrix().kronecker(b.matrix())).unwrap();
    let got = relational_state(&ab, &["b"]).unwrap();
    assert!(max_abs_diff(got.matrix(), b.matrix()) <= 1e-12);
}

#[test]
fn single_projector_probability_is_its_eigenvalue() {
    let psi = random_pure(&TRI, 16);
    for cand in self_state_candidates(&psi, &["a", "c"], DEFAULT_DEGENERACY_TOL).unwrap() {
        let p = joint_assignment_probability(&psi, &[Assignment::new(&["a", "c"], cand.projector)]).unwrap();
        assert!((p - cand.probability).abs() <= 1e-12);
    }
}

#[test]
fn joint_probability_matches_full_operator_trace() {
    let rho = random_density(&TRI, 4, 17);
    let pa = self_state_candidates(&rho, &["a"], 0.0).unwrap();
    let pb = self_state_candidates(&rho, &["b"], 0.0).unwrap();
    let pc = self_state_candidates(&rho, &["c"], 0.0).unwrap();
    let mut worst: f64 = 0.0;
    for x in &pa {
        for y in &pb {
            for z in &pc {
                let full = x.projector.kronecker(&y.projector).kronecker(&z.projector);
                let want = trace(&(rho.matrix() * full)).re;
                let got = joint_assignment_probability(
                    &rho,
                    &[
                        Assignment::new(&["b"], y.projector.clone()),
                        Assignment::new(&["a"], x.projector.clone()),
                        Assignment::new(&["c"], z.projector.clone()),
                    ],
                )
                .unwrap();
                worst = worst.max((got - want).abs());
            }
        }
    }
    assert!(worst <= 1e-12, "{worst:e}");
}

#[test]
fn overlapping_assignments_are_rejected() {
    let psi = random_pure(&TRI, 18);
    let p = CMatrix::identity(6, 6);
    let q = CMatrix::identity(3, 3);
    let err = joint_assignment_probability(&psi, &[Assignment::new(&["a", "b"], p), Assignment::new(&["b"], q)]);
    assert!(matches!(err, Err(ModalError::OverlappingSystems(_))));
    let err = JointAssignmentTable::build(&psi, &[vec!["a", "b"], vec!["b"]], DEFAULT_DEGENERACY_TOL);
    assert!(matches!(err, Err(ModalError::OverlappingSystems(_))));
}

#[test]
fn bell_pair_samples_half_and_half() {
    let table = JointAssignmentTable::build(&bell(), &[vec!["a"], vec!["b"]], 0.0).unwrap();
    let n = 100_000;
    let draws = table.sample(n, 2024);
    let both_zero = draws.iter().filter(|d| d[0] == 0 && d[1] == 0).count() as f64 / n as f64;
    let mismatched = draws.iter().filter(|d| d[0] != d[1]).count();
    assert!((both_zero - 0.5).abs() <= 0.01, "{both_zero}");
    assert_eq!(mismatched, 0);
}

#[test]
fn sampling_is_deterministic_per_seed() {
    let psi = random_pure(&TRI, 19);
    let table = JointAssignmentTable::build(&psi, &[vec!["a"], vec!["b"], vec!["c"]], 0.0).unwrap();
    assert_eq!(table.sample(500, 5), table.sample(500, 5));
    assert_ne!(table.sample(500, 5), table.sample(500, 6));
}

#[test]
fn zero_hamiltonian_changes_nothing() {
    let rho = random_density(&TRI, 3, 20);
    let out = evolve_closed(&rho, &CMatrix::zeros(12, 12), 3.7, 1.0).unwrap();
    assert!(max_abs_diff(out.matrix(), rho.matrix()) <= 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn joint_table_is_a_distribution_with_consistent_marginals(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = random_density(&TRI, rank, seed);
        let parts = [vec!["a"], vec!["b"], vec!["c"]];
        let table = JointAssignmentTable::build(&rho, &parts, DEFAULT_DEGENERACY_TOL).unwrap();
        prop_assert!(table.probabilities.iter().all(|&p| p >= -1e-14));
        prop_assert!((table.total() - 1.0).abs() <= 1e-10);
        for (s, cands) in table.candidates.iter().enumerate() {
            let mut marginal = vec![0.0; cands.len()];
            for (flat, p) in table.probabilities.iter().enumerate() {
                marginal[table.index_of(flat)[s]] += p;
            }
            for (m, cand) in marginal.iter().zip(cands) {
                prop_assert!((m - cand.probability).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn complements_of_a_pure_universe_are_schmidt_partners(seed in any::<u64>()) {
        let psi = random_pure(&TRI, seed);
        let table = JointAssignmentTable::build(&psi, &[vec!["b"], vec!["a", "c"]], DEFAULT_DEGENERACY_TOL).unwrap();
        let nb = table.candidates[0].len();
        for (flat, p) in table.probabilities.iter().enumerate() {
            let idx = table.index_of(flat);
            let (x, y) = (&table.candidates[0][idx[0]], &table.candidates[1][idx[1]]);
            if idx[0] == idx[1] && idx[0] < nb {
                prop_assert!((p - x.probability).abs() <= 1e-10);
                prop_assert!((x.eigenvalue - y.eigenvalue).abs() <= 1e-10);
            } else {
                prop_assert!(p.abs() <= 1e-12, "{:?} carries {:e}", idx, p);
            }
        }
    }

    #[test]
    fn candidates_ignore_operations_on_the_complement(seed in any::<u64>()) {
        let psi = random_pure(&TRI, seed);
        let moved = psi.apply_unitary(&random_unitary(4, seed ^ 3), &["a", "c"]).unwrap();
        let before = self_state_candidates(&psi, &["b"], DEFAULT_DEGENERACY_TOL).unwrap();
        let after = self_state_candidates(&moved, &["b"], DEFAULT_DEGENERACY_TOL).unwrap();
        prop_assert_eq!(before.len(), after.len());
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x.probability - y.probability).abs() <= 1e-10);
            prop_assert!(max_abs_diff(&x.projector, &y.projector) <= 1e-10);
        }
    }

    #[test]
    fn relational_state_contracts_the_rest(seed in any::<u64>()) {
        let rho = random_density(&TRI, 5, seed);
        let got = relational_state(&rho, &["c", "a"]).unwrap();
        let m = rho.matrix();
        let mut want = CMatrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                let (a1, c1, a2, c2) = (i / 2, i % 2, j / 2, j % 2);
                for b in 0..3 {
                    want[(i, j)] += m[(a1 * 6 + b * 2 + c1, a2 * 6 + b * 2 + c2)];
                }
            }
        }
        prop_assert!(max_abs_diff(got.matrix(), &want) <= 1e-12);
    }

    #[test]
    fn closed_evolution_is_a_group(seed in any::<u64>(), t1 in -3.0f64..3.0, t2 in -3.0f64..3.0) {
        let rho = random_density(&TRI, 3, seed);
        let h = random_hermitian(12, seed ^ 5);
        let stepwise = evolve_closed(&evolve_closed(&rho, &h, t1, 1.3).unwrap(), &h, t2, 1.3).unwrap();
        let direct = evolve_closed(&rho, &h, t1 + t2, 1.3).unwrap();
        prop_assert!(max_abs_diff(stepwise.matrix(), direct.matrix()) <= 1e-10);
        let (v0, _) = hermitian_eigen(rho.matrix());
        let (v1, _) = hermitian_eigen(direct.matrix());
        for (x, y) in v0.iter().zip(&v1) {
            prop_assert!((x - y).abs() <= 1e-11);
        }
    }
}

#[test]
fn reduced_and_self_candidates_agree_for_mixed_universes() {
    let rho = random_density(&TRI, 2, 21);
    let pos = rho.space().positions(&["a", "b"]).unwrap();
    let reduced = rho.reduced(&pos);
    let cands = self_state_candidates(&rho, &["a", "b"], DEFAULT_DEGENERACY_TOL).unwrap();
    let rebuilt = cands
        .iter()
        .fold(CMatrix::zeros(6, 6), |acc, c| acc + c.projector.scale(c.eigenvalue));
    assert!(max_abs_diff(&rebuilt, reduced.matrix()) <= 1e-12);
}
