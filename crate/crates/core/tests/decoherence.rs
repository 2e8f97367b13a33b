mod common;

use common::*;
use modal_core::decoherence::{
    all_offdiag_blocks, branch_overlap, definiteness_check, evolve_sector, haar_overlap, multi_display_model,
    multi_display_state, reduced_display, scaling_experiment, DisplayState, ScalingParams, SectorModel,
    DEFINITENESS_FRACTION,
};
use modal_core::linalg::{c, evolution_operator, max_abs_diff, CVector};

fn first_basis(d: usize) -> CVector {
    let mut xi = CVector::zeros(d);
    xi[0] = c(1.0, 0.0);
    xi
}

#[test]
fn sector_evolution_matches_the_full_exponential() {
    let (dims, d) = (vec![2, 2], 4);
    let model = SectorModel::random(dims.clone(), d, 1.0, 77).unwrap();
    let phi = DisplayState::new(vec![
        gaussian_vector(2, &mut rng(1)).normalize().scale(0.6),
        gaussian_vector(2, &mut rng(2)).normalize().scale(0.8),
    ])
    .unwrap();
    let xi = gaussian_vector(d, &mut rng(3)).normalize();
    let t = 3.3;
    let got = evolve_sector(&model, &phi, &xi, t, 1.0).unwrap();
    let display = CVector::from_iterator(4, phi.sectors.iter().flat_map(|v| v.iter().copied()));
    let want = evolution_operator(&model.full_hamiltonian(), t, 1.0) * display.kronecker(&xi);
    let diff = (&got.amplitudes - &want).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(diff <= 1e-10, "{diff:e}");
}

#[test]
fn coherences_are_environment_overlaps() {
    let model = SectorModel::two_sector(3, 2, 16, 1.0, 5).unwrap();
    let state = evolve_sector(&model, &DisplayState::uniform(&[3, 2]), &first_basis(16), 7.0, 1.0).unwrap();
    let rho = reduced_display(&state);
    let off = [0, 3];
    let mut worst: f64 = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            for j in 0..[3, 2][a] {
                for k in 0..[3, 2][b] {
                    let z = branch_overlap(&state, a, j, b, k);
                    worst = worst.max((rho[(off[a] + j, off[b] + k)] - z).norm());
                }
            }
        }
    }
    assert!(worst <= 1e-11, "{worst:e}");
}

#[test]
fn identical_sector_couplings_keep_full_coherence() {
    let (k, d) = (2, 8);
    let h = random_hermitian(k * d, 9);
    let model = SectorModel::explicit(vec![k, k], d, vec![h.clone(), h]).unwrap();
    let phi = DisplayState::uniform(&[k, k]);
    let state = evolve_sector(&model, &phi, &first_basis(d), 5.0, 1.0).unwrap();
    let rho = reduced_display(&state);
    // tracing out the level inside each sector leaves a pure sector qubit
    let sector = |a: usize, b: usize| {
        (0..k)
            .map(|j| rho[(a * k + j, b * k + j)])
            .sum::<modal_core::linalg::C64>()
    };
    assert!((sector(0, 1).norm() - 0.5).abs() <= 1e-12);
    assert!((sector(0, 0).re - 0.5).abs() <= 1e-12);
    for j in 0..k {
        for l in 0..k {
            assert!((rho[(j, k + l)] - rho[(j, l)]).norm() <= 1e-12);
        }
    }
}

#[test]
fn one_display_is_the_two_sector_model() {
    let a = multi_display_model(1, (3, 2), 8, 0.7, 41).unwrap();
    let b = SectorModel::two_sector(3, 2, 8, 0.7, 41).unwrap();
    assert_eq!(a.sector_dims(), b.sector_dims());
    assert!(max_abs_diff(&a.full_hamiltonian(), &b.full_hamiltonian()) == 0.0);
    let pa = multi_display_state(1, (3, 2), 0.1).unwrap();
    let pb = DisplayState::ready_dominated(&[3, 2], 0.1).unwrap();
    assert_eq!(pa, pb);
}

#[test]
fn two_displays_lose_every_cross_sector_coherence() {
    let (d, eps) = (256, 5e-4);
    let model = multi_display_model(2, (1, 1), d, 1.0, 3).unwrap();
    let phi = multi_display_state(2, (1, 1), eps).unwrap();
    let state = evolve_sector(&model, &phi, &first_basis(d), 20.0, 1.0).unwrap();
    let dims = model.sector_dims().to_vec();
    let rho = reduced_display(&state);
    let k: usize = dims.iter().sum();
    let threshold = DEFINITENESS_FRACTION * 2.0 / (k * k) as f64;
    let blocks = all_offdiag_blocks(&rho, &dims);
    assert_eq!(blocks.len(), 6);
    for b in &blocks {
        assert!(
            b.max_abs <= threshold,
            "{:?}: {:e} > {threshold:e}",
            b.sectors,
            b.max_abs
        );
    }
}

#[test]
fn sector_populations_are_conserved() {
    let dims = [3, 5];
    let model = SectorModel::random(dims.to_vec(), 32, 1.3, 8).unwrap();
    let phi = DisplayState::with_weights(&dims, &[0.3, 0.7]).unwrap();
    let state = evolve_sector(&model, &phi, &gaussian_vector(32, &mut rng(4)).normalize(), 11.0, 1.0).unwrap();
    let pops = state.sector_populations();
    assert!((pops[0] - 0.3).abs() <= 1e-12);
    assert!((pops[1] - 0.7).abs() <= 1e-12);
}

#[test]
fn large_environments_make_displays_definite_and_small_ones_do_not() {
    let dims = [4, 4];
    let big = {
        let model = SectorModel::two_sector(4, 4, 256, 1.0, 12).unwrap();
        let phi = DisplayState::ready_dominated(&dims, 0.005).unwrap();
        let s = evolve_sector(&model, &phi, &first_basis(256), 20.0, 1.0).unwrap();
        definiteness_check(&reduced_display(&s), &dims)
    };
    let small = {
        let model = SectorModel::two_sector(4, 4, 2, 1.0, 12).unwrap();
        let s = evolve_sector(&model, &DisplayState::uniform(&dims), &first_basis(2), 20.0, 1.0).unwrap();
        definiteness_check(&reduced_display(&s), &dims)
    };
    println!(
        "large: {:e} vs {:e}, purities {:?}",
        big.offdiag_max, big.threshold, big.sector_purities
    );
    println!("small: {:e}, purities {:?}", small.offdiag_max, small.sector_purities);
    assert!(big.definite);
    assert!(big.sector_purities.iter().all(|p| *p >= 0.99));
    assert!(!small.definite);
    assert!(small.sector_purities.iter().copied().fold(1.0, f64::min) <= 0.9);
}

#[test]
fn random_overlaps_fall_as_one_over_dimension() {
    for (i, d) in [8, 64, 512].into_iter().enumerate() {
        let (mean, sem) = haar_overlap(d, 4000, 100 + i as u64);
        let want = 1.0 / d as f64;
        assert!((mean - want).abs() <= 4.0 * sem, "D={d}: {mean} vs {want} (sem {sem})");
    }
}

#[test]
fn disjoint_seeds_agree_within_sampling_error() {
    let params = |seed| ScalingParams {
        env_dims: vec![16, 32, 64],
        trials: 20,
        k1: 1,
        k2: 1,
        beta: 1.0,
        t: 20.0,
        hbar: 1.0,
        seed,
    };
    let a = scaling_experiment(&params(1)).unwrap();
    let b = scaling_experiment(&params(2)).unwrap();
    for (p, q) in a.points.iter().zip(&b.points) {
        let se = (p.sem_max.powi(2) + q.sem_max.powi(2)).sqrt();
        assert!(
            (p.mean_max - q.mean_max).abs() <= 3.0 * se,
            "D={}: {} vs {}",
            p.env_dim,
            p.mean_max,
            q.mean_max
        );
    }
    assert!(a.exponent_max < 0.0 && b.exponent_max < 0.0);
}
