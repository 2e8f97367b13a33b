#![allow(dead_code)]

use modal_core::hilbert::{CompositeSpace, DensityOperator, PureState};
use modal_core::linalg::{CMatrix, CVector, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gauss(r: &mut ChaCha8Rng) -> C64 {
    C64::new(StandardNormal.sample(r), StandardNormal.sample(r))
}

pub fn gaussian_vector(n: usize, r: &mut ChaCha8Rng) -> CVector {
    CVector::from_fn(n, |_, _| gauss(r))
}

pub fn gaussian_matrix(rows: usize, cols: usize, r: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gauss(r))
}

pub fn space(parts: &[(&str, usize)]) -> CompositeSpace {
    CompositeSpace::from_dims(parts).unwrap()
}

pub fn random_pure(parts: &[(&str, usize)], seed: u64) -> PureState {
    let s = space(parts);
    let v = gaussian_vector(s.dim(), &mut rng(seed));
    PureState::normalized(s, v).unwrap()
}

/// `A A† / Tr` with `A` of shape `dim × rank`.
pub fn random_density(parts: &[(&str, usize)], rank: usize, seed: u64) -> DensityOperator {
    let s = space(parts);
    let a = gaussian_matrix(s.dim(), rank, &mut rng(seed));
    let m = &a * a.adjoint();
    let tr = m.trace().re;
    DensityOperator::new(s, m.unscale(tr)).unwrap()
}

pub fn random_unitary(n: usize, seed: u64) -> CMatrix {
    gaussian_matrix(n, n, &mut rng(seed)).qr().q()
}

pub fn random_hermitian(n: usize, seed: u64) -> CMatrix {
    let a = gaussian_matrix(n, n, &mut rng(seed));
    (&a + a.adjoint()).scale(0.5)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
