//! Displays coupled to a large environment through sector-preserving
//! interactions, and how fast the coherences between sectors disappear.
//!
//! Display basis states `|n, j>` are grouped into sectors `n`. The full space
//! is display ⊗ environment with the display index most significant, so each
//! sector occupies a contiguous block of `K_n · D` amplitudes.

mod chebyshev;

pub use chebyshev::{bessel_j_sequence, chebyshev_propagate, spectral_bounds, DenseHermitian, HermitianOp, Propagated};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{ModalError, Result};
use crate::hilbert::spectral_resolution;
use crate::hilbert::DEFAULT_DEGENERACY_TOL;
use crate::linalg::{c, hermiticity_residual, CMatrix, CVector, C64, ZERO};

/// Largest `Σ K_n · D` accepted for multi-display models.
pub const MAX_MULTI_DIM: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
enum Couplings {
    /// Gaussian Hermitian sector matrices drawn on demand from `seed`.
    Random { beta: f64, seed: u64 },
    /// Caller-supplied sector matrices.
    Explicit(Vec<CMatrix>),
}

/// Sector dimensions, environment dimension and the couplings
/// `Σ_{jk} |n,j><n,k| ⊗ B^(n)_{jk}` within each sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorModel {
    dims: Vec<usize>,
    env_dim: usize,
    couplings: Couplings,
}

impl SectorModel {
    /// Two sectors of dimensions `k1`, `k2`.
    pub fn two_sector(k1: usize, k2: usize, env_dim: usize, beta: f64, seed: u64) -> Result<Self> {
        Self::random(vec![k1, k2], env_dim, beta, seed)
    }

    /// Independent Gaussian Hermitian matrices on each `(K_n·D)`-dimensional
    /// sector; entry variance `β²/D`.
    pub fn random(dims: Vec<usize>, env_dim: usize, beta: f64, seed: u64) -> Result<Self> {
        check_dims(&dims, env_dim)?;
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(ModalError::InvalidParameter(format!(
                "coupling scale beta must be positive, got {beta}"
            )));
        }
        Ok(Self {
            dims,
            env_dim,
            couplings: Couplings::Random { beta, seed },
        })
    }

    /// Sector matrices given directly; each must be Hermitian.
    pub fn explicit(dims: Vec<usize>, env_dim: usize, hamiltonians: Vec<CMatrix>) -> Result<Self> {
        check_dims(&dims, env_dim)?;
        if hamiltonians.len() != dims.len() {
            return Err(ModalError::DimensionMismatch(format!(
                "{} sector matrices for {} sectors",
                hamiltonians.len(),
                dims.len()
            )));
        }
        for (h, k) in hamiltonians.iter().zip(&dims) {
            let n = k * env_dim;
            if h.nrows() != n || h.ncols() != n {
                return Err(ModalError::DimensionMismatch(format!("sector matrix must be {n}x{n}")));
            }
            let r = hermiticity_residual(h);
            if r > 1e-10 {
                return Err(ModalError::NotHermitian(r));
            }
        }
        Ok(Self {
            dims,
            env_dim,
            couplings: Couplings::Explicit(hamiltonians),
        })
    }

    pub fn sector_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn env_dim(&self) -> usize {
        self.env_dim
    }

    pub fn n_sectors(&self) -> usize {
        self.dims.len()
    }

    /// Total display dimension `K = Σ K_n`.
    pub fn display_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn sector_offsets(&self) -> Vec<usize> {
        offsets(&self.dims)
    }

    /// Row-major `(K_n·D)²` coupling matrix of sector `n`.
    pub fn sector_matrix(&self, n: usize) -> DenseHermitian {
        let size = self.dims[n] * self.env_dim;
        match &self.couplings {
            Couplings::Explicit(hs) => DenseHermitian {
                n: size,
                data: hs[n].transpose().iter().copied().collect(),
            },
            Couplings::Random { beta, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(n as u64 + 1);
                let sd = beta / (self.env_dim as f64).sqrt();
                let diag = Normal::new(0.0, sd).expect("finite width");
                let off = Normal::new(0.0, sd * std::f64::consts::FRAC_1_SQRT_2).expect("finite width");
                let mut data = vec![ZERO; size * size];
                for i in 0..size {
                    data[i * size + i] = c(diag.sample(&mut rng), 0.0);
                    for j in (i + 1)..size {
                        let z = c(off.sample(&mut rng), off.sample(&mut rng));
                        data[i * size + j] = z;
                        data[j * size + i] = z.conj();
                    }
                }
                DenseHermitian { n: size, data }
            }
        }
    }

    /// `B^(n)_{jk}` as a `D × D` matrix.
    pub fn coupling_block(&self, n: usize, j: usize, k: usize) -> CMatrix {
        let h = self.sector_matrix(n);
        let d = self.env_dim;
        CMatrix::from_fn(d, d, |a, b| h.data[(j * d + a) * h.n + (k * d + b)])
    }

    /// The block-diagonal Hamiltonian on the whole display ⊗ environment space.
    pub fn full_hamiltonian(&self) -> CMatrix {
        let total = self.display_dim() * self.env_dim;
        let mut h = CMatrix::zeros(total, total);
        let mut start = 0;
        for n in 0..self.n_sectors() {
            let s = self.sector_matrix(n);
            for i in 0..s.n {
                for j in 0..s.n {
                    h[(start + i, start + j)] = s.data[i * s.n + j];
                }
            }
            start += s.n;
        }
        h
    }
}

fn check_dims(dims: &[usize], env_dim: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) || env_dim == 0 {
        return Err(ModalError::InvalidParameter(format!(
            "sector dimensions {dims:?} and environment dimension {env_dim} must all be >= 1"
        )));
    }
    Ok(())
}

fn offsets(dims: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(dims.len());
    let mut acc = 0;
    for d in dims {
        out.push(acc);
        acc += d;
    }
    out
}

/// Display amplitudes `c^(n)_l`, one vector per sector.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplayState {
    pub sectors: Vec<CVector>,
}

impl DisplayState {
    pub fn new(sectors: Vec<CVector>) -> Result<Self> {
        let norm: f64 = sectors.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(ModalError::InvalidState(format!("display state has norm {norm:.12}")));
        }
        Ok(Self { sectors })
    }

    /// Every amplitude equal to `1/√K`.
    pub fn uniform(dims: &[usize]) -> Self {
        let k: usize = dims.iter().sum();
        let a = c(1.0 / (k as f64).sqrt(), 0.0);
        Self {
            sectors: dims.iter().map(|&d| CVector::from_element(d, a)).collect(),
        }
    }

    /// Sector weights `w_n`, spread evenly over the levels of each sector.
    pub fn with_weights(dims: &[usize], weights: &[f64]) -> Result<Self> {
        if dims.len() != weights.len() {
            return Err(ModalError::DimensionMismatch(
                "one weight per sector is required".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| *w < 0.0) || !(total > 0.0) {
            return Err(ModalError::InvalidParameter(
                "sector weights must be nonnegative and not all zero".into(),
            ));
        }
        Ok(Self {
            sectors: dims
                .iter()
                .zip(weights)
                .map(|(&d, w)| CVector::from_element(d, c((w / total / d as f64).sqrt(), 0.0)))
                .collect(),
        })
    }

    /// A display almost surely still in its ready sector: weight `1 - ε²` on
    /// sector 0 and `ε²` on sector 1.
    pub fn ready_dominated(dims: &[usize], eps: f64) -> Result<Self> {
        if dims.len() != 2 {
            return Err(ModalError::InvalidParameter(
                "ready-dominated state needs exactly two sectors".into(),
            ));
        }
        if !(0.0..1.0).contains(&eps) {
            return Err(ModalError::InvalidParameter(format!(
                "excited amplitude must lie in [0, 1), got {eps}"
            )));
        }
        Self::with_weights(dims, &[1.0 - eps * eps, eps * eps])
    }

    pub fn dims(&self) -> Vec<usize> {
        self.sectors.iter().map(|v| v.len()).collect()
    }
}

/// A pure display ⊗ environment state, display index most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorState {
    pub dims: Vec<usize>,
    pub env_dim: usize,
    pub amplitudes: CVector,
}

impl SectorState {
    /// `|φ> ⊗ |ξ>`.
    pub fn product(phi: &DisplayState, xi: &CVector) -> Result<Self> {
        let dims = phi.dims();
        let d = xi.len();
        if (xi.norm() - 1.0).abs() > 1e-10 {
            return Err(ModalError::InvalidState(format!(
                "environment state has norm {:.12}",
                xi.norm()
            )));
        }
        let all = CVector::from_iterator(dims.iter().sum(), phi.sectors.iter().flat_map(|v| v.iter().copied()));
        Ok(Self {
            dims,
            env_dim: d,
            amplitudes: all.kronecker(xi),
        })
    }

    fn sector_range(&self, n: usize) -> std::ops::Range<usize> {
        let off = offsets(&self.dims)[n] * self.env_dim;
        off..off + self.dims[n] * self.env_dim
    }

    /// `Tr ρ^{nn}`.
    pub fn sector_populations(&self) -> Vec<f64> {
        (0..self.dims.len())
            .map(|n| self.amplitudes.rows_range(self.sector_range(n)).norm_squared())
            .collect()
    }

    /// Environment state correlated with display level `(n, j)`:
    /// `|χ^(n)_j> = (<n,j| ⊗ I) |ψ>`.
    pub fn branch(&self, n: usize, j: usize) -> CVector {
        let start = (offsets(&self.dims)[n] + j) * self.env_dim;
        self.amplitudes.rows_range(start..start + self.env_dim).into_owned()
    }
}

/// Evolves `φ ⊗ ξ` for time `t`, sector by sector.
pub fn evolve_sector(model: &SectorModel, phi: &DisplayState, xi: &CVector, t: f64, hbar: f64) -> Result<SectorState> {
    if phi.dims() != model.sector_dims() || xi.len() != model.env_dim() {
        return Err(ModalError::DimensionMismatch(format!(
            "state with sectors {:?} and environment {} does not fit the model ({:?}, {})",
            phi.dims(),
            xi.len(),
            model.sector_dims(),
            model.env_dim()
        )));
    }
    let mut state = SectorState::product(phi, xi)?;
    if t == 0.0 {
        return Ok(state);
    }
    for n in 0..model.n_sectors() {
        let range = state.sector_range(n);
        let v: CVector = state.amplitudes.rows_range(range.clone()).into_owned();
        if v.norm_squared() == 0.0 {
            continue;
        }
        let h = model.sector_matrix(n);
        let out = chebyshev_propagate(&h, &v, t, hbar)?;
        state.amplitudes.rows_range_mut(range).copy_from(&out.state);
    }
    let drift = (state.amplitudes.norm() - 1.0).abs();
    if drift > 1e-9 {
        return Err(ModalError::Invariant(format!(
            "evolution changed the norm by {drift:.3e}"
        )));
    }
    Ok(state)
}

/// Reduced density matrix of the displays, `Tr_env |ψ><ψ|`.
pub fn reduced_display(state: &SectorState) -> CMatrix {
    let k: usize = state.dims.iter().sum();
    let d = state.env_dim;
    let a = CMatrix::from_fn(k, d, |i, e| state.amplitudes[i * d + e]);
    &a * a.adjoint()
}

/// One off-diagonal sector block with its size measures.
#[derive(Debug, Clone, PartialEq)]
pub struct OffDiagonal {
    pub sectors: (usize, usize),
    pub block: CMatrix,
    pub max_abs: f64,
    pub frobenius: f64,
}

/// Block `ρ^{ab}` of a display density split into sectors `dims`.
pub fn offdiag_block(rho: &CMatrix, dims: &[usize], a: usize, b: usize) -> OffDiagonal {
    let off = offsets(dims);
    let block = rho.view((off[a], off[b]), (dims[a], dims[b])).into_owned();
    let max_abs = block.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let frobenius = block.norm();
    OffDiagonal {
        sectors: (a, b),
        block,
        max_abs,
        frobenius,
    }
}

/// Every block `ρ^{ab}` with `a < b`.
pub fn all_offdiag_blocks(rho: &CMatrix, dims: &[usize]) -> Vec<OffDiagonal> {
    let mut out = Vec::new();
    for a in 0..dims.len() {
        for b in (a + 1)..dims.len() {
            out.push(offdiag_block(rho, dims, a, b));
        }
    }
    out
}

/// Level-spacing comparison and per-eigenspace sector purities.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceReport {
    pub offdiag_max: f64,
    pub offdiag_fro: f64,
    /// For each merged eigenspace `P`, `max_n Tr(P Π_n) / rank P`.
    pub sector_purities: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    /// `2 / K²` for a `K`-dimensional display.
    pub level_spacing_ref: f64,
    pub threshold: f64,
    pub definite: bool,
}

/// Fraction of the level spacing the coherences must stay under.
pub const DEFINITENESS_FRACTION: f64 = 0.01;
pub const PURITY_THRESHOLD: f64 = 0.99;

pub fn definiteness_check(rho: &CMatrix, dims: &[usize]) -> DecoherenceReport {
    let k: usize = dims.iter().sum();
    let blocks = all_offdiag_blocks(rho, dims);
    let offdiag_max = blocks.iter().map(|b| b.max_abs).fold(0.0, f64::max);
    let offdiag_fro = blocks.iter().map(|b| b.frobenius.powi(2)).sum::<f64>().sqrt();
    let off = offsets(dims);
    let res = spectral_resolution(rho, DEFAULT_DEGENERACY_TOL);
    let mut sector_purities = Vec::with_capacity(res.len());
    let mut eigenvalues = Vec::with_capacity(res.len());
    for e in &res.entries {
        let rank = e.multiplicity() as f64;
        let best = (0..dims.len())
            .map(|n| (off[n]..off[n] + dims[n]).map(|i| e.projector[(i, i)].re).sum::<f64>() / rank)
            .fold(0.0, f64::max);
        sector_purities.push(best.clamp(0.0, 1.0));
        eigenvalues.push(e.eigenvalue);
    }
    let level_spacing_ref = 2.0 / (k * k) as f64;
    let threshold = DEFINITENESS_FRACTION * level_spacing_ref;
    let definite = offdiag_max <= threshold && sector_purities.iter().all(|p| *p >= PURITY_THRESHOLD);
    DecoherenceReport {
        offdiag_max,
        offdiag_fro,
        sector_purities,
        eigenvalues,
        level_spacing_ref,
        threshold,
        definite,
    }
}

/// `E[offdiag]` at one environment dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingPoint {
    pub env_dim: usize,
    pub mean_max: f64,
    pub sem_max: f64,
    pub mean_fro: f64,
    pub sem_fro: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingResult {
    pub points: Vec<ScalingPoint>,
    /// Least-squares slope of `ln E[offdiag_max]` against `ln D`.
    pub exponent_max: f64,
    pub exponent_fro: f64,
}

/// Parameters of a scaling sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingParams {
    pub env_dims: Vec<usize>,
    pub trials: usize,
    pub k1: usize,
    pub k2: usize,
    pub beta: f64,
    pub t: f64,
    pub hbar: f64,
    pub seed: u64,
}

/// Seed for trial `trial` at environment dimension `d`; distinct runs of the
/// sweep with different base seeds draw disjoint model streams.
pub fn trial_seed(base: u64, d: usize, trial: usize) -> u64 {
    let mut z = base ^ (d as u64).rotate_left(32) ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    // splitmix64 finaliser
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mean off-diagonal size against environment dimension, for equal-weight
/// display states and the environment starting in its first basis state.
pub fn scaling_experiment(p: &ScalingParams) -> Result<ScalingResult> {
    if p.trials < 5 {
        return Err(ModalError::InsufficientTrials(p.trials));
    }
    if p.env_dims.len() < 2 {
        return Err(ModalError::InvalidParameter(
            "scaling sweep needs at least two dimensions".into(),
        ));
    }
    let dims = [p.k1, p.k2];
    let phi = DisplayState::uniform(&dims);
    let mut points = Vec::with_capacity(p.env_dims.len());
    for &d in &p.env_dims {
        let mut xi = CVector::zeros(d);
        xi[0] = c(1.0, 0.0);
        let mut maxes = Vec::with_capacity(p.trials);
        let mut fros = Vec::with_capacity(p.trials);
        for trial in 0..p.trials {
            let model = SectorModel::two_sector(p.k1, p.k2, d, p.beta, trial_seed(p.seed, d, trial))?;
            let state = evolve_sector(&model, &phi, &xi, p.t, p.hbar)?;
            let ob = offdiag_block(&reduced_display(&state), &dims, 0, 1);
            maxes.push(ob.max_abs);
            fros.push(ob.frobenius);
        }
        let (mean_max, sem_max) = mean_sem(&maxes);
        let (mean_fro, sem_fro) = mean_sem(&fros);
        points.push(ScalingPoint {
            env_dim: d,
            mean_max,
            sem_max,
            mean_fro,
            sem_fro,
            trials: p.trials,
        });
    }
    let xs: Vec<f64> = points.iter().map(|q| (q.env_dim as f64).ln()).collect();
    let exponent_max = slope(&xs, &points.iter().map(|q| q.mean_max.ln()).collect::<Vec<_>>());
    let exponent_fro = slope(&xs, &points.iter().map(|q| q.mean_fro.ln()).collect::<Vec<_>>());
    Ok(ScalingResult {
        points,
        exponent_max,
        exponent_fro,
    })
}

pub fn mean_sem(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Ordinary least-squares slope.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Normalised complex Gaussian vector, i.e. a Haar-random unit vector.
pub fn haar_vector(d: usize, rng: &mut ChaCha8Rng) -> CVector {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let v = CVector::from_fn(d, |_, _| c(normal.sample(rng), normal.sample(rng)));
    let n = v.norm();
    v.unscale(n)
}

/// Monte Carlo estimate of `E|<a|b>|²` with its standard error.
pub fn haar_overlap(d: usize, trials: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<f64> = (0..trials)
        .map(|_| {
            let a = haar_vector(d, &mut rng);
            let b = haar_vector(d, &mut rng);
            a.dotc(&b).norm_sqr()
        })
        .collect();
    mean_sem(&samples)
}

/// `2^{n_R}` sectors for `n_R` displays, each with a ready sector of dimension
/// `per_display.0` and an excited one of dimension `per_display.1`. Sector
/// `s` is the binary word of which displays are excited, first display most
/// significant; its dimension is the product over displays.
pub fn multi_display_model(
    n_r: usize,
    per_display: (usize, usize),
    env_dim: usize,
    beta: f64,
    seed: u64,
) -> Result<SectorModel> {
    if n_r == 0 || n_r > 12 {
        return Err(ModalError::InvalidParameter(format!(
            "number of displays must be in 1..=12, got {n_r}"
        )));
    }
    let dims = multi_display_dims(n_r, per_display);
    let total: usize = dims.iter().sum::<usize>() * env_dim;
    if total > MAX_MULTI_DIM {
        return Err(ModalError::Infeasible(format!(
            "{} display levels times environment {env_dim} = {total} exceeds {MAX_MULTI_DIM}",
            dims.iter().sum::<usize>()
        )));
    }
    SectorModel::random(dims, env_dim, beta, seed)
}

pub fn multi_display_dims(n_r: usize, per_display: (usize, usize)) -> Vec<usize> {
    (0..1usize << n_r)
        .map(|s| {
            (0..n_r)
                .map(|i| {
                    if s >> (n_r - 1 - i) & 1 == 1 {
                        per_display.1
                    } else {
                        per_display.0
                    }
                })
                .product()
        })
        .collect()
}

/// Product of per-display ready-dominated states with excited amplitude `eps`.
pub fn multi_display_state(n_r: usize, per_display: (usize, usize), eps: f64) -> Result<DisplayState> {
    let weights: Vec<f64> = (0..1usize << n_r)
        .map(|s| {
            (0..n_r)
                .map(|i| {
                    if s >> (n_r - 1 - i) & 1 == 1 {
                        eps * eps
                    } else {
                        1.0 - eps * eps
                    }
                })
                .product()
        })
        .collect();
    DisplayState::with_weights(&multi_display_dims(n_r, per_display), &weights)
}

/// Coherence between display level `(a, j)` and `(b, k)` as the environment
/// overlap `<χ^(b)_k | χ^(a)_j>`.
pub fn branch_overlap(state: &SectorState, a: usize, j: usize, b: usize, k: usize) -> C64 {
    state.branch(b, k).dotc(&state.branch(a, j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn trivial_model_is_two_reals() {
        let m = SectorModel::two_sector(1, 1, 1, 1.0, 5).unwrap();
        for n in 0..2 {
            let h = m.sector_matrix(n);
            assert_eq!(h.n, 1);
            assert_eq!(h.data[0].im, 0.0);
        }
    }

    #[test]
    fn same_seed_same_model() {
        let a = SectorModel::two_sector(2, 3, 4, 0.7, 11).unwrap();
        let b = SectorModel::two_sector(2, 3, 4, 0.7, 11).unwrap();
        assert_eq!(a.full_hamiltonian(), b.full_hamiltonian());
        assert!(hermiticity_residual(&a.full_hamiltonian()) == 0.0);
    }

    #[test]
    fn level_spacing_for_four_levels() {
        let rho = CMatrix::identity(4, 4) * c(0.25, 0.0);
        let r = definiteness_check(&rho, &[2, 2]);
        assert_eq!(r.level_spacing_ref, 0.125);
        assert!(r.sector_purities.iter().all(|p| *p >= 0.5));
    }

    #[test]
    fn block_diagonal_density_is_pure_per_sector() {
        let mut rho = CMatrix::zeros(4, 4);
        rho[(0, 0)] = c(0.4, 0.0);
        rho[(1, 1)] = c(0.3, 0.0);
        rho[(2, 2)] = c(0.2, 0.0);
        rho[(3, 3)] = c(0.1, 0.0);
        let r = definiteness_check(&rho, &[2, 2]);
        assert!(r.sector_purities.iter().all(|p| (*p - 1.0).abs() < 1e-14));
        assert!(r.definite);
    }

    #[test]
    fn t_zero_leaves_product() {
        let m = SectorModel::two_sector(2, 2, 3, 1.0, 2).unwrap();
        let phi = DisplayState::uniform(&[2, 2]);
        let xi = CVector::from_element(3, c(1.0 / 3f64.sqrt(), 0.0));
        let s = evolve_sector(&m, &phi, &xi, 0.0, 1.0).unwrap();
        let rho = reduced_display(&s);
        let want = CMatrix::from_element(4, 4, c(0.25, 0.0));
        assert!(max_abs_diff(&rho, &want) < 1e-15);
    }

    #[test]
    fn multi_display_dims_are_products() {
        assert_eq!(multi_display_dims(1, (2, 3)), vec![2, 3]);
        assert_eq!(multi_display_dims(2, (2, 3)), vec![4, 6, 6, 9]);
        assert!(matches!(
            multi_display_model(2, (2, 2), 2048, 1.0, 0),
            Err(ModalError::Infeasible(_))
        ));
    }

    #[test]
    fn too_few_trials() {
        let p = ScalingParams {
            env_dims: vec![4, 8],
            trials: 4,
            k1: 1,
            k2: 1,
            beta: 1.0,
            t: 1.0,
            hbar: 1.0,
            seed: 0,
        };
        assert_eq!(scaling_experiment(&p), Err(ModalError::InsufficientTrials(4)));
    }
}
