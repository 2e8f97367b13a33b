//! Several displays looking at one object, and the two-particle EPR setup.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ModalError, Result};
use crate::hilbert::{CompositeSpace, DensityOperator, PureState, QuantumState, DEFAULT_DEGENERACY_TOL};
use crate::linalg::{c, max_abs_diff, outer, CMatrix, CVector, C64, ZERO};
use crate::photon::{ObjectDensity, TransferFunctions};
use crate::relational::{complement_state, relational_state, self_state_candidates, Candidate};

/// Joint outcome probabilities `P(j, k)` of two displays.
#[derive(Debug, Clone, PartialEq)]
pub struct JointOutcomeTable {
    pub p: DMatrix<f64>,
}

impl JointOutcomeTable {
    /// Clamps entries in `[-1e-12, 0)` to zero; more negative entries or a
    /// total off by more than `1e-9` are invariant violations.
    pub fn new(mut p: DMatrix<f64>) -> Result<Self> {
        for v in p.iter_mut() {
            if !v.is_finite() {
                return Err(ModalError::Invariant(format!("joint probability {v} is not finite")));
            }
            if *v < -1e-12 {
                return Err(ModalError::Invariant(format!("joint probability {v:.3e} is negative")));
            }
            *v = v.max(0.0);
        }
        let total = p.sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(ModalError::Invariant(format!("joint probabilities sum to {total:.12}")));
        }
        Ok(Self { p })
    }

    pub fn total(&self) -> f64 {
        self.p.sum()
    }

    /// `Σ_k P(j, k)`.
    pub fn first_marginal(&self) -> Vec<f64> {
        (0..self.p.nrows()).map(|j| self.p.row(j).sum()).collect()
    }

    /// `Σ_j P(j, k)`.
    pub fn second_marginal(&self) -> Vec<f64> {
        (0..self.p.ncols()).map(|k| self.p.column(k).sum()).collect()
    }
}

/// `Σ_{|j-k| ≤ w} P(j, k)`.
pub fn agreement_mass(table: &JointOutcomeTable, w: usize) -> f64 {
    let mut acc = 0.0;
    for j in 0..table.p.nrows() {
        for k in 0..table.p.ncols() {
            if j.abs_diff(k) <= w {
                acc += table.p[(j, k)];
            }
        }
    }
    acc.clamp(0.0, 1.0)
}

/// `P(j, k) = Σ_m ρ[m][m] |c1_j(x_m)|² |c2_k(x_m)|²`.
pub fn two_device_joint(
    rho: &ObjectDensity,
    c1: &TransferFunctions,
    c2: &TransferFunctions,
) -> Result<JointOutcomeTable> {
    if c1.grid != c2.grid || rho.grid.len() != c1.n_points() {
        return Err(ModalError::DimensionMismatch(
            "both devices and the object must share one grid".into(),
        ));
    }
    let diag = rho.diagonal();
    let (n1, n2) = (c1.n_blocks(), c2.n_blocks());
    let mut p = DMatrix::<f64>::zeros(n1, n2);
    for (m, w) in diag.iter().enumerate() {
        for j in 0..n1 {
            let a = w * c1.c[(j, m)].norm_sqr();
            if a == 0.0 {
                continue;
            }
            for k in 0..n2 {
                p[(j, k)] += a * c2.c[(k, m)].norm_sqr();
            }
        }
    }
    JointOutcomeTable::new(p)
}

/// An orthonormal qubit basis `{|b_0>, |b_1>}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitBasis {
    pub label: String,
    pub vectors: [CVector; 2],
}

impl QubitBasis {
    /// Eigenbasis of `n·σ` for the Bloch direction `(θ, φ)`.
    pub fn bloch(label: impl Into<String>, theta: f64, phi: f64) -> Self {
        let (s, co) = ((theta / 2.0).sin(), (theta / 2.0).cos());
        let e = C64::from_polar(1.0, phi);
        Self {
            label: label.into(),
            vectors: [
                CVector::from_vec(vec![c(co, 0.0), e * s]),
                CVector::from_vec(vec![c(s, 0.0), -e * co]),
            ],
        }
    }

    pub fn z() -> Self {
        Self::bloch("z", 0.0, 0.0)
    }

    pub fn x() -> Self {
        Self::bloch("x", std::f64::consts::FRAC_PI_2, 0.0)
    }

    pub fn y() -> Self {
        Self::bloch("y", std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2)
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "x" => Some(Self::x()),
            "y" => Some(Self::y()),
            "z" => Some(Self::z()),
            _ => None,
        }
    }
}

/// Particle 2 as seen once the pointer shows reading `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct EprOutcome {
    pub reading: usize,
    pub probability: f64,
    /// State of the pair with respect to everything but the pointer.
    pub pair_state: DensityOperator,
    /// State of particle 2 with respect to the pair.
    pub particle2: DensityOperator,
    /// The singlet partner of `|b_k>`.
    pub partner: CVector,
    pub partner_fidelity: f64,
    pub particle2_purity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EprReport {
    pub basis: QubitBasis,
    pub reduced_rho2_before: CMatrix,
    pub reduced_rho2_after: CMatrix,
    /// Largest entrywise change of particle 2's own reduced state.
    pub no_signal_deviation: f64,
    /// Candidates of the pair with respect to itself before the measurement.
    pub pair_candidates_before: Vec<Candidate>,
    /// State of particle 2 with respect to the pair before the measurement.
    pub relational_before: DensityOperator,
    /// Candidates of particle 2 with respect to itself.
    pub particle2_candidates: Vec<Candidate>,
    /// Candidates of the pointer after the measurement.
    pub pointer_candidates: Vec<Candidate>,
    pub outcomes: Vec<EprOutcome>,
    /// Reading drawn from the outcome probabilities with the given seed.
    pub sampled_reading: usize,
}

/// Singlet `(|01> - |10>)/√2` on `p1, p2` with a two-state pointer in `|0>`.
pub fn epr_universe() -> Result<PureState> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let space = CompositeSpace::from_dims(&[("p1", 2), ("p2", 2), ("pointer", 2)])?;
    let mut amps = CVector::zeros(8);
    // |p1 p2 pointer> = |0 1 0> and |1 0 0>
    amps[2] = c(s, 0.0);
    amps[4] = c(-s, 0.0);
    PureState::new(space, amps)
}

/// `Σ_k |b_k><b_k| ⊗ X^k` on `(p1, pointer)`: the pointer moves by the index
/// of the basis state particle 1 is found in.
pub fn measurement_unitary(basis: &QubitBasis) -> CMatrix {
    let x = CMatrix::from_row_slice(2, 2, &[ZERO, c(1.0, 0.0), c(1.0, 0.0), ZERO]);
    let id = CMatrix::identity(2, 2);
    let p0 = outer(&basis.vectors[0], &basis.vectors[0]);
    let p1 = outer(&basis.vectors[1], &basis.vectors[1]);
    p0.kronecker(&id) + p1.kronecker(&x)
}

pub fn epr_scenario(basis: &QubitBasis, seed: u64) -> Result<EprReport> {
    let before = epr_universe()?;
    let after = before.apply_unitary(&measurement_unitary(basis), &["p1", "pointer"])?;

    let rho2_before = before.partial_trace(&["p2"])?;
    let rho2_after = after.partial_trace(&["p2"])?;
    let no_signal_deviation = max_abs_diff(rho2_before.matrix(), rho2_after.matrix());

    let pair_candidates_before = self_state_candidates(&before, &["p1", "p2"], DEFAULT_DEGENERACY_TOL)?;
    let top = &pair_candidates_before[0];
    let pair_self = DensityOperator::new(
        before.space().sub_space(&before.space().positions(&["p1", "p2"])?),
        top.normalized(),
    )?;
    let relational_before = relational_state(&pair_self, &["p2"])?;

    let particle2_candidates = self_state_candidates(&after, &["p2"], DEFAULT_DEGENERACY_TOL)?;
    let pointer_candidates = self_state_candidates(&after, &["pointer"], DEFAULT_DEGENERACY_TOL)?;

    // The pointer's reduced state is exactly degenerate; its reading basis
    // picks the projectors within the degenerate candidate.
    let mut outcomes = Vec::with_capacity(2);
    for reading in 0..2 {
        let mut proj = CMatrix::zeros(2, 2);
        proj[(reading, reading)] = c(1.0, 0.0);
        let pos = after.space().positions(&["pointer"])?;
        let probability = after.local_expectation(&[(pos, &proj)]).re;
        let pair_state = complement_state(&after, &["pointer"], &proj)?;
        let particle2 = relational_state(&pair_state, &["p2"])?;
        let partner = singlet_partner(&basis.vectors[reading]);
        let partner_fidelity = partner.dotc(&(particle2.matrix() * &partner)).re;
        outcomes.push(EprOutcome {
            reading,
            probability,
            particle2_purity: particle2.purity(),
            pair_state,
            particle2,
            partner,
            partner_fidelity,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: f64 = rng.random();
    let sampled_reading = usize::from(u >= outcomes[0].probability);

    Ok(EprReport {
        basis: basis.clone(),
        reduced_rho2_before: rho2_before.into_matrix(),
        reduced_rho2_after: rho2_after.into_matrix(),
        no_signal_deviation,
        pair_candidates_before,
        relational_before,
        particle2_candidates,
        pointer_candidates,
        outcomes,
        sampled_reading,
    })
}

/// The state particle 2 must be in when particle 1 is in `v`, for a singlet:
/// `iσ_y v̄`, i.e. `(a, b) ↦ (-b̄, ā)`.
pub fn singlet_partner(v: &CVector) -> CVector {
    CVector::from_vec(vec![-v[1].conj(), v[0].conj()])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agreement_of_simple_tables() {
        let diag = JointOutcomeTable::new(DMatrix::from_diagonal_element(4, 4, 0.25)).unwrap();
        assert!((agreement_mass(&diag, 0) - 1.0).abs() < 1e-15);
        let flat = JointOutcomeTable::new(DMatrix::from_element(4, 4, 1.0 / 16.0)).unwrap();
        assert!((agreement_mass(&flat, 0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn negative_entries_rejected() {
        let mut p = DMatrix::from_diagonal_element(2, 2, 0.5);
        p[(0, 1)] = -1e-6;
        p[(0, 0)] += 1e-6;
        assert!(matches!(JointOutcomeTable::new(p), Err(ModalError::Invariant(_))));
    }

    #[test]
    fn z_basis_partners() {
        let r = epr_scenario(&QubitBasis::z(), 0).unwrap();
        assert!(r.no_signal_deviation <= 1e-12);
        for o in &r.outcomes {
            assert!((o.probability - 0.5).abs() < 1e-12);
            assert!((o.partner_fidelity - 1.0).abs() < 1e-12);
        }
        // reading 0 means particle 1 up, so particle 2 is down
        assert!((r.outcomes[0].particle2.matrix()[(1, 1)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partner_is_orthogonal_in_real_bases() {
        let b = QubitBasis::x();
        let p = singlet_partner(&b.vectors[0]);
        assert!((b.vectors[1].dotc(&p).norm() - 1.0).abs() < 1e-14);
    }
}
