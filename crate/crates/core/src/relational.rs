//! Assignment rules: which states a system may have with respect to itself,
//! what that implies for its parts, and how likely joint assignments are.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ModalError, Result};
use crate::hilbert::{DensityOperator, QuantumState, HERMITIAN_TOL};
use crate::linalg::{evolution_operator, hermiticity_residual, trace, CMatrix};

/// One possible state of a system with respect to itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    /// `λ · dim P`, the probability that this projector is the actual one.
    pub probability: f64,
    pub eigenvalue: f64,
    pub projector: CMatrix,
    pub multiplicity: usize,
}

impl Candidate {
    /// The candidate as a density operator, `P / dim P`.
    pub fn normalized(&self) -> CMatrix {
        self.projector.unscale(self.multiplicity as f64)
    }
}

/// A system together with the projector it is assigned.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub system: Vec<String>,
    pub projector: CMatrix,
}

impl Assignment {
    pub fn new<S: AsRef<str>>(system: &[S], projector: CMatrix) -> Self {
        Self {
            system: system.iter().map(|s| s.as_ref().to_string()).collect(),
            projector,
        }
    }
}

/// Spectral candidates of the reduced state of `a`, in descending eigenvalue
/// order.
pub fn self_state_candidates<U, S>(universe: &U, a: &[S], degeneracy_tol: f64) -> Result<Vec<Candidate>>
where
    U: QuantumState + ?Sized,
    S: AsRef<str>,
{
    let positions = universe.space().positions(a)?;
    let reduced = universe.reduced(&positions);
    Ok(reduced
        .spectral_resolution(degeneracy_tol)
        .entries
        .into_iter()
        .map(|e| Candidate {
            probability: e.weight(),
            eigenvalue: e.eigenvalue,
            multiplicity: e.multiplicity(),
            projector: e.projector,
        })
        .collect())
}

/// The state of `s` with respect to the larger system whose own state is
/// `self_state`: the partial trace over everything in that system but `s`.
pub fn relational_state<S: AsRef<str>>(self_state: &DensityOperator, s: &[S]) -> Result<DensityOperator> {
    for name in s {
        if !self_state.space().contains(name.as_ref()) {
            return Err(ModalError::NotContained(name.as_ref().to_string()));
        }
    }
    self_state.partial_trace(s)
}

/// State of everything outside `perspective`, given that `perspective` is
/// assigned `projector`: `Tr_P[(P ⊗ I) ρ (P ⊗ I)] / p`.
pub fn complement_state<U, S>(universe: &U, perspective: &[S], projector: &CMatrix) -> Result<DensityOperator>
where
    U: QuantumState + ?Sized,
    S: AsRef<str>,
{
    let space = universe.space();
    let positions = space.positions(perspective)?;
    let rest = space.complement_positions(&positions);
    if rest.is_empty() {
        return Err(ModalError::EmptySelection);
    }
    let names: Vec<&str> = rest.iter().map(|&i| space.subsystems()[i].name()).collect();
    conditional_state(universe, perspective, projector, &names)
}

/// Like [`complement_state`], but traced straight down to `keep`, which must
/// be disjoint from `perspective`.
pub fn conditional_state<U, S, K>(
    universe: &U,
    perspective: &[S],
    projector: &CMatrix,
    keep: &[K],
) -> Result<DensityOperator>
where
    U: QuantumState + ?Sized,
    S: AsRef<str>,
    K: AsRef<str>,
{
    let space = universe.space();
    let positions = space.positions(perspective)?;
    let keep_pos = space.positions(keep)?;
    if let Some(&p) = keep_pos.iter().find(|p| positions.contains(p)) {
        return Err(ModalError::OverlappingSystems(space.subsystems()[p].name().to_string()));
    }
    let m = universe.project_and_reduce(&positions, projector, &keep_pos);
    let p = trace(&m).re;
    if p <= 1e-14 {
        return Err(ModalError::ZeroProbabilityBranch(p));
    }
    DensityOperator::new(space.sub_space(&keep_pos), m.unscale(p))
}

/// `Tr(ρ Π_i P_i)` for assignments on pairwise disjoint systems.
pub fn joint_assignment_probability<U>(universe: &U, assignments: &[Assignment]) -> Result<f64>
where
    U: QuantumState + ?Sized,
{
    let space = universe.space();
    let mut taken: Vec<usize> = Vec::new();
    let mut ops = Vec::with_capacity(assignments.len());
    for a in assignments {
        let pos = space.positions(&a.system)?;
        if let Some(&clash) = pos.iter().find(|p| taken.contains(p)) {
            return Err(ModalError::OverlappingSystems(
                space.subsystems()[clash].name().to_string(),
            ));
        }
        let d: usize = pos.iter().map(|&p| space.subsystems()[p].dim()).product();
        if a.projector.nrows() != d || a.projector.ncols() != d {
            return Err(ModalError::DimensionMismatch(format!(
                "projector for {:?} must be {d}x{d}",
                a.system
            )));
        }
        taken.extend_from_slice(&pos);
        ops.push((pos, &a.projector));
    }
    let p = universe.local_expectation(&ops).re;
    if !(-1e-12..=1.0 + 1e-12).contains(&p) {
        return Err(ModalError::Invariant(format!(
            "joint probability {p:.6e} outside [0, 1]"
        )));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Joint probabilities over every combination of candidates of the systems
/// in `partition`. Row-major in the candidate indices, first system slowest.
#[derive(Debug, Clone)]
pub struct JointAssignmentTable {
    pub candidates: Vec<Vec<Candidate>>,
    pub probabilities: Vec<f64>,
}

impl JointAssignmentTable {
    pub fn build<U, S>(universe: &U, partition: &[Vec<S>], degeneracy_tol: f64) -> Result<Self>
    where
        U: QuantumState + ?Sized,
        S: AsRef<str>,
    {
        let space = universe.space();
        let mut seen: Vec<usize> = Vec::new();
        for sys in partition {
            for p in space.positions(sys)? {
                if seen.contains(&p) {
                    return Err(ModalError::OverlappingSystems(space.subsystems()[p].name().to_string()));
                }
                seen.push(p);
            }
        }
        let candidates = partition
            .iter()
            .map(|sys| self_state_candidates(universe, sys, degeneracy_tol))
            .collect::<Result<Vec<_>>>()?;
        let total: usize = candidates.iter().map(Vec::len).product();
        let mut probabilities = Vec::with_capacity(total);
        for flat in 0..total {
            let idx = unflatten(flat, &candidates);
            let assignments: Vec<Assignment> = partition
                .iter()
                .zip(&idx)
                .zip(&candidates)
                .map(|((sys, &i), cands)| Assignment::new(sys, cands[i].projector.clone()))
                .collect();
            probabilities.push(joint_assignment_probability(universe, &assignments)?);
        }
        Ok(Self {
            candidates,
            probabilities,
        })
    }

    pub fn index_of(&self, flat: usize) -> Vec<usize> {
        unflatten(flat, &self.candidates)
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Draws `n` joint assignments by inverse CDF over the table.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<Vec<usize>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let total = self.total();
        let mut cdf = Vec::with_capacity(self.probabilities.len());
        let mut acc = 0.0;
        for p in &self.probabilities {
            acc += p / total;
            cdf.push(acc);
        }
        (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                let flat = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                self.index_of(flat)
            })
            .collect()
    }
}

fn unflatten(mut flat: usize, candidates: &[Vec<Candidate>]) -> Vec<usize> {
    let mut idx = vec![0; candidates.len()];
    for (slot, cands) in idx.iter_mut().zip(candidates).rev() {
        *slot = flat % cands.len();
        flat /= cands.len();
    }
    idx
}

/// One joint assignment for the systems in `partition`, as candidate indices.
pub fn sample_assignment<U, S>(universe: &U, partition: &[Vec<S>], degeneracy_tol: f64, seed: u64) -> Result<Vec<usize>>
where
    U: QuantumState + ?Sized,
    S: AsRef<str>,
{
    let table = JointAssignmentTable::build(universe, partition, degeneracy_tol)?;
    Ok(table.sample(1, seed).pop().expect("one sample"))
}

/// `e^{-iHt/ħ} ρ e^{iHt/ħ}`.
pub fn evolve_closed(rho: &DensityOperator, h: &CMatrix, t: f64, hbar: f64) -> Result<DensityOperator> {
    if h.nrows() != rho.dim() || h.ncols() != rho.dim() {
        return Err(ModalError::DimensionMismatch(format!(
            "Hamiltonian is {}x{}, state has dimension {}",
            h.nrows(),
            h.ncols(),
            rho.dim()
        )));
    }
    let res = hermiticity_residual(h);
    if res > HERMITIAN_TOL {
        return Err(ModalError::NotHermitian(res));
    }
    let u = evolution_operator(h, t, hbar);
    let m = &u * rho.matrix() * u.adjoint();
    DensityOperator::new(rho.space().clone(), m)
}
