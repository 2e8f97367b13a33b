use crate::error::{ModalError, Result};
use crate::linalg::{c, hermiticity_residual, is_psd, trace, unitarity_residual, CMatrix, CVector, C64, ZERO};

use super::space::{CompositeSpace, IndexSplit};
use super::spectral::{spectral_resolution, SpectralResolution};

pub const NORM_TOL: f64 = 1e-10;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const UNITARY_TOL: f64 = 1e-10;

/// A normalised state vector on a composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    space: CompositeSpace,
    amps: CVector,
}

impl PureState {
    /// Wraps `amps`, rejecting vectors whose norm differs from one by more
    /// than `1e-10`.
    pub fn new(space: CompositeSpace, amps: CVector) -> Result<Self> {
        check_len(&space, amps.len())?;
        let norm = amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(ModalError::InvalidState(format!("state vector has norm {norm:.12}")));
        }
        Ok(Self { space, amps })
    }

    /// Normalises `amps` before wrapping it.
    pub fn normalized(space: CompositeSpace, amps: CVector) -> Result<Self> {
        check_len(&space, amps.len())?;
        let norm = amps.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(ModalError::InvalidState("cannot normalise the zero vector".into()));
        }
        Ok(Self {
            space,
            amps: amps.unscale(norm),
        })
    }

    pub fn basis(space: CompositeSpace, index: usize) -> Result<Self> {
        let dim = space.dim();
        if index >= dim {
            return Err(ModalError::DimensionMismatch(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amps = CVector::zeros(dim);
        amps[index] = c(1.0, 0.0);
        Ok(Self { space, amps })
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amps
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator {
            space: self.space.clone(),
            matrix: &self.amps * self.amps.adjoint(),
        }
    }

    /// `self ⊗ other` in the declared order; subsystem names must be disjoint.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let space = self.space.join(&other.space)?;
        let amps = self.amps.kronecker(&other.amps);
        PureState::normalized(space, amps)
    }

    /// Reduced density operator on the named subsystems.
    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityOperator> {
        let positions = self.space.positions(keep)?;
        Ok(self.reduce_positions(&positions))
    }

    pub(crate) fn reduce_positions(&self, positions: &[usize]) -> DensityOperator {
        let split = self.space.split(positions);
        let a = reshape(&self.amps, &split);
        DensityOperator {
            space: self.space.sub_space(positions),
            matrix: &a * a.adjoint(),
        }
    }

    /// Applies a unitary acting on the named subsystems.
    pub fn apply_unitary<S: AsRef<str>>(&self, u: &CMatrix, on: &[S]) -> Result<PureState> {
        let positions = self.space.positions(on)?;
        check_unitary(&self.space, &positions, u)?;
        Ok(PureState {
            space: self.space.clone(),
            amps: apply_local_vec(&self.space, &positions, u, &self.amps),
        })
    }

    /// Applies an arbitrary operator on the named subsystems without
    /// renormalising; the result is a raw vector.
    pub fn apply_local<S: AsRef<str>>(&self, op: &CMatrix, on: &[S]) -> Result<CVector> {
        let positions = self.space.positions(on)?;
        check_local_dim(&self.space, &positions, op)?;
        Ok(apply_local_vec(&self.space, &positions, op, &self.amps))
    }
}

/// A density operator: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    space: CompositeSpace,
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity (`1e-10`), positivity (`-1e-10`) and trace (`1e-10`).
    pub fn new(space: CompositeSpace, matrix: CMatrix) -> Result<Self> {
        check_len(&space, matrix.nrows())?;
        if matrix.nrows() != matrix.ncols() {
            return Err(ModalError::DimensionMismatch("density matrix must be square".into()));
        }
        let herm = hermiticity_residual(&matrix);
        if herm > HERMITIAN_TOL {
            return Err(ModalError::NotHermitian(herm));
        }
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(ModalError::InvalidState(format!("trace is {tr}")));
        }
        if !is_psd(&matrix, PSD_TOL) {
            return Err(ModalError::InvalidState(
                "density matrix has an eigenvalue below -1e-10".into(),
            ));
        }
        Ok(Self { space, matrix })
    }

    /// Builds `P / rank(P)` for an orthogonal projector.
    pub fn normalized_projector(space: CompositeSpace, projector: &CMatrix) -> Result<Self> {
        let rank = trace(projector).re;
        if rank < 0.5 {
            return Err(ModalError::InvalidState("projector has zero rank".into()));
        }
        Self::new(space, projector.unscale(rank))
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        trace(&self.matrix)
    }

    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityOperator> {
        let positions = self.space.positions(keep)?;
        Ok(self.reduce_positions(&positions))
    }

    pub(crate) fn reduce_positions(&self, positions: &[usize]) -> DensityOperator {
        let split = self.space.split(positions);
        let mut out = CMatrix::zeros(split.sel_dim, split.sel_dim);
        for a in 0..split.sel_dim {
            for b in 0..split.sel_dim {
                let mut acc = ZERO;
                for r in 0..split.rest_dim {
                    acc += self.matrix[(split.full(a, r), split.full(b, r))];
                }
                out[(a, b)] = acc;
            }
        }
        DensityOperator {
            space: self.space.sub_space(positions),
            matrix: out,
        }
    }

    /// `U ρ U^†` with `U` acting on the named subsystems.
    pub fn apply_unitary<S: AsRef<str>>(&self, u: &CMatrix, on: &[S]) -> Result<DensityOperator> {
        let positions = self.space.positions(on)?;
        check_unitary(&self.space, &positions, u)?;
        Ok(DensityOperator {
            space: self.space.clone(),
            matrix: conjugate_local(&self.space, &positions, u, &self.matrix),
        })
    }

    pub fn spectral_resolution(&self, degeneracy_tol: f64) -> SpectralResolution {
        spectral_resolution(&self.matrix, degeneracy_tol)
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }
}

/// Shared read access to a universal state, pure or mixed.
pub trait QuantumState {
    fn space(&self) -> &CompositeSpace;

    /// Reduced density operator on the subsystems at `positions`.
    fn reduced(&self, positions: &[usize]) -> DensityOperator;

    /// `Tr(ρ · Π_i O_i)` for operators acting on disjoint position sets.
    fn local_expectation(&self, ops: &[(Vec<usize>, &CMatrix)]) -> C64;

    /// `(P ⊗ I) ρ (P ⊗ I)` with `P` on `positions`, traced down to `keep`.
    /// Unnormalised.
    fn project_and_reduce(&self, positions: &[usize], projector: &CMatrix, keep: &[usize]) -> CMatrix;
}

impl QuantumState for PureState {
    fn space(&self) -> &CompositeSpace {
        &self.space
    }

    fn reduced(&self, positions: &[usize]) -> DensityOperator {
        self.reduce_positions(positions)
    }

    fn local_expectation(&self, ops: &[(Vec<usize>, &CMatrix)]) -> C64 {
        let mut v = self.amps.clone();
        for (pos, op) in ops {
            v = apply_local_vec(&self.space, pos, op, &v);
        }
        self.amps.dotc(&v)
    }

    fn project_and_reduce(&self, positions: &[usize], projector: &CMatrix, keep: &[usize]) -> CMatrix {
        let v = apply_local_vec(&self.space, positions, projector, &self.amps);
        let split = self.space.split(keep);
        let a = reshape(&v, &split);
        &a * a.adjoint()
    }
}

impl QuantumState for DensityOperator {
    fn space(&self) -> &CompositeSpace {
        &self.space
    }

    fn reduced(&self, positions: &[usize]) -> DensityOperator {
        self.reduce_positions(positions)
    }

    fn local_expectation(&self, ops: &[(Vec<usize>, &CMatrix)]) -> C64 {
        let mut m = self.matrix.clone();
        for (pos, op) in ops {
            m = apply_local_mat(&self.space, pos, op, &m);
        }
        trace(&m)
    }

    fn project_and_reduce(&self, positions: &[usize], projector: &CMatrix, keep: &[usize]) -> CMatrix {
        let projected = conjugate_local(&self.space, positions, projector, &self.matrix);
        DensityOperator {
            space: self.space.clone(),
            matrix: projected,
        }
        .reduce_positions(keep)
        .matrix
    }
}

fn check_len(space: &CompositeSpace, len: usize) -> Result<()> {
    if space.dim() != len {
        return Err(ModalError::DimensionMismatch(format!(
            "space {space} has dimension {} but data has length {len}",
            space.dim()
        )));
    }
    Ok(())
}

fn check_local_dim(space: &CompositeSpace, positions: &[usize], op: &CMatrix) -> Result<()> {
    let d: usize = positions.iter().map(|&p| space.subsystems()[p].dim()).product();
    if op.nrows() != d || op.ncols() != d {
        return Err(ModalError::DimensionMismatch(format!(
            "operator is {}x{} but the selected subsystems have joint dimension {d}",
            op.nrows(),
            op.ncols()
        )));
    }
    Ok(())
}

fn check_unitary(space: &CompositeSpace, positions: &[usize], u: &CMatrix) -> Result<()> {
    check_local_dim(space, positions, u)?;
    let res = unitarity_residual(u);
    if res > UNITARY_TOL {
        return Err(ModalError::NotUnitary(res));
    }
    Ok(())
}

/// Views a full-space vector as a `sel_dim × rest_dim` matrix.
pub(crate) fn reshape(v: &CVector, split: &IndexSplit) -> CMatrix {
    CMatrix::from_fn(split.sel_dim, split.rest_dim, |a, r| v[split.full(a, r)])
}

fn unreshape(m: &CMatrix, split: &IndexSplit) -> CVector {
    let mut v = CVector::zeros(split.sel_dim * split.rest_dim);
    for a in 0..split.sel_dim {
        for r in 0..split.rest_dim {
            v[split.full(a, r)] = m[(a, r)];
        }
    }
    v
}

/// `(O ⊗ I) v` with `O` acting on the factors at `positions`.
pub(crate) fn apply_local_vec(space: &CompositeSpace, positions: &[usize], op: &CMatrix, v: &CVector) -> CVector {
    let split = space.split(positions);
    let a = reshape(v, &split);
    unreshape(&(op * a), &split)
}

/// `(O ⊗ I) M`.
pub(crate) fn apply_local_mat(space: &CompositeSpace, positions: &[usize], op: &CMatrix, m: &CMatrix) -> CMatrix {
    let split = space.split(positions);
    let mut out = CMatrix::zeros(m.nrows(), m.ncols());
    for col in 0..m.ncols() {
        let v: CVector = m.column(col).into_owned();
        let a = reshape(&v, &split);
        out.set_column(col, &unreshape(&(op * a), &split));
    }
    out
}

/// `(O ⊗ I) M (O ⊗ I)^†`.
pub(crate) fn conjugate_local(space: &CompositeSpace, positions: &[usize], op: &CMatrix, m: &CMatrix) -> CMatrix {
    let left = apply_local_mat(space, positions, op, m);
    apply_local_mat(space, positions, op, &left.adjoint()).adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn qubits(n: usize) -> CompositeSpace {
        let names: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
        let parts: Vec<(&str, usize)> = names.iter().map(|s| (s.as_str(), 2)).collect();
        CompositeSpace::from_dims(&parts).unwrap()
    }

    fn bell() -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(qubits(2), CVector::from_vec(vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)])).unwrap()
    }

    #[test]
    fn basis_tensor_basis() {
        let a = PureState::basis(CompositeSpace::from_dims(&[("a", 2)]).unwrap(), 0).unwrap();
        let b = PureState::basis(CompositeSpace::from_dims(&[("b", 2)]).unwrap(), 1).unwrap();
        let ab = a.tensor(&b).unwrap();
        let expect: Vec<f64> = vec![0.0, 1.0, 0.0, 0.0];
        for (z, e) in ab.amplitudes().iter().zip(expect) {
            assert_eq!(*z, c(e, 0.0));
        }
    }

    #[test]
    fn superposition_tensor_is_linear() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = PureState::new(
            CompositeSpace::from_dims(&[("a", 2)]).unwrap(),
            CVector::from_vec(vec![c(s, 0.0), c(s, 0.0)]),
        )
        .unwrap();
        let zero = PureState::basis(CompositeSpace::from_dims(&[("b", 2)]).unwrap(), 0).unwrap();
        let v = plus.tensor(&zero).unwrap();
        // (|00> + |10>)/√2
        assert!((v.amplitudes()[0] - c(s, 0.0)).norm() < 1e-15);
        assert!((v.amplitudes()[2] - c(s, 0.0)).norm() < 1e-15);
        assert_eq!(v.amplitudes()[1], ZERO);
        assert_eq!(v.amplitudes()[3], ZERO);
    }

    #[test]
    fn tensor_rejects_name_collision() {
        let a = PureState::basis(CompositeSpace::from_dims(&[("a", 2)]).unwrap(), 0).unwrap();
        assert!(matches!(a.tensor(&a), Err(ModalError::NameCollision(_))));
    }

    #[test]
    fn bell_reduces_to_maximally_mixed() {
        let rho = bell().partial_trace(&["q0"]).unwrap();
        let half = CMatrix::identity(2, 2) * c(0.5, 0.0);
        assert!(max_abs_diff(rho.matrix(), &half) < 1e-15);
        let mixed = bell().to_density().partial_trace(&["q0"]).unwrap();
        assert!(max_abs_diff(mixed.matrix(), &half) < 1e-15);
    }

    #[test]
    fn partial_trace_unknown_name() {
        assert!(matches!(
            bell().partial_trace(&["nope"]),
            Err(ModalError::UnknownSubsystem(_))
        ));
    }

    #[test]
    fn sigma_x_flips_qubit() {
        let sp = CompositeSpace::from_dims(&[("q", 2)]).unwrap();
        let zero = PureState::basis(sp.clone(), 0).unwrap();
        let x = CMatrix::from_row_slice(2, 2, &[ZERO, c(1.0, 0.0), c(1.0, 0.0), ZERO]);
        let one = zero.apply_unitary(&x, &["q"]).unwrap();
        assert_eq!(one, PureState::basis(sp, 1).unwrap());
    }

    #[test]
    fn identity_unitary_leaves_state() {
        let b = bell();
        let out = b.apply_unitary(&CMatrix::identity(2, 2), &["q1"]).unwrap();
        assert_eq!(out, b);
    }

    #[test]
    fn non_unitary_rejected() {
        let m = CMatrix::identity(2, 2) * c(2.0, 0.0);
        assert!(matches!(
            bell().apply_unitary(&m, &["q0"]),
            Err(ModalError::NotUnitary(_))
        ));
        let wrong = CMatrix::identity(3, 3);
        assert!(matches!(
            bell().apply_unitary(&wrong, &["q0"]),
            Err(ModalError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn density_validation() {
        let sp = CompositeSpace::from_dims(&[("q", 2)]).unwrap();
        let not_psd = CMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), ZERO, ZERO, c(-0.5, 0.0)]);
        assert!(DensityOperator::new(sp.clone(), not_psd).is_err());
        let bad_trace = CMatrix::identity(2, 2);
        assert!(DensityOperator::new(sp.clone(), bad_trace).is_err());
        let non_herm = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), ZERO, c(0.5, 0.0)]);
        assert!(matches!(
            DensityOperator::new(sp, non_herm),
            Err(ModalError::NotHermitian(_))
        ));
    }
}
