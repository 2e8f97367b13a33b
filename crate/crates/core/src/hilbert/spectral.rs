use crate::linalg::{hermitian_eigen, CMatrix, CVector, C64};

pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

/// One merged eigenspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEntry {
    pub eigenvalue: f64,
    pub projector: CMatrix,
    /// Orthonormal basis of the eigenspace, one vector per column.
    pub vectors: CMatrix,
}

impl SpectralEntry {
    pub fn multiplicity(&self) -> usize {
        self.vectors.ncols()
    }

    /// Probability carried by this eigenspace, `λ · dim P`.
    pub fn weight(&self) -> f64 {
        self.eigenvalue * self.multiplicity() as f64
    }
}

/// Eigenvalues in strictly descending order with degeneracy-merged projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResolution {
    pub entries: Vec<SpectralEntry>,
    pub dim: usize,
}

impl SpectralResolution {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Σ λ_i P_i`.
    pub fn reconstruct(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for e in &self.entries {
            out += &e.projector * C64::new(e.eigenvalue, 0.0);
        }
        out
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(SpectralEntry::weight).sum()
    }
}

/// Groups eigenvalues of a Hermitian PSD matrix into eigenspaces.
///
/// Walking the spectrum from the top, an eigenvalue joins the current group
/// when it lies within `tol · λ_max` of the group's first member. The group
/// eigenvalue is the mean of its members, clamped at zero. `tol = 0` turns
/// merging off so every eigenvector gets its own rank-one entry.
pub fn spectral_resolution(m: &CMatrix, tol: f64) -> SpectralResolution {
    let n = m.nrows();
    let (values, vectors) = hermitian_eigen(m);
    let scale = values.first().copied().unwrap_or(0.0).abs().max(f64::MIN_POSITIVE);
    let cut = tol.max(0.0) * scale;
    let mut entries = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && tol > 0.0 && values[start] - values[end] <= cut {
            end += 1;
        }
        let group = vectors.columns(start, end - start).into_owned();
        let mean = values[start..end].iter().sum::<f64>() / (end - start) as f64;
        entries.push(SpectralEntry {
            eigenvalue: mean.max(0.0),
            projector: &group * group.adjoint(),
            vectors: group,
        });
        start = end;
    }
    SpectralResolution { entries, dim: n }
}

/// Projector onto a single normalised vector.
pub fn rank_one(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs_diff, ZERO};

    #[test]
    fn maximally_mixed_qubit_is_one_entry() {
        let m = CMatrix::identity(2, 2) * c(0.5, 0.0);
        let r = spectral_resolution(&m, DEFAULT_DEGENERACY_TOL);
        assert_eq!(r.len(), 1);
        assert_eq!(r.entries[0].multiplicity(), 2);
        assert!((r.entries[0].eigenvalue - 0.5).abs() < 1e-15);
        assert!(max_abs_diff(&r.entries[0].projector, &CMatrix::identity(2, 2)) < 1e-14);
    }

    #[test]
    fn diagonal_splits() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.3, 0.0), ZERO, ZERO, c(0.7, 0.0)]);
        let r = spectral_resolution(&m, DEFAULT_DEGENERACY_TOL);
        assert_eq!(r.len(), 2);
        assert!((r.entries[0].eigenvalue - 0.7).abs() < 1e-15);
        assert!((r.entries[0].projector[(1, 1)].re - 1.0).abs() < 1e-14);
        assert!((r.entries[1].projector[(0, 0)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_tolerance_disables_merging() {
        let m = CMatrix::identity(3, 3) * c(1.0 / 3.0, 0.0);
        assert_eq!(spectral_resolution(&m, 0.0).len(), 3);
        assert_eq!(spectral_resolution(&m, 1e-9).len(), 1);
    }
}
