//! Dense complex linear-algebra helpers shared by every module.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entrywise modulus of `m - m^†`.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    if n != m.ncols() {
        return f64::INFINITY;
    }
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entrywise modulus of `u^† u - I`.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let g = u.adjoint() * u;
    let mut worst = 0.0_f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn trace(m: &CMatrix) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// Multiplies a vector by the conjugate of the phase of its largest-modulus
/// component, so that component becomes real and positive.
pub fn fix_phase(v: &mut CVector) {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, z) in v.iter().enumerate() {
        // strict comparison with a small margin keeps the first of near-ties
        if z.norm() > best_abs + 1e-12 {
            best = i;
            best_abs = z.norm();
        }
    }
    if best_abs > 0.0 {
        let phase = v[best] / best_abs;
        let rot = phase.conj();
        v.iter_mut().for_each(|z| *z *= rot);
    }
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// Eigenvalues are returned in descending order with eigenvectors as the
/// matching columns; each eigenvector has its largest component real positive.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut vectors = CMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (col, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let mut v: CVector = eig.eigenvectors.column(src).into_owned();
        fix_phase(&mut v);
        vectors.set_column(col, &v);
    }
    (values, vectors)
}

/// `exp(-i H t / hbar)` for Hermitian `H`, built from its eigenbasis.
pub fn evolution_operator(h: &CMatrix, t: f64, hbar: f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(h);
    let mut scaled = vectors.clone();
    for (k, lambda) in values.iter().enumerate() {
        let phase = C64::from_polar(1.0, -lambda * t / hbar);
        for z in scaled.column_mut(k).iter_mut() {
            *z *= phase;
        }
    }
    scaled * vectors.adjoint()
}

/// Outer product `|a><b|`.
pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Checks positive semidefiniteness up to `-tol` by running a Cholesky
/// factorisation of `m + tol·I` and watching for a non-positive pivot.
///
/// nalgebra's Cholesky takes complex square roots of negative pivots, so the
/// factorisation is spelled out here.
pub fn is_psd(m: &CMatrix, tol: f64) -> bool {
    let n = m.nrows();
    let shift = tol.max(f64::EPSILON * n as f64);
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re + shift;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        l[(j, j)] = c(d, 0.0);
        for i in (j + 1)..n {
            let mut s = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    true
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    let (values, _) = hermitian_eigen(m);
    values.last().copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psd_test_agrees_with_spectrum() {
        let rank_one = outer(
            &CVector::from_vec(vec![c(1.0, 0.5), c(-0.3, 0.0), c(0.0, 2.0)]),
            &CVector::from_vec(vec![c(1.0, 0.5), c(-0.3, 0.0), c(0.0, 2.0)]),
        );
        assert!(is_psd(&rank_one, 1e-10));
        assert!(is_psd(&CMatrix::zeros(3, 3), 1e-10));
        let mut indefinite = identity(3);
        indefinite[(2, 2)] = c(-1e-6, 0.0);
        assert!(!is_psd(&indefinite, 1e-10));
        assert!(min_eigenvalue(&indefinite) < 0.0);
        // complex off-diagonals with a negative eigenvalue of -1
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)]);
        assert!(!is_psd(&m, 1e-10));
    }

    #[test]
    fn eigenvectors_have_real_positive_lead() {
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 0.5), c(0.0, -0.5), c(1.0, 0.0)]);
        let (vals, vecs) = hermitian_eigen(&m);
        let r = 0.5f64.sqrt();
        assert!((vals[0] - 1.5 - r).abs() < 1e-12 && (vals[1] - 1.5 + r).abs() < 1e-12);
        for k in 0..2 {
            let col = vecs.column(k);
            let lead = col.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
            assert!(lead.im.abs() < 1e-14 && lead.re > 0.0);
        }
    }
}
