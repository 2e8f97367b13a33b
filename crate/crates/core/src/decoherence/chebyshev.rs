//! `exp(-iHt/ħ) v` for large dense Hermitian `H` without diagonalising it.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{ModalError, Result};
use crate::linalg::{c, CVector, C64, ZERO};

/// Matrix-vector access to a Hermitian operator.
pub trait HermitianOp {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[C64], out: &mut [C64]);
}

/// Row-major dense Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHermitian {
    pub n: usize,
    pub data: Vec<C64>,
}

impl HermitianOp for DenseHermitian {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, v: &[C64], out: &mut [C64]) {
        for (row, o) in self.data.chunks_exact(self.n).zip(out.iter_mut()) {
            let mut acc = ZERO;
            for (a, b) in row.iter().zip(v) {
                acc += a * b;
            }
            *o = acc;
        }
    }
}

/// `J_0(x) .. J_kmax(x)` by Miller's backward recurrence, normalised with
/// `J_0 + 2 Σ J_2k = 1`.
pub fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = kmax.max(ax as usize);
    let mut start = top + 32 + (40.0 * top as f64).sqrt() as usize;
    start += start % 2;
    let (mut jp1, mut j) = (0.0_f64, 1e-300_f64);
    let mut even_sum = 0.0;
    let mut tail = vec![0.0; start + 1];
    tail[start] = j;
    for k in (1..=start).rev() {
        let jm1 = 2.0 * k as f64 / ax * j - jp1;
        jp1 = j;
        j = jm1;
        tail[k - 1] = j;
        if j.abs() > 1e250 {
            for t in tail.iter_mut().skip(k - 1) {
                *t *= 1e-250;
            }
            j *= 1e-250;
            jp1 *= 1e-250;
            even_sum *= 1e-250;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            even_sum += j;
        }
    }
    let norm = tail[0] + 2.0 * even_sum;
    for (k, o) in out.iter_mut().enumerate() {
        let v = tail[k] / norm;
        // J_k(-x) = (-1)^k J_k(x)
        *o = if x < 0.0 && k % 2 == 1 { -v } else { v };
    }
    out
}

/// Spectral interval `[lo, hi]` enclosing every eigenvalue of `h`.
///
/// A fixed-seed Lanczos run gives Ritz estimates of the extremes; the interval
/// is widened by the final residual and by a tenth of its width.
pub fn spectral_bounds<H: HermitianOp>(h: &H, steps: usize) -> (f64, f64) {
    let n = h.dim();
    let m = steps.min(n).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a2c);
    let mut q: Vec<CVector> = Vec::with_capacity(m + 1);
    let v0 = CVector::from_fn(n, |_, _| {
        c(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    });
    q.push(v0.unscale(v0.norm()));
    let mut alpha = Vec::with_capacity(m);
    let mut beta: Vec<f64> = Vec::with_capacity(m);
    let mut w = vec![ZERO; n];
    let mut last_beta = 0.0;
    for k in 0..m {
        h.apply(q[k].as_slice(), &mut w);
        let mut wv = CVector::from_column_slice(&w);
        let a = q[k].dotc(&wv).re;
        alpha.push(a);
        // full reorthogonalisation, twice for stability
        for _ in 0..2 {
            for qi in &q {
                let proj = qi.dotc(&wv);
                wv -= qi * proj;
            }
        }
        let b = wv.norm();
        last_beta = b;
        if k + 1 == m || b < 1e-12 {
            break;
        }
        beta.push(b);
        q.push(wv.unscale(b));
    }
    let dim = alpha.len();
    let t = DMatrix::<f64>::from_fn(dim, dim, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let lo = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slack = if dim == n && last_beta < 1e-12 { 0.0 } else { last_beta };
    let width = (hi - lo).max(1e-12);
    (lo - slack - 0.1 * width, hi + slack + 0.1 * width)
}

/// Result of a Chebyshev propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagated {
    pub state: CVector,
    pub terms: usize,
    pub norm_drift: f64,
}

/// `exp(-i H t / ħ) v` by Chebyshev expansion on the interval from
/// [`spectral_bounds`]. The norm of the result is checked against the input
/// to `1e-9`.
pub fn chebyshev_propagate<H: HermitianOp>(h: &H, v: &CVector, t: f64, hbar: f64) -> Result<Propagated> {
    let n = h.dim();
    if v.len() != n {
        return Err(ModalError::DimensionMismatch(format!(
            "vector of length {} for an operator of dimension {n}",
            v.len()
        )));
    }
    if t == 0.0 {
        return Ok(Propagated {
            state: v.clone(),
            terms: 0,
            norm_drift: 0.0,
        });
    }
    let (lo, hi) = spectral_bounds(h, 60);
    let center = 0.5 * (hi + lo);
    let half = 0.5 * (hi - lo);
    let tau = half * t / hbar;
    let kmax = (tau.abs() + 12.0 * tau.abs().cbrt() + 30.0).ceil() as usize;
    let jk = bessel_j_sequence(tau, kmax);

    // H̃ = (H - center) / half
    let scaled = |x: &[C64], out: &mut [C64]| {
        h.apply(x, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o = (*o - xi * center) / half;
        }
    };

    let mut prev: Vec<C64> = v.iter().copied().collect();
    let mut cur = vec![ZERO; n];
    scaled(&prev, &mut cur);
    let mut acc: Vec<C64> = prev.iter().map(|z| z * jk[0]).collect();
    let minus_i = c(0.0, -1.0);
    let mut coeff = minus_i * 2.0 * jk[1];
    for (a, z) in acc.iter_mut().zip(&cur) {
        *a += z * coeff;
    }
    let mut next = vec![ZERO; n];
    let mut terms = 2;
    let mut phase = minus_i;
    for (k, &j) in jk.iter().enumerate().skip(2) {
        scaled(&cur, &mut next);
        for (nx, p) in next.iter_mut().zip(&prev) {
            *nx = *nx * 2.0 - p;
        }
        phase *= minus_i;
        coeff = phase * 2.0 * j;
        for (a, z) in acc.iter_mut().zip(&next) {
            *a += z * coeff;
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
        terms += 1;
        if k as f64 > tau.abs() && j.abs() < 1e-17 {
            break;
        }
    }
    let global = C64::from_polar(1.0, -center * t / hbar);
    let state = CVector::from_iterator(n, acc.into_iter().map(|z| z * global));
    let drift = (state.norm() - v.norm()).abs();
    if drift > 1e-9 {
        return Err(ModalError::Invariant(format!(
            "Chebyshev propagation changed the norm by {drift:.3e}"
        )));
    }
    Ok(Propagated {
        state,
        terms,
        norm_drift: drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{evolution_operator, CMatrix};

    #[test]
    fn bessel_matches_reference_values() {
        // scipy.special.jv
        let cases: [(f64, [f64; 4]); 3] = [
            (
                0.5,
                [
                    0.938469807240813,
                    0.2422684576748739,
                    8.053627241357477e-06,
                    3.7272019617047014e-31,
                ],
            ),
            (
                7.3,
                [
                    0.28821694763501443,
                    0.08257043049325793,
                    0.3137061708973091,
                    3.8026628466865966e-08,
                ],
            ),
            (
                44.0,
                [
                    0.0863066993322866,
                    -0.08280335937602917,
                    -0.05638871874376099,
                    -0.09620767124735181,
                ],
            ),
        ];
        for (x, want) in cases {
            let j = bessel_j_sequence(x, 20);
            for (k, w) in [0usize, 1, 5, 20].iter().zip(want) {
                let tol = 1e-12 * w.abs().max(1e-300) + 1e-15;
                assert!((j[*k] - w).abs() <= tol, "J_{k}({x}) = {} vs {w}", j[*k]);
            }
        }
    }

    #[test]
    fn matches_dense_exponential() {
        let n = 24;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut m = CMatrix::from_fn(n, n, |_, _| {
            c(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
        });
        m = (&m + m.adjoint()) * c(0.5, 0.0);
        let h = DenseHermitian {
            n,
            data: m.transpose().iter().copied().collect(),
        };
        let v = CVector::from_fn(n, |i, _| c(1.0 / (n as f64).sqrt(), 0.01 * i as f64)).normalize();
        let out = chebyshev_propagate(&h, &v, 3.7, 1.0).unwrap();
        let want = evolution_operator(&m, 3.7, 1.0) * &v;
        assert!((out.state - want).norm() < 1e-11);
    }
}
