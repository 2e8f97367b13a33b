//! Free evolution between measurements and the sequential-measurement
//! probabilities built on it.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::{Fft, FftPlanner};

use crate::error::{ModalError, Result};
use crate::linalg::{c, CMatrix, CVector, C64};
use crate::observers::JointOutcomeTable;
use crate::photon::{ObjectGrid, TransferFunctions};

/// Momentum grid of the periodic box, in FFT order: `p_k = 2πħk/L` with
/// `k ≥ M/2` wrapped to negative values.
pub fn momentum_grid(grid: &ObjectGrid, hbar: f64) -> Vec<f64> {
    let m = grid.len();
    let dp = 2.0 * PI * hbar / grid.length();
    (0..m)
        .map(|k| {
            let kk = if k < m.div_ceil(2) {
                k as f64
            } else {
                k as f64 - m as f64
            };
            kk * dp
        })
        .collect()
}

/// Exact free evolution on the discrete torus.
#[derive(Clone)]
pub struct Propagator {
    pub mass: f64,
    pub t: f64,
    pub hbar: f64,
    phases: Vec<C64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Propagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Propagator")
            .field("mass", &self.mass)
            .field("t", &self.t)
            .field("hbar", &self.hbar)
            .field("points", &self.phases.len())
            .finish()
    }
}

impl Propagator {
    pub fn free(grid: &ObjectGrid, mass: f64, t: f64, hbar: f64) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(ModalError::InvalidParameter(format!(
                "mass must be positive, got {mass}"
            )));
        }
        if !(t >= 0.0) || !t.is_finite() {
            return Err(ModalError::InvalidParameter(format!(
                "elapsed time must be >= 0, got {t}"
            )));
        }
        if !(hbar > 0.0) {
            return Err(ModalError::InvalidParameter(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        let phases = momentum_grid(grid, hbar)
            .into_iter()
            .map(|p| C64::from_polar(1.0, -p * p * t / (2.0 * mass * hbar)))
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            mass,
            t,
            hbar,
            phases,
            forward: planner.plan_fft_forward(grid.len()),
            inverse: planner.plan_fft_inverse(grid.len()),
        })
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn apply(&self, psi: &CVector) -> CVector {
        let n = self.phases.len();
        let mut buf: Vec<C64> = psi.iter().copied().collect();
        self.forward.process(&mut buf);
        for (z, ph) in buf.iter_mut().zip(&self.phases) {
            *z *= ph;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / n as f64;
        CVector::from_iterator(n, buf.into_iter().map(|z| z * scale))
    }

    /// Dense `G[x][x']`, built column by column.
    pub fn matrix(&self) -> CMatrix {
        let n = self.phases.len();
        let mut g = CMatrix::zeros(n, n);
        let mut e = CVector::zeros(n);
        for col in 0..n {
            e[col] = c(1.0, 0.0);
            g.set_column(col, &self.apply(&e));
            e[col] = c(0.0, 0.0);
        }
        g
    }
}

/// Free-particle action `S_t(x, x') = m (x - x')² / (2t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalAction {
    pub mass: f64,
}

impl ClassicalAction {
    pub fn action(&self, x: f64, x_prev: f64, t: f64) -> f64 {
        self.mass * (x - x_prev).powi(2) / (2.0 * t)
    }

    /// `∂S/∂x`, the classical momentum on arrival.
    pub fn momentum(&self, x: f64, x_prev: f64, t: f64) -> f64 {
        self.mass * (x - x_prev) / t
    }
}

/// Normalised Gaussian packet `exp(-(x - x0)²/(4s²) + i p0 x / ħ)`; `s` is the
/// position standard deviation.
pub fn gaussian_packet(grid: &ObjectGrid, x0: f64, s: f64, p0: f64, hbar: f64) -> Result<CVector> {
    if !(s > 0.0) {
        return Err(ModalError::InvalidParameter(format!(
            "packet width must be positive, got {s}"
        )));
    }
    let v = CVector::from_fn(grid.len(), |i, _| {
        let x = grid.x(i);
        C64::from_polar((-(x - x0).powi(2) / (4.0 * s * s)).exp(), p0 * x / hbar)
    });
    let n = v.norm();
    if !(n > 0.0) {
        return Err(ModalError::InvalidState("packet has no weight on the grid".into()));
    }
    Ok(v.unscale(n))
}

fn row(c: &TransferFunctions, j: usize) -> CVector {
    c.c.row(j).transpose()
}

fn check_lengths(psi0: &CVector, c: &TransferFunctions, g: &Propagator) -> Result<()> {
    if psi0.len() != c.n_points() || g.len() != c.n_points() {
        return Err(ModalError::DimensionMismatch(format!(
            "state has {} points, transfer functions {}, propagator {}",
            psi0.len(),
            c.n_points(),
            g.len()
        )));
    }
    Ok(())
}

/// Unnormalised `c_k(x) Σ_x' G_t(x, x') Ψ0(x') c_j(x')`.
fn two_time_raw(psi0: &CVector, c: &TransferFunctions, j: usize, g: &Propagator, k: usize) -> CVector {
    let evolved = g.apply(&psi0.component_mul(&row(c, j)));
    evolved.component_mul(&row(c, k))
}

/// The object once display `j` fired, time `t` passed, and display `k` fired.
pub fn two_time_state(psi0: &CVector, c: &TransferFunctions, j: usize, g: &Propagator, k: usize) -> Result<CVector> {
    check_lengths(psi0, c, g)?;
    let raw = two_time_raw(psi0, c, j, g, k);
    let p = raw.norm_squared();
    if p <= 1e-14 {
        return Err(ModalError::ZeroProbabilityBranch(p));
    }
    Ok(raw.unscale(p.sqrt()))
}

/// `P_{jk} = Σ_x |c_k(x)|² |Σ_x' G_t(x, x') Ψ0(x') c_j(x')|²`.
pub fn two_time_joint(psi0: &CVector, c: &TransferFunctions, g: &Propagator) -> Result<JointOutcomeTable> {
    check_lengths(psi0, c, g)?;
    let n = c.n_blocks();
    let mut p = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let evolved = g.apply(&psi0.component_mul(&row(c, j)));
        for k in 0..n {
            p[(j, k)] = evolved
                .iter()
                .enumerate()
                .map(|(m, z)| z.norm_sqr() * c.c[(k, m)].norm_sqr())
                .sum();
        }
    }
    JointOutcomeTable::new(p)
}

/// Momentum content of a wave function compared against the classical value.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumCheck {
    pub p_peak: f64,
    pub p_classical: f64,
    pub p_mean: f64,
    pub spread: f64,
    /// Momentum grid spacing `2πħ/L`.
    pub dp: f64,
}

impl MomentumCheck {
    pub fn offset_in_steps(&self) -> f64 {
        (self.p_peak - self.p_classical).abs() / self.dp
    }
}

/// Momentum distribution `|ψ̂(p_k)|²` in FFT order.
pub fn momentum_distribution(psi: &CVector) -> Vec<f64> {
    let n = psi.len();
    let mut buf: Vec<C64> = psi.iter().copied().collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let total: f64 = buf.iter().map(|z| z.norm_sqr()).sum();
    buf.iter().map(|z| z.norm_sqr() / total).collect()
}

pub fn momentum_check(
    psi: &CVector,
    grid: &ObjectGrid,
    mass: f64,
    t: f64,
    hbar: f64,
    x_j: f64,
    x_k: f64,
) -> Result<MomentumCheck> {
    if t == 0.0 {
        return Err(ModalError::ZeroTime);
    }
    let probs = momentum_distribution(psi);
    let ps = momentum_grid(grid, hbar);
    let peak = (0..probs.len())
        .max_by(|&a, &b| probs[a].total_cmp(&probs[b]))
        .unwrap_or(0);
    let mean: f64 = probs.iter().zip(&ps).map(|(w, p)| w * p).sum();
    let var: f64 = probs.iter().zip(&ps).map(|(w, p)| w * (p - mean).powi(2)).sum();
    Ok(MomentumCheck {
        p_peak: ps[peak],
        p_classical: ClassicalAction { mass }.momentum(x_k, x_j, t),
        p_mean: mean,
        spread: var.max(0.0).sqrt(),
        dp: 2.0 * PI * hbar / grid.length(),
    })
}

/// `q_n`: probability that a third display `n` fires a time `t'` after the
/// outcomes `(j, k)`.
pub fn third_conditional(
    psi0: &CVector,
    c: &TransferFunctions,
    g_t: &Propagator,
    g_tp: &Propagator,
    j: usize,
    k: usize,
) -> Result<Vec<f64>> {
    let psi_jk = two_time_state(psi0, c, j, g_t, k)?;
    Ok(block_probabilities(&g_tp.apply(&psi_jk), c))
}

/// `Σ_x |c_n(x)|² |ψ(x)|²` for every block `n`.
pub fn block_probabilities(psi: &CVector, c: &TransferFunctions) -> Vec<f64> {
    (0..c.n_blocks())
        .map(|n| {
            psi.iter()
                .enumerate()
                .map(|(m, z)| z.norm_sqr() * c.c[(n, m)].norm_sqr())
                .sum()
        })
        .collect()
}

/// Free-particle extrapolation `x_k + (x_k - x_j) t'/t`.
pub fn classical_endpoint(x_j: f64, x_k: f64, t: f64, t_prime: f64) -> Result<f64> {
    if t == 0.0 {
        return Err(ModalError::ZeroTime);
    }
    Ok(x_k + (x_k - x_j) * t_prime / t)
}

/// Sum of `q[n]` over `|n - center| ≤ half_width`.
pub fn window_mass(q: &[f64], center: usize, half_width: usize) -> f64 {
    let lo = center.saturating_sub(half_width);
    let hi = (center + half_width).min(q.len().saturating_sub(1));
    q[lo..=hi].iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn zero_time_is_identity() {
        let g = ObjectGrid::new(0.0, 16.0, 16).unwrap();
        let p = Propagator::free(&g, 1.0, 0.0, 1.0).unwrap();
        assert!(max_abs_diff(&p.matrix(), &CMatrix::identity(16, 16)) < 1e-14);
    }

    #[test]
    fn group_law() {
        let g = ObjectGrid::new(0.0, 32.0, 32).unwrap();
        let a = Propagator::free(&g, 2.0, 0.7, 1.0).unwrap().matrix();
        let b = Propagator::free(&g, 2.0, 1.9, 1.0).unwrap().matrix();
        let ab = Propagator::free(&g, 2.0, 2.6, 1.0).unwrap().matrix();
        assert!(max_abs_diff(&(&a * &b), &ab) < 1e-12);
    }

    #[test]
    fn endpoint_formulas() {
        assert_eq!(classical_endpoint(3.0, 3.0, 1.0, 5.0).unwrap(), 3.0);
        assert_eq!(classical_endpoint(1.0, 4.0, 2.0, 2.0).unwrap(), 7.0);
        assert_eq!(classical_endpoint(1.0, 4.0, 0.0, 2.0), Err(ModalError::ZeroTime));
    }

    #[test]
    fn action_derivative_matches_difference() {
        let s = ClassicalAction { mass: 3.0 };
        let (x, xp, t) = (2.5, -1.0, 0.8);
        let h = 1e-5;
        let fd = (s.action(x + h, xp, t) - s.action(x - h, xp, t)) / (2.0 * h);
        assert!((fd - s.momentum(x, xp, t)).abs() <= 1e-8 * s.momentum(x, xp, t).abs());
    }

    #[test]
    fn momentum_grid_wraps() {
        let g = ObjectGrid::new(0.0, 2.0 * PI, 4).unwrap();
        assert_eq!(momentum_grid(&g, 1.0), vec![0.0, 1.0, -2.0, -1.0]);
    }
}
