//! A measuring device whose own position is spread out.
//!
//! The coupling only sees the relative coordinate `x - y`, so transfer
//! functions live on a grid of relative positions. Object and device grids
//! must share one spacing so every `x_m - y_n` lands on that grid.

use nalgebra::DMatrix;

use crate::error::{ModalError, Result};
use crate::linalg::{CMatrix, C64, ZERO};
use crate::observers::JointOutcomeTable;
use crate::photon::{ObjectGrid, TransferFunctions};

/// `Ψ(x_m, y_n)` with `Σ |Ψ|² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointObjectDeviceState {
    pub x_grid: ObjectGrid,
    pub y_grid: ObjectGrid,
    pub psi: CMatrix,
}

impl JointObjectDeviceState {
    pub fn new(x_grid: ObjectGrid, y_grid: ObjectGrid, psi: CMatrix) -> Result<Self> {
        if psi.nrows() != x_grid.len() || psi.ncols() != y_grid.len() {
            return Err(ModalError::DimensionMismatch(format!(
                "amplitude array is {}x{}, grids have {} and {} points",
                psi.nrows(),
                psi.ncols(),
                x_grid.len(),
                y_grid.len()
            )));
        }
        let (dx, dy) = (x_grid.dx(), y_grid.dx());
        if (dx - dy).abs() > 1e-12 * dx.max(dy) {
            return Err(ModalError::InvalidParameter(format!(
                "object and device grids need equal spacing, got {dx} and {dy}"
            )));
        }
        let n = psi.norm();
        if (n - 1.0).abs() > 1e-10 {
            return Err(ModalError::InvalidState(format!(
                "joint wave function has norm {n:.12}"
            )));
        }
        Ok(Self { x_grid, y_grid, psi })
    }

    /// Normalises `psi` first.
    pub fn normalized(x_grid: ObjectGrid, y_grid: ObjectGrid, psi: CMatrix) -> Result<Self> {
        let n = psi.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(ModalError::InvalidState("joint wave function has zero norm".into()));
        }
        Self::new(x_grid, y_grid, psi.unscale(n))
    }

    /// `f((x + y)/2) g(x - y)` with Gaussian `f`, `g` given by their centres
    /// and standard deviations of the probability density.
    pub fn product_com_relative(
        x_grid: ObjectGrid,
        y_grid: ObjectGrid,
        com_center: f64,
        com_width: f64,
        rel_center: f64,
        rel_width: f64,
    ) -> Result<Self> {
        if !(com_width > 0.0) || !(rel_width > 0.0) {
            return Err(ModalError::InvalidParameter("packet widths must be positive".into()));
        }
        let psi = CMatrix::from_fn(x_grid.len(), y_grid.len(), |m, n| {
            let (x, y) = (x_grid.x(m), y_grid.x(n));
            let big = 0.5 * (x + y) - com_center;
            let rel = x - y - rel_center;
            let e = -big * big / (4.0 * com_width * com_width) - rel * rel / (4.0 * rel_width * rel_width);
            C64::new(e.exp(), 0.0)
        });
        Self::normalized(x_grid, y_grid, psi)
    }

    /// Lattice difference `m - n` in cells; the relative coordinate is
    /// `x_min - y_min + (m - n) Δ`.
    fn rel_value(&self, d: i64) -> f64 {
        self.x_grid.x_min() - self.y_grid.x_min() + d as f64 * self.x_grid.dx()
    }
}

/// Maps lattice differences onto indices of the transfer-function grid.
struct RelativeIndex {
    /// Index by `d + (M_y - 1)`.
    slots: Vec<Option<usize>>,
    offset: i64,
}

impl RelativeIndex {
    fn new(state: &JointObjectDeviceState, rel: &ObjectGrid) -> Result<Self> {
        let (m, my) = (state.x_grid.len() as i64, state.y_grid.len() as i64);
        let dx = state.x_grid.dx();
        if (rel.dx() - dx).abs() > 1e-9 * dx {
            return Err(ModalError::InvalidParameter(format!(
                "relative grid spacing {} differs from object spacing {dx}",
                rel.dx()
            )));
        }
        let mut slots = Vec::with_capacity((m + my - 1) as usize);
        for d in -(my - 1)..m {
            let r = state.rel_value(d);
            let pos = (r - rel.x(0)) / dx;
            let idx = pos.round();
            if (pos - idx).abs() > 1e-6 {
                return Err(ModalError::InvalidParameter(
                    "relative grid is offset from the lattice of x - y values".into(),
                ));
            }
            slots.push((idx >= 0.0 && (idx as usize) < rel.len()).then_some(idx as usize));
        }
        Ok(Self { slots, offset: my - 1 })
    }

    fn get(&self, m: usize, n: usize) -> Option<usize> {
        self.slots[(m as i64 - n as i64 + self.offset) as usize]
    }
}

fn check_devices(c1: &TransferFunctions, c2: &TransferFunctions) -> Result<()> {
    if c1.grid != c2.grid {
        return Err(ModalError::DimensionMismatch(
            "both receptor arrays must share one relative-coordinate grid".into(),
        ));
    }
    Ok(())
}

/// `P(j, k) = Σ_{m,n} |Ψ(x_m, y_n)|² |c1_j(x_m - y_n)|² |c2_k(x_m - y_n)|²`.
pub fn deloc_joint_prob(
    state: &JointObjectDeviceState,
    c1: &TransferFunctions,
    c2: &TransferFunctions,
) -> Result<JointOutcomeTable> {
    check_devices(c1, c2)?;
    let idx = RelativeIndex::new(state, &c1.grid)?;
    let mut weights = vec![0.0; c1.n_points()];
    let mut outside = 0.0;
    for m in 0..state.x_grid.len() {
        for n in 0..state.y_grid.len() {
            let w = state.psi[(m, n)].norm_sqr();
            match idx.get(m, n) {
                Some(r) => weights[r] += w,
                None => outside += w,
            }
        }
    }
    let inside: f64 = weights.iter().sum();
    if inside <= 1e-300 {
        return Err(ModalError::NoDetectableMass);
    }
    if outside > 1e-10 {
        return Err(ModalError::MassOutsideDetector(outside));
    }
    let (n1, n2) = (c1.n_blocks(), c2.n_blocks());
    let mut p = DMatrix::<f64>::zeros(n1, n2);
    for (r, w) in weights.iter().enumerate() {
        for j in 0..n1 {
            let a = w * c1.c[(j, r)].norm_sqr();
            for k in 0..n2 {
                p[(j, k)] += a * c2.c[(k, r)].norm_sqr();
            }
        }
    }
    JointOutcomeTable::new(p)
}

/// The conditioned state in relative and centre-of-mass coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeState {
    /// Relative positions `x̃_d`, one per lattice difference.
    pub rel_positions: Vec<f64>,
    /// Density over `x̃` after tracing out `X`.
    pub rho: CMatrix,
    /// `X = (x + y)/2` values, one per lattice sum.
    pub com_positions: Vec<f64>,
    pub com_marginal: Vec<f64>,
    pub probability: f64,
}

impl RelativeState {
    pub fn rel_std(&self) -> f64 {
        weighted_std(
            &self.rel_positions,
            &(0..self.rho.nrows()).map(|i| self.rho[(i, i)].re).collect::<Vec<_>>(),
        )
    }

    pub fn com_std(&self) -> f64 {
        weighted_std(&self.com_positions, &self.com_marginal)
    }
}

fn weighted_std(xs: &[f64], ws: &[f64]) -> f64 {
    let total: f64 = ws.iter().sum();
    let mean: f64 = xs.iter().zip(ws).map(|(x, w)| x * w).sum::<f64>() / total;
    let var: f64 = xs.iter().zip(ws).map(|(x, w)| w * (x - mean).powi(2)).sum::<f64>() / total;
    var.max(0.0).sqrt()
}

/// Conditions `Ψ` on outcomes `(j, k)`, changes variables to
/// `d = m - n`, `s = m + n` and traces out `s`.
///
/// Each `(d, s)` pair with equal parity corresponds to exactly one `(m, n)`,
/// so the change of variables is a relabelling with unit Jacobian; pairs of
/// mismatched parity carry no amplitude.
pub fn relative_state(
    state: &JointObjectDeviceState,
    c1: &TransferFunctions,
    c2: &TransferFunctions,
    j: usize,
    k: usize,
) -> Result<RelativeState> {
    check_devices(c1, c2)?;
    if j >= c1.n_blocks() || k >= c2.n_blocks() {
        return Err(ModalError::InvalidParameter(format!("outcome ({j}, {k}) out of range")));
    }
    let idx = RelativeIndex::new(state, &c1.grid)?;
    let (m_len, n_len) = (state.x_grid.len(), state.y_grid.len());
    let n_diff = m_len + n_len - 1;
    let n_sum = m_len + n_len - 1;
    let mut a = CMatrix::from_element(n_diff, n_sum, ZERO);
    for m in 0..m_len {
        for n in 0..n_len {
            if let Some(r) = idx.get(m, n) {
                let amp = state.psi[(m, n)] * c1.c[(j, r)] * c2.c[(k, r)];
                a[(m + n_len - 1 - n, m + n)] = amp;
            }
        }
    }
    let probability = a.norm_squared();
    if probability <= 1e-14 {
        return Err(ModalError::ZeroProbabilityBranch(probability));
    }
    a.unscale_mut(probability.sqrt());
    let rho = &a * a.adjoint();
    let com_marginal = (0..n_sum).map(|s| a.column(s).norm_squared()).collect();
    let dx = state.x_grid.dx();
    let rel_positions = (0..n_diff)
        .map(|i| state.rel_value(i as i64 - (n_len as i64 - 1)))
        .collect();
    let com_positions = (0..n_sum)
        .map(|s| 0.5 * (state.x_grid.x_min() + state.y_grid.x_min()) + 0.5 * (s as f64 + 1.0) * dx)
        .collect();
    Ok(RelativeState {
        rel_positions,
        rho,
        com_positions,
        com_marginal,
        probability,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::photon::{build_transfer_functions, ImageMap};

    fn setup() -> (ObjectGrid, ObjectGrid, TransferFunctions) {
        let xg = ObjectGrid::new(0.0, 16.0, 16).unwrap();
        let yg = ObjectGrid::new(0.0, 16.0, 16).unwrap();
        let rel = ObjectGrid::new(-15.5, 15.5, 31).unwrap();
        let t = build_transfer_functions(&rel, 3, 3.0, ImageMap::IDENTITY).unwrap();
        (xg, yg, t)
    }

    #[test]
    fn point_masses_factorize() {
        let (xg, yg, t) = setup();
        let mut psi = CMatrix::zeros(16, 16);
        psi[(9, 3)] = c(1.0, 0.0);
        let s = JointObjectDeviceState::new(xg, yg, psi).unwrap();
        let p = deloc_joint_prob(&s, &t, &t).unwrap();
        // x - y = 6, the grid point with index 21
        for j in 0..3 {
            for k in 0..3 {
                let want = t.c[(j, 21)].norm_sqr() * t.c[(k, 21)].norm_sqr();
                assert!((p.p[(j, k)] - want).abs() < 1e-15);
            }
        }
        let r = relative_state(&s, &t, &t, 2, 2).unwrap();
        assert!(r.rel_std() < 1e-12);
        assert!((r.rel_positions[9 + 15 - 3] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_spacing_rejected() {
        let xg = ObjectGrid::new(0.0, 16.0, 16).unwrap();
        let yg = ObjectGrid::new(0.0, 16.0, 8).unwrap();
        let psi = CMatrix::from_element(16, 8, c(0.25 / 2f64.sqrt(), 0.0));
        assert!(JointObjectDeviceState::new(xg, yg, psi).is_err());
    }

    #[test]
    fn mass_off_the_relative_grid() {
        let xg = ObjectGrid::new(0.0, 16.0, 16).unwrap();
        let yg = ObjectGrid::new(0.0, 16.0, 16).unwrap();
        let rel = ObjectGrid::new(-2.5, 2.5, 5).unwrap();
        let t = build_transfer_functions(&rel, 2, 1.0, ImageMap::IDENTITY).unwrap();
        let mut psi = CMatrix::zeros(16, 16);
        psi[(12, 0)] = c(1.0, 0.0);
        let s = JointObjectDeviceState::new(xg.clone(), yg.clone(), psi.clone()).unwrap();
        assert_eq!(deloc_joint_prob(&s, &t, &t), Err(ModalError::NoDetectableMass));
        psi[(12, 0)] = c(0.6, 0.0);
        psi[(3, 3)] = c(0.8, 0.0);
        let s = JointObjectDeviceState::new(xg, yg, psi).unwrap();
        assert!(matches!(
            deloc_joint_prob(&s, &t, &t),
            Err(ModalError::MassOutsideDetector(_))
        ));
    }
}
