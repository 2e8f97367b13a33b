//! One scattered photon, N receptor blocks, N displays.
//!
//! Object densities are stored as discrete matrices whose diagonal already
//! carries the cell width, so `Σ_m ρ[m][m] = 1`.

use crate::error::{ModalError, Result};
use crate::hilbert::{CompositeSpace, DensityOperator, HERMITIAN_TOL, PSD_TOL, TRACE_TOL};
use crate::linalg::{c, hermiticity_residual, is_psd, trace, CMatrix, CVector, C64, ZERO};

/// Cell-centred uniform grid: `x_m = x_min + (m + ½)Δx`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectGrid {
    x_min: f64,
    x_max: f64,
    m: usize,
}

impl ObjectGrid {
    pub fn new(x_min: f64, x_max: f64, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(ModalError::InvalidParameter("grid needs at least one point".into()));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(ModalError::InvalidParameter(format!(
                "grid interval [{x_min}, {x_max}) is empty"
            )));
        }
        Ok(Self { x_min, x_max, m })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.m as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.x(i)).collect()
    }

    /// Index of the cell containing `x`, if any.
    pub fn cell_of(&self, x: f64) -> Option<usize> {
        let k = ((x - self.x_min) / self.dx()).floor();
        (k >= 0.0 && (k as usize) < self.m).then_some(k as usize)
    }
}

/// Affine geometric-optics map from object position to receptor coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageMap {
    pub scale: f64,
    pub offset: f64,
}

impl ImageMap {
    pub const IDENTITY: ImageMap = ImageMap {
        scale: 1.0,
        offset: 0.0,
    };

    pub fn new(scale: f64, offset: f64) -> Result<Self> {
        if scale == 0.0 || !scale.is_finite() || !offset.is_finite() {
            return Err(ModalError::InvalidParameter(format!(
                "image map scale must be finite and nonzero, got {scale}"
            )));
        }
        Ok(Self { scale, offset })
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.scale * x + self.offset
    }

    pub fn invert(&self, y: f64) -> f64 {
        (y - self.offset) / self.scale
    }
}

/// Receptor block centres on the image side.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockArray {
    pub centers: Vec<f64>,
    pub pitch: f64,
}

impl BlockArray {
    /// `n` blocks tiling the image of the grid interval.
    pub fn tiling(grid: &ObjectGrid, n: usize, image: ImageMap) -> Result<Self> {
        if n < 2 {
            return Err(ModalError::InvalidParameter(format!(
                "receptor array needs at least 2 blocks, got {n}"
            )));
        }
        let step = grid.length() / n as f64;
        let mut centers: Vec<f64> = (0..n)
            .map(|j| image.apply(grid.x_min() + (j as f64 + 0.5) * step))
            .collect();
        if image.scale < 0.0 {
            centers.reverse();
        }
        Ok(Self {
            centers,
            pitch: image.scale.abs() * step,
        })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    fn span(&self) -> (f64, f64) {
        let lo = self.centers.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.centers.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo - 0.5 * self.pitch, hi + 0.5 * self.pitch)
    }
}

/// `c[j][m] = c_j(x_m)`, with `Σ_j |c_j(x_m)|² = 1` for every column.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunctions {
    pub c: CMatrix,
    pub blocks: BlockArray,
    pub sigma: f64,
    pub image: ImageMap,
    pub grid: ObjectGrid,
}

impl TransferFunctions {
    /// Gaussian point spread `exp(-(image(x) - y_j)² / (4σ²))`, normalised per
    /// column. Evaluated in the log domain so that very narrow widths reduce
    /// to the nearest block instead of underflowing.
    pub fn gaussian(grid: &ObjectGrid, blocks: BlockArray, sigma: f64, image: ImageMap) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(ModalError::InvalidParameter(format!(
                "transfer width sigma must be positive, got {sigma}"
            )));
        }
        if blocks.len() < 2 {
            return Err(ModalError::InvalidParameter(
                "receptor array needs at least 2 blocks".into(),
            ));
        }
        let (lo, hi) = blocks.span();
        let n = blocks.len();
        let mut c_mat = CMatrix::zeros(n, grid.len());
        let mut logs = vec![0.0; n];
        for m in 0..grid.len() {
            let x = grid.x(m);
            let y = image.apply(x);
            if y < lo - 1e-9 * blocks.pitch || y > hi + 1e-9 * blocks.pitch {
                return Err(ModalError::ImageOutsideDetector { x, image: y });
            }
            for (l, yc) in logs.iter_mut().zip(&blocks.centers) {
                *l = -(y - yc).powi(2) / (4.0 * sigma * sigma);
            }
            let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let norm: f64 = logs.iter().map(|l| (2.0 * (l - top)).exp()).sum::<f64>().sqrt();
            for (j, l) in logs.iter().enumerate() {
                c_mat[(j, m)] = c((l - top).exp() / norm, 0.0);
            }
        }
        Ok(Self {
            c: c_mat,
            blocks,
            sigma,
            image,
            grid: grid.clone(),
        })
    }

    pub fn n_blocks(&self) -> usize {
        self.c.nrows()
    }

    pub fn n_points(&self) -> usize {
        self.c.ncols()
    }

    /// Width of the point spread mapped back to object coordinates.
    pub fn sigma_image(&self) -> f64 {
        self.sigma / self.image.scale.abs()
    }

    /// Block whose image-side centre is closest to the image of `x`.
    pub fn nearest_block(&self, x: f64) -> usize {
        let y = self.image.apply(x);
        let mut best = 0;
        for (j, yc) in self.blocks.centers.iter().enumerate() {
            if (y - yc).abs() < (y - self.blocks.centers[best]).abs() {
                best = j;
            }
        }
        best
    }

    /// Object-side position whose image is the centre of block `j`.
    pub fn block_position(&self, j: usize) -> f64 {
        self.image.invert(self.blocks.centers[j])
    }

    /// Largest deviation of a column norm from one.
    pub fn normalization_residual(&self) -> f64 {
        (0..self.n_points())
            .map(|m| (self.c.column(m).norm_squared() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Transfer functions with `n` tiled blocks.
pub fn build_transfer_functions(grid: &ObjectGrid, n: usize, sigma: f64, image: ImageMap) -> Result<TransferFunctions> {
    let blocks = BlockArray::tiling(grid, n, image)?;
    TransferFunctions::gaussian(grid, blocks, sigma, image)
}

/// Object density in the coordinate basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectDensity {
    pub grid: ObjectGrid,
    pub rho: CMatrix,
}

impl ObjectDensity {
    pub fn new(grid: ObjectGrid, rho: CMatrix) -> Result<Self> {
        if rho.nrows() != grid.len() || rho.ncols() != grid.len() {
            return Err(ModalError::DimensionMismatch(format!(
                "density is {}x{} on a grid of {} points",
                rho.nrows(),
                rho.ncols(),
                grid.len()
            )));
        }
        validate_density(&rho)?;
        Ok(Self { grid, rho })
    }

    /// `|ψ><ψ|` for grid amplitudes `ψ_m`, normalised so `Σ|ψ_m|² = 1`.
    pub fn from_amplitudes(grid: ObjectGrid, psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if psi.len() != grid.len() {
            return Err(ModalError::DimensionMismatch(format!(
                "{} amplitudes on a grid of {} points",
                psi.len(),
                grid.len()
            )));
        }
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(ModalError::InvalidState("wave function has zero norm".into()));
        }
        let v = psi.unscale(norm);
        Ok(Self {
            grid,
            rho: &v * v.adjoint(),
        })
    }

    /// Flat pure state spread over the whole grid.
    pub fn uniform_pure(grid: ObjectGrid) -> Self {
        let m = grid.len();
        let v = CVector::from_element(m, c(1.0 / (m as f64).sqrt(), 0.0));
        Self {
            grid,
            rho: &v * v.adjoint(),
        }
    }

    /// Point mass at grid index `i`.
    pub fn delta(grid: ObjectGrid, i: usize) -> Self {
        let mut rho = CMatrix::zeros(grid.len(), grid.len());
        rho[(i, i)] = c(1.0, 0.0);
        Self { grid, rho }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rho.nrows()).map(|i| self.rho[(i, i)].re).collect()
    }

    pub fn mean_position(&self) -> f64 {
        let d = self.diagonal();
        d.iter().enumerate().map(|(i, p)| p * self.grid.x(i)).sum()
    }

    pub fn position_std(&self) -> f64 {
        position_std(&self.grid, &self.diagonal())
    }

    pub fn to_density_operator(&self, name: &str) -> Result<DensityOperator> {
        DensityOperator::new(CompositeSpace::from_dims(&[(name, self.grid.len())])?, self.rho.clone())
    }
}

/// Standard deviation of position for a probability vector on `grid`.
pub fn position_std(grid: &ObjectGrid, probs: &[f64]) -> f64 {
    let total: f64 = probs.iter().sum();
    let mean: f64 = probs.iter().enumerate().map(|(i, p)| p * grid.x(i)).sum::<f64>() / total;
    let var: f64 = probs
        .iter()
        .enumerate()
        .map(|(i, p)| p * (grid.x(i) - mean).powi(2))
        .sum::<f64>()
        / total;
    var.max(0.0).sqrt()
}

fn validate_density(rho: &CMatrix) -> Result<()> {
    let herm = hermiticity_residual(rho);
    if herm > HERMITIAN_TOL {
        return Err(ModalError::NotHermitian(herm));
    }
    let tr = trace(rho);
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(ModalError::InvalidState(format!("object density has trace {tr}")));
    }
    if !is_psd(rho, PSD_TOL) {
        return Err(ModalError::InvalidState(
            "object density is not positive semidefinite".into(),
        ));
    }
    Ok(())
}

fn check_same_grid(rho: &ObjectDensity, c: &TransferFunctions) -> Result<()> {
    if rho.grid.len() != c.n_points() {
        return Err(ModalError::DimensionMismatch(format!(
            "object grid has {} points, transfer functions expect {}",
            rho.grid.len(),
            c.n_points()
        )));
    }
    Ok(())
}

/// `p_j = Σ_m ρ[m][m] |c_j(x_m)|²`.
pub fn display_probabilities(rho: &ObjectDensity, c: &TransferFunctions) -> Result<Vec<f64>> {
    check_same_grid(rho, c)?;
    let diag = rho.diagonal();
    Ok((0..c.n_blocks())
        .map(|j| diag.iter().enumerate().map(|(m, p)| p * c.c[(j, m)].norm_sqr()).sum())
        .collect())
}

/// Overlaps `K[m'][m] = <ξ_{x_m'}|ξ_{x_m}>` of recoiled object states.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoilKernel {
    pub kernel: CMatrix,
    /// Packet width `w`; `None` for the two limiting kernels and custom ones.
    pub width: Option<f64>,
}

impl RecoilKernel {
    /// Recoil-free limit: distinct positions stay orthogonal.
    pub fn orthogonal(m: usize) -> Self {
        Self {
            kernel: CMatrix::identity(m, m),
            width: None,
        }
    }

    /// All recoiled states identical, the `w → ∞` limit.
    pub fn coherent(m: usize) -> Self {
        Self {
            kernel: CMatrix::from_element(m, m, c(1.0, 0.0)),
            width: None,
        }
    }

    /// Gaussian packets of width `w` displaced by a common momentum kick,
    /// whose overlaps are `exp(-(x - x')² / (8w²))`.
    pub fn gaussian(grid: &ObjectGrid, w: f64) -> Result<Self> {
        if !(w > 0.0) {
            return Err(ModalError::InvalidParameter(format!(
                "recoil packet width must be positive, got {w}"
            )));
        }
        let m = grid.len();
        let kernel = CMatrix::from_fn(m, m, |a, b| {
            let d = grid.x(a) - grid.x(b);
            c((-d * d / (8.0 * w * w)).exp(), 0.0)
        });
        Ok(Self { kernel, width: Some(w) })
    }

    /// Validates a user-supplied overlap matrix.
    pub fn custom(kernel: CMatrix) -> Result<Self> {
        let herm = hermiticity_residual(&kernel);
        if herm > HERMITIAN_TOL {
            return Err(ModalError::NotHermitian(herm));
        }
        for i in 0..kernel.nrows() {
            if (kernel[(i, i)] - c(1.0, 0.0)).norm() > 1e-10 {
                return Err(ModalError::InvalidParameter(format!(
                    "recoil kernel diagonal entry {i} is {}",
                    kernel[(i, i)]
                )));
            }
        }
        if !is_psd(&kernel, PSD_TOL) {
            return Err(ModalError::InvalidParameter(
                "recoil kernel is not positive semidefinite".into(),
            ));
        }
        Ok(Self { kernel, width: None })
    }
}

/// Outcome probabilities with recoil.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoilProbabilities {
    /// `Σ_{m,m'} ρ(x_m,x_m') c_j(x_m) c_j*(x_m') K[m'][m]` as written.
    pub raw: Vec<f64>,
    /// `Σ_j raw_j`, the squared norm of the recoiled post-absorption state.
    pub norm: f64,
    /// `raw / norm`.
    pub probabilities: Vec<f64>,
}

pub fn display_probabilities_recoil(
    rho: &ObjectDensity,
    c: &TransferFunctions,
    kernel: &RecoilKernel,
) -> Result<RecoilProbabilities> {
    check_same_grid(rho, c)?;
    let m = c.n_points();
    if kernel.kernel.nrows() != m || kernel.kernel.ncols() != m {
        return Err(ModalError::DimensionMismatch(format!(
            "recoil kernel is {}x{}, grid has {m} points",
            kernel.kernel.nrows(),
            kernel.kernel.ncols()
        )));
    }
    // ρ ∘ Kᵀ, so that entry (m, m') carries K[m'][m]
    let weighted = rho.rho.component_mul(&kernel.kernel.transpose());
    let mut raw = Vec::with_capacity(c.n_blocks());
    for j in 0..c.n_blocks() {
        let row: CVector = c.c.row(j).transpose();
        // Σ_{m,m'} c_j(m) W[m][m'] c_j*(m')
        let wc = &weighted * row.conjugate();
        let p: C64 = row.iter().zip(wc.iter()).map(|(a, b)| a * b).sum();
        if p.re < -1e-10 {
            return Err(ModalError::Invariant(format!(
                "recoil probability for block {j} is {:.3e}; kernel is not a valid overlap matrix",
                p.re
            )));
        }
        raw.push(p.re.max(0.0));
    }
    let norm: f64 = raw.iter().sum();
    if !(norm > 0.0) {
        return Err(ModalError::NoDetectableMass);
    }
    let probabilities = raw.iter().map(|p| p / norm).collect();
    Ok(RecoilProbabilities {
        raw,
        norm,
        probabilities,
    })
}

/// `K(x, x') = Σ_j c_j(x) c_j*(x')`.
pub fn photon_kernel(c: &TransferFunctions) -> CMatrix {
    c.c.transpose() * c.c.conjugate()
}

/// `ρ̃(x, x') = ρ(x, x') K(x, x')`: the object once the light has been absorbed
/// and the displays are traced out.
pub fn object_state_after_light(rho: &ObjectDensity, c: &TransferFunctions) -> Result<ObjectDensity> {
    check_same_grid(rho, c)?;
    Ok(ObjectDensity {
        grid: rho.grid.clone(),
        rho: rho.rho.component_mul(&photon_kernel(c)),
    })
}

/// The object as seen from everything but the displays, given display `j`
/// fired: `c_j(x) ρ(x, x') c_j*(x') / p_j`.
pub fn relational_object_state(rho: &ObjectDensity, c: &TransferFunctions, j: usize) -> Result<ObjectDensity> {
    check_same_grid(rho, c)?;
    if j >= c.n_blocks() {
        return Err(ModalError::InvalidParameter(format!(
            "block {j} out of range for {} blocks",
            c.n_blocks()
        )));
    }
    let row: CVector = c.c.row(j).transpose();
    let m = c.n_points();
    let mut out = CMatrix::from_fn(m, m, |a, b| row[a] * rho.rho[(a, b)] * row[b].conj());
    let p = trace(&out).re;
    if p <= 1e-14 {
        return Err(ModalError::ZeroProbabilityBranch(p));
    }
    out.unscale_mut(p);
    Ok(ObjectDensity {
        grid: rho.grid.clone(),
        rho: out,
    })
}

/// One term of a general entangled post-measurement state: a definite reading
/// on every display, an amplitude, and the normalised state of everything else.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplayBranch {
    pub readings: Vec<usize>,
    pub amplitude: C64,
    pub rest: CVector,
}

/// Reduced density of the displays for `Σ_b a_b |readings_b> ⊗ |rest_b>`.
/// Displays are named `d0, d1, ...`.
pub fn generic_display_density(display_dims: &[usize], branches: &[DisplayBranch]) -> Result<DensityOperator> {
    let names: Vec<String> = (0..display_dims.len()).map(|i| format!("d{i}")).collect();
    let parts: Vec<(&str, usize)> = names
        .iter()
        .map(String::as_str)
        .zip(display_dims.iter().copied())
        .collect();
    let space = CompositeSpace::from_dims(&parts)?;
    let dim = space.dim();
    let mut index = Vec::with_capacity(branches.len());
    for b in branches {
        if b.readings.len() != display_dims.len() {
            return Err(ModalError::DimensionMismatch(format!(
                "branch has {} readings for {} displays",
                b.readings.len(),
                display_dims.len()
            )));
        }
        let mut flat = 0;
        for (r, d) in b.readings.iter().zip(display_dims) {
            if r >= d {
                return Err(ModalError::InvalidParameter(format!(
                    "reading {r} exceeds display dimension {d}"
                )));
            }
            flat = flat * d + r;
        }
        let n = b.rest.norm();
        if (n - 1.0).abs() > 1e-10 {
            return Err(ModalError::InvalidState(format!("branch state has norm {n}")));
        }
        index.push(flat);
    }
    let mut rho = CMatrix::from_element(dim, dim, ZERO);
    for (b, &i) in branches.iter().zip(&index) {
        for (b2, &i2) in branches.iter().zip(&index) {
            rho[(i, i2)] += b.amplitude * b2.amplitude.conj() * b2.rest.dotc(&b.rest);
        }
    }
    let tr = trace(&rho).re;
    if !(tr > 0.0) {
        return Err(ModalError::InvalidState("all branch amplitudes vanish".into()));
    }
    DensityOperator::new(space, rho.unscale(tr))
}
