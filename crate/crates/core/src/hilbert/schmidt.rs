use crate::error::{ModalError, Result};
use crate::linalg::{fix_phase, CVector};

use super::state::{reshape, PureState};

/// One term `s · |left> ⊗ |right>` of a Schmidt decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtTerm {
    pub coeff: f64,
    pub left: CVector,
    pub right: CVector,
}

/// Schmidt decomposition of `psi` across (`side`, complement).
///
/// Terms with coefficient below `1e-14` are dropped. Left vectors live on the
/// named side, right vectors on the remaining factors, both in the parent
/// space's factor order.
pub fn schmidt_decompose<S: AsRef<str>>(psi: &PureState, side: &[S]) -> Result<Vec<SchmidtTerm>> {
    let space = psi.space();
    let positions = space.positions(side)?;
    if positions.len() == space.len() {
        return Err(ModalError::EmptySelection);
    }
    let split = space.split(&positions);
    let a = reshape(psi.amplitudes(), &split);
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("svd requested u");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let mut out = Vec::new();
    for k in order {
        let s = svd.singular_values[k];
        if s < 1e-14 {
            continue;
        }
        let mut left: CVector = u.column(k).into_owned();
        fix_phase(&mut left);
        // partner vector from <left| A, so the pair carries a consistent phase
        let right: CVector = (a.transpose() * left.conjugate()).unscale(s);
        out.push(SchmidtTerm { coeff: s, left, right });
    }
    Ok(out)
}
