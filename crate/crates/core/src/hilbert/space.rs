use std::fmt;

use crate::error::{ModalError, Result};

/// A named tensor factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subsystem {
    name: String,
    dim: usize,
}

impl Subsystem {
    pub fn new(name: impl Into<String>, dim: usize) -> Result<Self> {
        let name = name.into();
        if dim == 0 {
            return Err(ModalError::InvalidParameter(format!(
                "subsystem `{name}` must have dimension >= 1"
            )));
        }
        Ok(Self { name, dim })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// An ordered tensor product of named factors.
///
/// Basis states are indexed row-major lexicographically: the first factor is
/// the most significant digit, so for factors with dimensions `d_0, .., d_{n-1}`
/// the digits `(i_0, .., i_{n-1})` map to `Σ_k i_k · Π_{l>k} d_l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeSpace {
    parts: Vec<Subsystem>,
}

impl CompositeSpace {
    pub fn new(parts: Vec<Subsystem>) -> Result<Self> {
        if parts.is_empty() {
            return Err(ModalError::EmptySelection);
        }
        for (i, p) in parts.iter().enumerate() {
            if parts[..i].iter().any(|q| q.name == p.name) {
                return Err(ModalError::NameCollision(p.name.clone()));
            }
        }
        Ok(Self { parts })
    }

    /// Convenience constructor from `(name, dim)` pairs.
    pub fn from_dims(parts: &[(&str, usize)]) -> Result<Self> {
        let parts = parts
            .iter()
            .map(|(n, d)| Subsystem::new(*n, *d))
            .collect::<Result<Vec<_>>>()?;
        Self::new(parts)
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.parts.iter().map(|p| p.dim).product()
    }

    pub fn names(&self) -> Vec<&str> {
        self.parts.iter().map(|p| p.name.as_str()).collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.parts.iter().any(|p| p.name == name)
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.parts
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| ModalError::UnknownSubsystem(name.to_string()))
    }

    /// Positions of the named factors, sorted into this space's order.
    pub fn positions<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        if names.is_empty() {
            return Err(ModalError::EmptySelection);
        }
        let mut pos = names
            .iter()
            .map(|n| self.position(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        pos.sort_unstable();
        pos.dedup();
        Ok(pos)
    }

    /// The sub-space made of the factors at `positions`, in this space's order.
    pub fn sub_space(&self, positions: &[usize]) -> CompositeSpace {
        let mut pos = positions.to_vec();
        pos.sort_unstable();
        pos.dedup();
        CompositeSpace {
            parts: pos.iter().map(|&i| self.parts[i].clone()).collect(),
        }
    }

    /// Positions not listed in `positions`.
    pub fn complement_positions(&self, positions: &[usize]) -> Vec<usize> {
        (0..self.parts.len()).filter(|i| !positions.contains(i)).collect()
    }

    /// Concatenation `self ⊗ other`.
    pub fn join(&self, other: &CompositeSpace) -> Result<CompositeSpace> {
        let mut parts = self.parts.clone();
        parts.extend(other.parts.iter().cloned());
        CompositeSpace::new(parts)
    }

    /// Decomposes every basis index into (selected, remainder) indices.
    pub(crate) fn split(&self, positions: &[usize]) -> IndexSplit {
        let n = self.parts.len();
        let dims: Vec<usize> = self.parts.iter().map(|p| p.dim).collect();
        let selected: Vec<bool> = (0..n).map(|i| positions.contains(&i)).collect();
        let mut sel_stride = vec![0; n];
        let mut rest_stride = vec![0; n];
        let (mut s, mut r) = (1usize, 1usize);
        for k in (0..n).rev() {
            if selected[k] {
                sel_stride[k] = s;
                s *= dims[k];
            } else {
                rest_stride[k] = r;
                r *= dims[k];
            }
        }
        let (sel_dim, rest_dim) = (s, r);
        let total = sel_dim * rest_dim;
        let mut sel = vec![0usize; total];
        let mut rest = vec![0usize; total];
        let mut digits = vec![0usize; n];
        let (mut si, mut ri) = (0usize, 0usize);
        for full in 0..total {
            sel[full] = si;
            rest[full] = ri;
            // increment the mixed-radix counter, last factor fastest
            for k in (0..n).rev() {
                digits[k] += 1;
                if selected[k] {
                    si += sel_stride[k];
                } else {
                    ri += rest_stride[k];
                }
                if digits[k] < dims[k] {
                    break;
                }
                digits[k] = 0;
                if selected[k] {
                    si -= sel_stride[k] * dims[k];
                } else {
                    ri -= rest_stride[k] * dims[k];
                }
            }
        }
        let mut inverse = vec![0usize; total];
        for full in 0..total {
            inverse[sel[full] * rest_dim + rest[full]] = full;
        }
        IndexSplit {
            sel_dim,
            rest_dim,
            inverse,
        }
    }
}

impl fmt::Display for CompositeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(|p| format!("{}({})", p.name, p.dim)).collect();
        write!(f, "{}", parts.join(" ⊗ "))
    }
}

/// Index bookkeeping for viewing a vector on the full space as a
/// `sel_dim × rest_dim` matrix.
pub(crate) struct IndexSplit {
    pub sel_dim: usize,
    pub rest_dim: usize,
    /// `inverse[a * rest_dim + r]` is the full index of selected `a`, remainder `r`.
    pub inverse: Vec<usize>,
}

impl IndexSplit {
    #[inline]
    pub fn full(&self, a: usize, r: usize) -> usize {
        self.inverse[a * self.rest_dim + r]
    }
}
