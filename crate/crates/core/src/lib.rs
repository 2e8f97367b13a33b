//! Relational state assignment on finite-dimensional tensor-product spaces,
//! with the receptor/display measurement models built on top of it.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decoherence;
pub mod deloc;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod observers;
pub mod oracle;
pub mod photon;
pub mod relational;

pub use error::{ModalError, Result};
