//! Labelled tensor-product spaces, states on them, and their spectra.

mod schmidt;
mod space;
mod spectral;
mod state;

pub use schmidt::{schmidt_decompose, SchmidtTerm};
pub use space::{CompositeSpace, Subsystem};
pub use spectral::{rank_one, spectral_resolution, SpectralEntry, SpectralResolution, DEFAULT_DEGENERACY_TOL};
pub use state::{DensityOperator, PureState, QuantumState, HERMITIAN_TOL, NORM_TOL, PSD_TOL, TRACE_TOL, UNITARY_TOL};
