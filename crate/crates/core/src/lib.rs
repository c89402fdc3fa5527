//! Decide and construct LOCC convertibility between bipartite pure states
//! relative to finite-dimensional von Neumann algebras in standard form.
//!
//! The ambient algebra is a finite direct sum of full matrix blocks with a
//! weighted trace. States live in the GNS space `L²(A, τ)` stored blockwise;
//! the commutant acts by right multiplication through the modular
//! conjugation. On top of that sit singular value functions and
//! majorisation, side-constrained Kraus maps and one-way protocols, the
//! majorisation criterion with explicit protocol synthesis, and the entropy
//! of the singular value distribution as an entanglement monotone.

pub mod algebra;
pub mod channels;
pub mod convert;
pub mod error;
pub mod examples;
pub mod json;
mod linalg;
pub mod monotone;
pub mod rand_gen;
pub mod spectral;

pub use algebra::{make_algebra, AlgElement, Algebra, Density, Side, StdVector};
pub use channels::{
    bimodule_commutation_defect, lo_popescu_transfer, pinch_defect, CpMap, Instrument, KrausMap,
    LoccMap, OneWayProtocol, Party, ProtocolDirection,
};
pub use convert::{
    birkhoff, decide_convertible, decide_convertible_abelian, mixing_decomposition,
    reduce_to_one_way, synthesize_protocol, transfer_matrix, verify_protocol, DoublyStochastic,
    MixingDecomposition,
};
pub use error::{Error, Result};
pub use monotone::{check_monotonicity, entropy_relative_to_trace};
pub use spectral::{majorises, majorises_density, singular_value_function, StepFunction};


/// Relative tolerance for state / operator equality checks.
pub const TOL_EQ: f64 = 1e-9;
/// Eigenvalues in `[-TOL_PSD, 0)` are clipped to zero; anything below is an error.
pub const TOL_PSD: f64 = 1e-10;
