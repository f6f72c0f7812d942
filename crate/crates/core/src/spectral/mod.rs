//! Linearized-operator laboratory: collision invariants and the
//! macro-micro split, the thirteen-moment Gram matrix, dense operator
//! matrices, spectral gap and coercivity estimates.

mod basis;
mod coercivity;
mod gap;
mod gram;
mod matrix;

pub use basis::{project_null, MacroState, ProjectionBasis};
pub use coercivity::{
    coercivity_constant, CoercivityEstimate, CoercivityFamily, LANDAU_WEIGHT_EPSILON,
};
pub use gap::{spectral_gap, GapEstimate};
pub use gram::{analytic_gram, gaussian_moment, gram_matrix, ThirteenMomentBasis};
pub use matrix::{
    null_count, read_spectrum_csv, spectral_norm, write_spectrum_csv, LinearOperatorMatrix,
    ASYMMETRY_FLAG, NULL_TOLERANCE,
};
