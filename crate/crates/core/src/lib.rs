//! Numerical laboratory for the Boltzmann operator with a cutoff
//! Rutherford cross section, its grazing (Landau) limit, and the
//! linearized and spectral machinery around the global Maxwellian.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod evolve;
pub mod grid;
pub mod kernel;
pub mod operators;
pub mod par;
pub mod quad;
pub mod spectral;

pub use error::{LabError, LabResult};
