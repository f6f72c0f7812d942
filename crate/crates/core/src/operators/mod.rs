//! Collision operators on the velocity lattice.

mod bilinear;
mod cancellation;
mod landau;
mod linearized;
mod quadrature;
pub mod reference;
mod scatter;
mod weak;

pub use bilinear::{
    collision_bilinear, dissipation, gamma_bilinear, linearized_by_composition, remainder_i,
    sqrt_maxwellian, weak_form, SQRT_MU_FLOOR,
};
pub use cancellation::{cancellation_identity, CancellationQuadrature, Profile};
pub use landau::{
    gamma_landau, gradient4, interior_mask, landau_bilinear, landau_flux, LandauScheme,
};
pub use linearized::{
    linearized_apply, linearized_matrix, linearized_matrix_capped, LinearizedSweep,
    DEFAULT_MEMORY_CAP, MAX_ASSEMBLY_N,
};
pub use quadrature::{
    antisymmetric_frame, AzimuthNode, CollisionPlan, CollisionQuadrature, OperatorKind, PairEntry,
    SigmaNode,
};
pub use weak::{operator_difference, WeakFormMode, WeakFormSpec};
