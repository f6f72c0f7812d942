//! Kernel-level objects: the cutoff angular function, kinetic kernel,
//! collision map, angular moments, weights, the cancellation kernel, the
//! Landau matrix and the frequency symbol.

mod angular;
mod bump;
mod cancellation;
mod landau;
mod params;
mod symbol;
mod weight;

pub use angular::{
    angular_b, angular_b_of_t, angular_moment, angular_moment_quadrature, kinetic_kernel, lambda1,
    lambda1_quadrature, post_collision, Vec3,
};
pub use bump::{bump_profile, BumpPartition};
pub use cancellation::{
    cancellation_kernel, j_l1_norm, j_l1_norm_angular, j_radial, j_radial_by_gap, j_radial_closed,
};
pub use landau::landau_matrix;
pub use params::KernelParams;
pub use symbol::symbol_a;
pub use weight::{bracket, polynomial_weight, CharacteristicWeight};
