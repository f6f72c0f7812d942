//! Velocity lattice, fields, sphere quadrature, interpolation, and the
//! Fourier and spherical-harmonic multipliers behind the weighted norms.

mod field;
pub mod fourier;
pub mod harmonics;
pub mod interp;
mod norms;
mod sphere;
mod velocity;

pub use field::{maxwellian, maxwellian_at, DistributionField, FieldRole};
pub use fourier::{apply_fourier_multiplier, apply_fourier_weight};
pub use harmonics::{apply_anisotropic_weight, real_harmonics, SphericalHarmonicPlan};
pub use norms::{triple_norm, weighted_l2_norm, TripleNorm};
pub use sphere::{
    build_sphere_quadrature, sphere_monomial, SphereBackend, SphereQuadrature, LEBEDEV_DEGREES,
};
pub use velocity::VelocityGrid;
