//! Time integration of the homogeneous perturbation equations and the
//! experiment drivers built on the spectral tools.

mod experiments;
mod linear;
mod nonlinear;
mod report;

pub use experiments::{
    cancellation_experiment, coercivity_experiment, conservation_defect, evolution_experiment,
    gap_sweep_experiment, hermite_perturbation, invariants_experiment, landau_limit_experiment,
    moment_verification_experiment, null_space_check, LandauLimitConfig, LimitMode, SweepConfig,
    CANCELLATION_TOLERANCE, CLOSED_FORM_TOLERANCE, CONSERVATION_TOLERANCE, DEGENERATE_FLOOR,
    DRIFT_TOLERANCE, NORM_SLACK, NULL_TOLERANCE, UNIFORMITY_RATIO,
};
pub use linear::{evolve_linear, LinearPropagator};
pub use nonlinear::{
    evolve_nonlinear, EvolutionConfig, Sample, Scheme, Trajectory, INITIAL_MOMENT_TOLERANCE,
    RK4_CFL,
};
pub use report::{ols_fit, ExperimentReport, Fit, Gate, MIN_R_SQUARED};
