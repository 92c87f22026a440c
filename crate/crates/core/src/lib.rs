//! Finite-N Kuramoto dynamics and its mean-field kinetic limit.
//!
//! Everything is generic over the floating-point type through [`Real`]
//! (implemented for `f32` and `f64`); the aliases below fix the scalar for
//! the common cases.

// Positivity checks are written as `!(x > 0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod frequency;
pub mod integrator;
pub mod kinetic;
pub mod mean_field;
pub mod quadrature;
pub mod scalar;
pub mod stationary;

pub use dynamics::{
    finite_n_rhs, h_functional_finite, mean_field_rhs, mean_phase, order_parameter, pairwise_rhs, potential_u,
    r_dot_identical, OrderParameter, OscillatorEnsemble, R_MIN,
};
pub use error::{Error, Result};
pub use frequency::{FrequencyDistribution, TruncatedGaussian};
pub use integrator::{
    detect_stationarity, random_identical_ensemble, random_phases, seeded_rng, simulate, step_rk4, unit_uniform,
    SimConfig, StopReason, Trajectory,
};
pub use kinetic::{
    characteristic_targets, discretize, entropy_change, fourier_moment, h_functional, joint_observable, kinetic_step,
    log_jacobian_functional, observable, r_phi_dot_nonidentical, simulate_kinetic, summarize_targets, velocities, Atom,
    DensitySpec, EntropyChange, KineticTrajectory, Particle, PhaseLaw, PhaseMeasure, Target, TargetSummary,
};
pub use mean_field::{
    critical_coupling, critical_coupling_with, self_consistency_residual, self_consistency_roots,
    self_consistency_roots_with, stationary_density, SelfConsistencyResult, SolverOptions, StationaryDensity,
};
pub use scalar::{angular_distance, wrap_angle, Real};
pub use stationary::{
    classify_finite, classify_measure, three_oscillator_ensemble, three_oscillator_limit, three_oscillator_limit_with,
    three_oscillator_rate, ClusterCounts, StationaryClass, ThreeOscillatorLimit,
};

pub type EnsembleF64 = OscillatorEnsemble<f64>;
pub type EnsembleF32 = OscillatorEnsemble<f32>;
pub type TrajectoryF64 = Trajectory<f64>;
pub type SimConfigF64 = SimConfig<f64>;
pub type MeasureF64 = PhaseMeasure<f64>;
pub type MeasureF32 = PhaseMeasure<f32>;
pub type KineticTrajectoryF64 = KineticTrajectory<f64>;
pub type FrequencyDistributionF64 = FrequencyDistribution<f64>;
pub type DensitySpecF64 = DensitySpec<f64>;
pub type StationaryClassF64 = StationaryClass<f64>;
