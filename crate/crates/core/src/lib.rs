//! Multilayer random walk on ℝ^d × ℕ: model parameters, level chain,
//! walk simulation and the statistical checks run against the limit theorems.

pub mod error;
pub mod level;
pub mod model;
pub mod parallel;
pub mod rng;
pub mod stats;
pub mod walk;

pub use error::{CoreError, Result};
pub use level::{
    sample_excursion, sample_z_by_stability, simulate_excursions, simulate_levels, simulate_z_by_stability, step_level,
    write_excursions_csv, ExcursionRecord, LevelPath, DEFAULT_EXCURSION_CAP,
};
pub use model::{
    alpha_exponent, diffusion_constants, make_anomalous, stationary_measure, AnomalousParams, DiffusionConstants,
    Kernel, LevelRule, ModelParams, Probability, StationaryMeasure, Tail, XiLaw,
};
pub use parallel::{map_indices, Execution};
pub use rng::{StreamRng, StreamSeed};
pub use stats::{
    chi_square, empirical_charfunc, excursion_tests, fclt_check, kolmogorov_pvalue, ks_test, ks_two_sample,
    lattice_check, occupation_test, scaling_exponent, scaling_exponent_model, underscaling_check, CharfuncPoint,
    TestReport, DEFAULT_LEVEL,
};
pub use walk::{
    evaluate_walk_at, simulate_walk, variance_profile, write_trajectory_csv, VarianceProfile, WalkPoint, WalkSample,
    WalkStepper,
};
