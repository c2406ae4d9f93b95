//! Estimation of a finite-population variance `S_y^2` from a simple random
//! sample without replacement, using a correlated auxiliary variable with
//! known population variance.
//!
//! The crate provides the point estimators ([`estimators`]), their
//! first-order bias and MSE with optimal constants ([`theory`]), and a
//! verification harness based on seeded simulation and exhaustive
//! enumeration of samples ([`montecarlo`]).

pub mod cli;
pub mod error;
pub mod estimators;
pub mod input;
pub mod moments;
pub mod montecarlo;
pub mod presets;
pub mod report;
pub mod theory;

pub use error::{Result, VarestError, Variate};
pub use estimators::{
    evaluate, Estimate, Estimator, EvalOptions, GeneralizedParams, KhoshParams, RegressionCoef, SahaiParams,
};
pub use moments::{
    central_moment_ratio, population_moments, sample_stats, Population, PopulationMoments, SampleStats, ThetaMode,
};
pub use montecarlo::{enumerate_exact, simulate, srswor_sample, EmpiricalReport, ExactReport, SimulationPlan};
pub use theory::{generalized_derived, optimal_params, pre, theoretical_bias, theoretical_mse, TheoryReport};
