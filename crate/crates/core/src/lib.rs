//! Minimum-wage bunching estimator for spot-work contract data.
//!
//! Contract records are aggregated into a (prefecture, 10-JPY wage bin,
//! month) panel, a saturated event-study difference-in-differences is fit
//! against the upper wage tail, and the post-event coefficients are summed
//! into missing jobs below the new minimum and excess jobs at and above it.
//! A synthetic generator with closed-form effects is included for testing.
//!
//! Estimation code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common `f64` instantiations.

pub mod decomp;
pub mod dgp;
pub mod error;
pub mod estimator;
pub mod hetero;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix64 = linalg::Matrix<f64>;
pub type Observation64 = model::Observation<f64>;
pub type EventStudyFit64 = estimator::EventStudyFit<f64>;
pub type EventStudyFit32 = estimator::EventStudyFit<f32>;
pub type PointFit64 = estimator::PointFit<f64>;
pub type TwoWayFeFit64 = estimator::TwoWayFeFit<f64>;
pub type PretrendReport64 = estimator::PretrendReport<f64>;
pub type DecompositionResult64 = decomp::DecompositionResult<f64>;
pub type ElasticityInputs64 = decomp::ElasticityInputs<f64>;
pub type ElasticityReport64 = decomp::ElasticityReport<f64>;
pub type StratifiedRun64 = hetero::StratifiedRun<f64>;
