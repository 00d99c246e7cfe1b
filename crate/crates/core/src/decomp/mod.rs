//! Missing/excess jobs and the elasticity battery.

pub mod aggregate;
pub mod bootstrap;
pub mod elasticity;

pub use aggregate::{aggregate, mu_weights, point_value, DecompScope, DecompositionResult, Estimate, Quantity};
pub use bootstrap::{attach_bootstrap, bootstrap_inference, BootstrapConfig, BootstrapResult};
pub use elasticity::{
    affected_wage_change, battery_point, elasticities, elasticities_from_components, elasticity_inputs, Components,
    ElasticityInputs, ElasticityPoint, ElasticityReport, MwWeighting, Stat, WageValuation,
};
