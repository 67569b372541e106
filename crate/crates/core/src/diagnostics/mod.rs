//! Chain analysis: autocorrelation times, deviance and posterior estimators.

mod estimators;
mod iat;
mod trace;

pub use estimators::{
    component_density_estimate, density_estimate, deviance, label_change_rate, m_posterior, occupancy_posterior,
    partition_frequencies, total_variation, ComponentMode, DensityMode,
};
pub use iat::{iat, Iat, MIN_IAT_LEN};
pub use trace::{ChainTrace, TraceRecord};
