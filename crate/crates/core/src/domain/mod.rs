//! Problem-instance types: grids, demand fields, stations, cost
//! specifications, and validated scenarios.
//!
//! Everything here is immutable after construction and all operations are
//! pure functions, so values can be shared freely across threads. The
//! spatial dimension is fixed to two; one-dimensional line instances are
//! encoded as degenerate grids with a single cell row.

mod config;
mod cost;
mod grid;
mod scenario;

pub use config::{load_scenario, load_scenario_config, DemandConfig, ScenarioConfig};
pub use cost::{CapacityProfile, SpatialCostSpec, TemporalCostSpec};
pub use grid::{spatial_integral, DemandField, Point, SpatialGrid};
pub use scenario::{AssumptionMode, Scenario, Station};

use thiserror::Error;

/// Errors raised while ingesting or validating problem instances.
#[derive(Debug, Error)]
pub enum DomainError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl DomainError {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        DomainError::Validation(msg.into())
    }
}
