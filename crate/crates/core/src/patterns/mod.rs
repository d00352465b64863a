//! The resilience pattern catalog.
//!
//! Structure patterns are grouped under architectures and strategies by a
//! fixed hierarchy. Each [`PatternInstance`] binds one structure to a
//! protection domain, with parameters and an activation filter. A
//! [`ResilienceSolution`] derives its capabilities from its instances, and
//! [`validate_solution`] reports completeness along five design axes.

mod hierarchy;
mod instance;
mod ops;
mod validate;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::{ModelError, PartitionError};

pub use hierarchy::{catalog, Architecture, CatalogEntry, ParamSpec, PatternHierarchy, Strategy, Structure};
pub use instance::{
    build_solution, default_capabilities, ActivationFilter, CheckpointParams, ClassPattern, Diversity,
    MonitoringParams, NVersionParams, NmrParams, NmrScheme, PatternInstance, PatternParams, PredictionParams,
    RecoveryBlockParams, ReplicaMode, ReplicaSet, ResilienceSolution, RestructureMode, RestructureParams,
    RollforwardParams,
};
pub use ops::{
    checkpoint_create, monitoring_check, nmr_execute, nmr_execute_by, nmr_execute_tol, nmr_execute_with_losses,
    nversion_execute, predict_from_correctable, prediction_forecast, recovery_block, reinitialize, rejuvenate,
    required_replicas, restructure, rollback_recover, rollforward_recover, BlockOutcome, Bounds, Checkpoint,
    CheckpointCost, CheckpointStore, ForecastConfig, Indication, Journal, NVersionOutcome, Observation, Prediction,
    Recovery, RecoveryFlag, Restructured, Substate, Vote, VoteTally, VoteVerdict, EVEN_N_WARNING,
};
pub use validate::{validate_solution, Axis, AxisReport, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Capability {
    Detection,
    Containment,
    Mitigation,
}

impl Capability {
    pub const ALL: [Capability; 3] = [Capability::Detection, Capability::Containment, Capability::Mitigation];

    pub fn as_str(self) -> &'static str {
        match self {
            Capability::Detection => "detection",
            Capability::Containment => "containment",
            Capability::Mitigation => "mitigation",
        }
    }
}

impl fmt::Display for Capability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PatternError {
    #[error("bounds [{lo}, {hi}] are inverted")]
    InvalidBounds { lo: f64, hi: f64 },
    #[error("a trend needs at least 2 points, got {0}")]
    InsufficientHistory(usize),
    #[error("voting needs at least 2 replicas, got {0}")]
    TooFewReplicas(usize),
    #[error("recovery block needs at least one variant, got {0}")]
    TooFewVariants(usize),
    #[error("all {executions} variants failed the acceptance test")]
    AllVariantsRejected { executions: u32, cost: f64 },
    #[error("checkpoint progress went backwards ({previous} -> {next})")]
    ProgressRegression { previous: f64, next: f64 },
    #[error("rejuvenation refuses persistent events")]
    PersistentEvent,
    #[error("unknown state region `{0}`")]
    UnknownRegion(String),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Model(ModelError),
}

impl From<ModelError> for PatternError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Partition(p) => PatternError::Partition(p),
            other => PatternError::Model(other),
        }
    }
}
