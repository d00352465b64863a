//! Deterministic discrete-event simulation.
//!
//! [`run`] injects faults from every source, drives them through the
//! fault-error-failure chain, hands records to the pattern instances whose
//! activation filters match, and integrates application progress. The
//! result is a line-oriented [`Trace`] and a [`SimReport`] computed from it.

mod harness;
mod queue;
mod report;
mod rng;
mod sim;
mod trace;

use thiserror::Error;

use crate::config::{ConfigDoc, SchemaError, SchemaErrors};
use crate::model::{build_model, SystemModel};
use crate::patterns::{build_solution, validate_solution, ResilienceSolution, Verdict};
use crate::taxonomy::ComponentId;

pub use harness::{observe_composed_reliability, observe_detection, observe_system_reliability};
pub use queue::SimEventQueue;
pub use report::{records_for, Accounting, ChainStats, SimReport};
pub use rng::substream;
pub use sim::{dispatch_targets, inject};
pub use trace::{RecordKind, Trace, TraceParseError, TraceRecord};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{0}")]
    Schema(#[from] SchemaErrors),
}

impl From<SchemaError> for ConfigError {
    fn from(e: SchemaError) -> Self {
        ConfigError::Schema(e.into())
    }
}

/// Everything a run needs. The verdict is attached up front; runs proceed
/// even when the solution is incomplete.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub horizon: f64,
    pub seed: u64,
    /// Progress units per hour at full capacity.
    pub workload_rate: f64,
    /// Component running the application.
    pub workload: ComponentId,
    pub model: SystemModel,
    pub solution: ResilienceSolution,
    pub verdict: Verdict,
}

impl SimConfig {
    pub fn new(
        model: SystemModel,
        solution: ResilienceSolution,
        horizon: f64,
        seed: u64,
    ) -> Result<Self, ConfigError> {
        let workload = model.root().id.clone();
        Self::assemble(model, solution, horizon, seed, 1.0, workload)
    }

    fn assemble(
        model: SystemModel,
        solution: ResilienceSolution,
        horizon: f64,
        seed: u64,
        workload_rate: f64,
        workload: ComponentId,
    ) -> Result<Self, ConfigError> {
        let mut errors = Vec::new();
        if !(horizon > 0.0 && horizon.is_finite()) {
            errors.push(SchemaError::new("sim.horizon_h", "must be > 0"));
        }
        if !(workload_rate >= 0.0 && workload_rate.is_finite()) {
            errors.push(SchemaError::new("workload.rate", "must be >= 0"));
        }
        if !model.contains(&workload) {
            errors.push(SchemaError::new(
                "workload.component",
                format!("unknown component `{workload}`"),
            ));
        }
        if !errors.is_empty() {
            return Err(SchemaErrors(errors).into());
        }
        let verdict = validate_solution(&solution, &model);
        Ok(Self {
            horizon,
            seed,
            workload_rate,
            workload,
            model,
            solution,
            verdict,
        })
    }

    pub fn from_doc(doc: &ConfigDoc) -> Result<Self, ConfigError> {
        let model = build_model(doc)?;
        let solution = build_solution(&doc.solution, &model)?;
        let workload = doc
            .workload
            .component
            .as_deref()
            .map(ComponentId::new)
            .unwrap_or_else(|| model.root().id.clone());
        Self::assemble(model, solution, doc.sim.horizon_h, doc.sim.seed, doc.workload.rate, workload)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Self::from_doc(&ConfigDoc::from_toml(text)?)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_workload_rate(mut self, rate: f64) -> Self {
        self.workload_rate = rate;
        self
    }

    pub fn with_workload(self, workload: ComponentId) -> Result<Self, ConfigError> {
        Self::assemble(self.model, self.solution, self.horizon, self.seed, self.workload_rate, workload)
    }

    pub fn with_solution(self, solution: ResilienceSolution) -> Self {
        let verdict = validate_solution(&solution, &self.model);
        Self {
            solution,
            verdict,
            ..self
        }
    }
}

/// Runs one simulation. The result depends only on the configuration and
/// its seed.
pub fn run(config: &SimConfig) -> (Trace, SimReport) {
    let trace = sim::simulate(config, config.seed);
    let report = SimReport::from_trace(&trace);
    (trace, report)
}
