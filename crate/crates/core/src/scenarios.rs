//! Built-in case studies.
//!
//! Each scenario is a configuration document plus machine-checkable
//! expectations. [`Scenario::config_toml`] exports the document so it can be
//! copied and edited.
//!
//! * `checkpoint-restart`: heartbeat monitoring and rollback of a process
//!   over its persistent and dynamic state.
//! * `proactive-migration`: temperature prediction and migration away from
//!   a node before it fails.
//! * `cross-layer`: SECDED memory, an OS relay that hands uncorrectable
//!   errors to the application, and checksum-based matrix recovery.

use std::collections::BTreeSet;

use crate::config::ConfigDoc;
use crate::engine::{ConfigError, RecordKind, SimConfig, Trace};
use crate::patterns::{Structure, Verdict};

/// Hours between the first sensor drift and the node failure.
pub const DEFAULT_LEAD_TIME_H: f64 = 2.0;
/// Fraction of node faults that show a temperature precursor.
pub const DEFAULT_PRECURSOR_PROBABILITY: f64 = 0.9;
/// Double-bit errors per hour in the protected matrix.
pub const DEFAULT_DOUBLE_BIT_RATE: f64 = 0.02;

/// One step of an expected trace motif.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub kind: RecordKind,
    /// Substring the record's note must contain.
    pub note: &'static str,
}

const fn step(kind: RecordKind, note: &'static str) -> Step {
    Step { kind, note }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expectation {
    /// The attached verdict is complete (or not).
    Complete(bool),
    /// Exactly these structure patterns are used.
    Structures(BTreeSet<Structure>),
    /// The records appear in this order, not necessarily adjacent.
    Motif(Vec<Step>),
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub summary: &'static str,
    toml: String,
    /// The instance that provides detection; removing it must leave the
    /// solution incomplete.
    pub detection_instance: &'static str,
    pub expectations: Vec<Expectation>,
}

impl Scenario {
    pub fn config_toml(&self) -> &str {
        &self.toml
    }

    pub fn doc(&self) -> ConfigDoc {
        ConfigDoc::from_toml(&self.toml).expect("built-in scenarios parse")
    }

    pub fn config(&self) -> Result<SimConfig, ConfigError> {
        SimConfig::from_toml(&self.toml)
    }

    /// Unmet expectations, described.
    pub fn check(&self, verdict: &Verdict, trace: &Trace) -> Vec<String> {
        let mut failures = Vec::new();
        for e in &self.expectations {
            match e {
                Expectation::Complete(want) => {
                    if verdict.complete != *want {
                        failures.push(format!("expected complete={want}, got {}", verdict.complete));
                    }
                }
                Expectation::Structures(want) => {
                    let got: BTreeSet<Structure> = self
                        .doc()
                        .solution
                        .iter()
                        .filter_map(|i| i.structure.parse().ok())
                        .collect();
                    if &got != want {
                        failures.push(format!("expected structures {want:?}, got {got:?}"));
                    }
                }
                Expectation::Motif(steps) => {
                    let mut it = trace.records.iter();
                    for s in steps {
                        if !it.any(|r| r.kind == s.kind && r.note.contains(s.note)) {
                            failures.push(format!("motif step {:?} `{}` not found in order", s.kind, s.note));
                            break;
                        }
                    }
                }
            }
        }
        failures
    }
}

fn structures(list: &[Structure]) -> Expectation {
    Expectation::Structures(list.iter().copied().collect())
}

/// Checkpoint/restart of a single process. The process crashes at 25 h;
/// checkpoints are taken every 10 h.
pub fn scenario_cr() -> Scenario {
    let toml = r#"# Checkpoint/restart: heartbeat detection plus rollback recovery.
[sim]
horizon_h = 40.0
seed = 9

[workload]
rate = 1.0
component = "process"

[system]
id = "node"

[[system.children]]
id = "process"
state = { persistent = 4.0, dynamic = 16.0 }
repair = { dist = "fixed", params = { hours = 0.5 } }

[[system.children.fault_sources]]
classes = "active-transient-soft"
dist = "empirical"
params = { samples = [25.0] }
failure = "undetected-transient-complete"

[[system.children]]
id = "disk"

[[edges]]
provider = "disk"
consumer = "process"

[[solution]]
structure = "monitoring"
name = "heartbeat"
domain = { components = ["process"], aspects = ["dynamic"] }
params = { interval_h = 0.1 }

[[solution]]
structure = "rollback"
name = "checkpoint"
domain = { components = ["process"], aspects = ["persistent", "dynamic"] }
params = { interval_h = 10.0, write_cost_h = 0.0, restore_cost_h = 0.0 }
"#;
    Scenario {
        name: "checkpoint-restart",
        summary: "heartbeat monitoring with checkpoint rollback of one process",
        toml: toml.to_string(),
        detection_instance: "heartbeat",
        expectations: vec![
            Expectation::Complete(true),
            structures(&[Structure::Monitoring, Structure::Rollback]),
            Expectation::Motif(vec![
                step(RecordKind::Checkpoint, "progress=20"),
                step(RecordKind::Failure, ""),
                step(RecordKind::Detect, "verdict=tp"),
                step(RecordKind::Respond, "rollback pending"),
                step(RecordKind::Restore, "restored_to=20 lost_work_h=5"),
            ]),
        ],
    }
}

pub fn scenario_migration() -> Scenario {
    scenario_migration_with(DEFAULT_LEAD_TIME_H, DEFAULT_PRECURSOR_PROBABILITY, true)
}

/// Proactive migration in a four-node pool. `lead_h` is the time from the
/// start of the temperature drift to the node failure; `probability` the
/// chance that a fault shows the drift at all.
pub fn scenario_migration_with(lead_h: f64, probability: f64, spare: bool) -> Scenario {
    let node = |id: &str, utilization: f64| {
        format!(
            r#"
[[system.children.children]]
id = "{id}"
utilization = {utilization:?}
repair = {{ dist = "fixed", params = {{ hours = 8.0 }} }}

[[system.children.children.fault_sources]]
classes = "dormant-permanent-hard"
dist = "exponential"
params = {{ rate = 0.004 }}
activation_delay_h = {lead_h:?}
failure = "detected-permanent-complete"
precursor = {{ baseline = 55.0, critical = 95.0, probability = {probability:?} }}
"#
        )
    };
    let mut toml = String::from(
        r#"# Proactive migration: temperature prediction plus restructure.
[sim]
horizon_h = 500.0
seed = 10

[workload]
rate = 4.0
component = "pool"

[system]
id = "machine"

[[system.children]]
id = "pool"
composition = "redundant"
state = { dynamic = 32.0 }
"#,
    );
    for (id, u) in [("n1", 0.8), ("n2", 0.6), ("n3", 0.5), ("n4", 0.7)] {
        toml.push_str(&node(id, u));
    }
    if spare {
        toml.push_str(
            r#"
[[system.children.children]]
id = "s1"
spare = true
"#,
        );
    }
    toml.push_str(
        r#"
[[solution]]
structure = "prediction"
name = "thermal"
domain = { components = ["pool"], aspects = ["environment"] }
params = { threshold = 85.0, sample_interval_h = 0.25, margin_h = 1.0 }

[[solution]]
structure = "restructure"
name = "migration"
domain = { components = ["pool"], aspects = ["dynamic"] }
params = { mode = "migrate", cost_h = 0.05 }
"#,
    );
    Scenario {
        name: "proactive-migration",
        summary: "temperature prediction migrates load off failing nodes",
        toml,
        detection_instance: "thermal",
        expectations: vec![
            Expectation::Complete(true),
            structures(&[Structure::Prediction, Structure::Restructure]),
            Expectation::Motif(vec![
                step(RecordKind::Predict, "instance=thermal"),
                step(RecordKind::Respond, "migrate to="),
                step(RecordKind::Failure, "avoided"),
            ]),
        ],
    }
}

pub fn scenario_crosslayer() -> Scenario {
    scenario_crosslayer_with(DEFAULT_DOUBLE_BIT_RATE)
}

/// Memory protected by SECDED, an OS relay and checksum recovery of the
/// matrix. The workspace buffer is outside the checksum's domain, so its
/// double-bit errors abort the application.
pub fn scenario_crosslayer_with(double_bit_rate: f64) -> Scenario {
    let toml = format!(
        r#"# Cross-layer: SECDED memory, OS relay and checksum-based matrix recovery.
[sim]
horizon_h = 100.0
seed = 11

[workload]
rate = 1.0
component = "app"

[system]
id = "node"

[[system.children]]
id = "memory"

[[system.children.children]]
id = "matrix_a"
state = {{ persistent = 64.0 }}

[[system.children.children.fault_sources]]
classes = "active-transient-soft"
dist = "exponential"
params = {{ rate = 0.1 }}
multiplicity = 1

[[system.children.children.fault_sources]]
classes = "active-transient-soft"
dist = "exponential"
params = {{ rate = {double_bit_rate:?} }}
multiplicity = 2

[[system.children.children]]
id = "workspace"
state = {{ dynamic = 16.0 }}

[[system.children.children.fault_sources]]
classes = "active-transient-soft"
dist = "empirical"
params = {{ samples = [30.0] }}
multiplicity = 2

[[system.children]]
id = "app"
repair = {{ dist = "fixed", params = {{ hours = 2.0 }} }}

[[edges]]
provider = "memory"
consumer = "app"

[[solution]]
structure = "nmr"
name = "ecc"
domain = {{ components = ["memory"], aspects = ["persistent", "dynamic"] }}
params = {{ scheme = "secded" }}

[[solution]]
structure = "restructure"
name = "os-relay"
domain = {{ components = ["memory"], aspects = ["dynamic"] }}
params = {{ mode = "relay", target = "app" }}

[[solution]]
structure = "nmr"
name = "abft"
domain = {{ components = ["matrix_a"], aspects = ["persistent"] }}
params = {{ scheme = "checksum", recovery_cost_h = 0.01 }}
"#
    );
    Scenario {
        name: "cross-layer",
        summary: "SECDED, OS relay and checksum recovery across layers",
        toml,
        detection_instance: "ecc",
        expectations: vec![
            Expectation::Complete(true),
            structures(&[Structure::Nmr, Structure::Restructure]),
            Expectation::Motif(vec![
                step(RecordKind::Error, "instance=ecc detected"),
                step(RecordKind::Respond, "relay target=app"),
                step(RecordKind::Failure, "coverage gap"),
            ]),
        ],
    }
}

pub fn builtin() -> Vec<Scenario> {
    vec![scenario_cr(), scenario_migration(), scenario_crosslayer()]
}

pub fn by_name(name: &str) -> Option<Scenario> {
    builtin().into_iter().find(|s| s.name == name)
}
