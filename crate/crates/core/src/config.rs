//! The configuration document: a TOML file with `system`, `edges`,
//! `workload`, `solution` and `sim` sections.
//!
//! ```toml
//! [sim]
//! horizon_h = 40.0
//! seed = 42
//!
//! [workload]
//! rate = 1.0
//! component = "process"
//!
//! [system]
//! id = "node"
//!
//! [[system.children]]
//! id = "process"
//! repair = { dist = "fixed", params = { hours = 0.5 } }
//!
//! [[system.children.fault_sources]]
//! classes = "active-transient-soft"
//! dist = "exponential"
//! params = { rate = 0.01 }
//!
//! [[edges]]
//! provider = "node"
//! consumer = "process"
//!
//! [[solution]]
//! structure = "monitoring"
//! domain = { components = ["process"], aspects = ["stateless"] }
//! params = { interval_h = 1.0 }
//! ```
//!
//! Parsing is two-phase: serde rejects malformed structure and unknown keys,
//! then the model and pattern builders validate semantics and report every
//! violation with the path of the offending field.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Composition, EdgeSemantics, Lifecycle, OperationalStatus, StateAspect};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl SchemaError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Every violation found in a document.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct SchemaErrors(pub Vec<SchemaError>);

impl fmt::Display for SchemaErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl From<SchemaError> for SchemaErrors {
    fn from(e: SchemaError) -> Self {
        SchemaErrors(vec![e])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    #[serde(default)]
    pub sim: SimDoc,
    #[serde(default)]
    pub workload: WorkloadDoc,
    pub system: ComponentDoc,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<EdgeDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub solution: Vec<InstanceDoc>,
}

impl ConfigDoc {
    pub fn from_toml(text: &str) -> Result<Self, SchemaError> {
        toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            let path = e
                .span()
                .map(|s| {
                    let line = text[..s.start.min(text.len())].lines().count().max(1);
                    format!("line {line}")
                })
                .unwrap_or_else(|| "document".into());
            SchemaError::new(path, message)
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config documents always serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimDoc {
    #[serde(default = "default_horizon")]
    pub horizon_h: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_horizon() -> f64 {
    100.0
}

impl Default for SimDoc {
    fn default() -> Self {
        Self {
            horizon_h: default_horizon(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadDoc {
    /// Progress units per hour at full capacity.
    #[serde(default = "default_rate")]
    pub rate: f64,
    /// Component that runs the application; defaults to the root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<String>,
}

fn default_rate() -> f64 {
    1.0
}

impl Default for WorkloadDoc {
    fn default() -> Self {
        Self {
            rate: default_rate(),
            component: None,
        }
    }
}

/// `{ dist = "...", params = { ... } }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistDoc {
    pub dist: String,
    #[serde(default)]
    pub params: toml::Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub composition: Option<Composition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifecycle: Option<Lifecycle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<OperationalStatus>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub spare: bool,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub utilization: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repair: Option<DistDoc>,
    /// State units per aspect.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub state: BTreeMap<StateAspect, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub maintenance: Vec<WindowDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fault_sources: Vec<FaultSourceDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<ComponentDoc>,
}

impl ComponentDoc {
    pub fn leaf(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            name: None,
            composition: None,
            lifecycle: None,
            status: None,
            spare: false,
            utilization: 0.0,
            repair: None,
            state: BTreeMap::new(),
            maintenance: Vec::new(),
            fault_sources: Vec::new(),
            children: Vec::new(),
        }
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowDoc {
    pub start_h: f64,
    pub duration_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultSourceDoc {
    /// Fault class tuple, e.g. `dormant-transient-soft`.
    pub classes: String,
    pub dist: String,
    #[serde(default)]
    pub params: toml::Table,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activation_delay_h: Option<f64>,
    /// Fixed recurrence interval for intermittent sources.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recurrence_h: Option<f64>,
    /// Failure class tuple used when an error from this source escalates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propagation_delay_h: Option<f64>,
    /// Probability that the consumer of the erroneous value annihilates it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_probability: Option<f64>,
    /// Corrupted bits (or replicas) per error.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicity: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precursor: Option<PrecursorDoc>,
}

/// Sensor signature preceding activation of a dormant fault.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecursorDoc {
    pub baseline: f64,
    pub critical: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub provider: String,
    pub consumer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semantics: Option<EdgeSemantics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction_delay_h: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainDoc {
    #[serde(default)]
    pub components: Vec<String>,
    #[serde(default)]
    pub aspects: Vec<StateAspect>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivationDoc {
    #[serde(default)]
    pub kinds: Vec<String>,
    #[serde(default)]
    pub classes: Vec<String>,
    #[serde(default)]
    pub components: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub structure: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Optional declared ancestors; checked against the fixed hierarchy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub architecture: Option<String>,
    pub domain: DomainDoc,
    #[serde(default)]
    pub params: toml::Table,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activation: Option<ActivationDoc>,
}

/// Typed accessors over a `params` table that record violations by path.
pub(crate) struct Params<'a> {
    pub table: &'a toml::Table,
    pub path: String,
    pub errors: &'a mut Vec<SchemaError>,
}

impl<'a> Params<'a> {
    pub fn new(table: &'a toml::Table, path: impl Into<String>, errors: &'a mut Vec<SchemaError>) -> Self {
        Self {
            table,
            path: path.into(),
            errors,
        }
    }

    fn at(&self, key: &str) -> String {
        format!("{}.{key}", self.path)
    }

    pub fn err(&mut self, key: &str, message: impl Into<String>) {
        let path = self.at(key);
        self.errors.push(SchemaError::new(path, message));
    }

    pub fn f64_opt(&mut self, key: &str) -> Option<f64> {
        match self.table.get(key) {
            None => None,
            Some(toml::Value::Float(x)) => Some(*x),
            Some(toml::Value::Integer(i)) => Some(*i as f64),
            Some(_) => {
                self.err(key, "expected a number");
                None
            }
        }
    }

    pub fn f64_or(&mut self, key: &str, default: f64) -> f64 {
        self.f64_opt(key).unwrap_or(default)
    }

    pub fn f64_req(&mut self, key: &str) -> Option<f64> {
        let v = self.f64_opt(key);
        if v.is_none() && !self.table.contains_key(key) {
            self.err(key, "required");
        }
        v
    }

    pub fn u64_opt(&mut self, key: &str) -> Option<u64> {
        match self.table.get(key) {
            None => None,
            Some(toml::Value::Integer(i)) if *i >= 0 => Some(*i as u64),
            Some(_) => {
                self.err(key, "expected a non-negative integer");
                None
            }
        }
    }

    pub fn str_opt(&mut self, key: &str) -> Option<String> {
        match self.table.get(key) {
            None => None,
            Some(toml::Value::String(s)) => Some(s.clone()),
            Some(_) => {
                self.err(key, "expected a string");
                None
            }
        }
    }

    pub fn f64_list(&mut self, key: &str) -> Option<Vec<f64>> {
        match self.table.get(key) {
            None => None,
            Some(toml::Value::Array(items)) => {
                let mut out = Vec::with_capacity(items.len());
                for (i, v) in items.iter().enumerate() {
                    match v {
                        toml::Value::Float(x) => out.push(*x),
                        toml::Value::Integer(n) => out.push(*n as f64),
                        _ => {
                            let path = format!("{}[{i}]", self.at(key));
                            self.errors.push(SchemaError::new(path, "expected a number"));
                            return None;
                        }
                    }
                }
                Some(out)
            }
            Some(_) => {
                self.err(key, "expected an array of numbers");
                None
            }
        }
    }

    /// Flags keys outside `known`.
    pub fn deny_unknown(&mut self, known: &[&str]) {
        let unknown: Vec<String> = self
            .table
            .keys()
            .filter(|k| !known.contains(&k.as_str()))
            .cloned()
            .collect();
        for k in unknown {
            self.err(&k, "unknown parameter");
        }
    }
}

pub(crate) fn table_from<I: IntoIterator<Item = (&'static str, toml::Value)>>(items: I) -> toml::Table {
    items.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}
