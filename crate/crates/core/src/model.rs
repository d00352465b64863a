//! The modeled system: a component tree, service-dependency edges, fault
//! sources, repair models and per-component status bookkeeping.
//!
//! A [`SystemModel`] is an immutable value. `set_status`, `degrade`,
//! `readmit` and `rebind` return new versions; the engine uses the in-place
//! `apply_*` variants on its private copy.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{
    table_from, ComponentDoc, ConfigDoc, DistDoc, EdgeDoc, FaultSourceDoc, Params, PrecursorDoc, SchemaError,
    SchemaErrors, WindowDoc,
};
use crate::metrics::LifetimeDistribution;
use crate::taxonomy::{ComponentId, FailureDescriptor, FaultDescriptor, Persistence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperationalStatus {
    ServiceDelivery,
    ScheduledOutage,
    UnscheduledOutage,
}

impl OperationalStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ServiceDelivery => "service_delivery",
            Self::ScheduledOutage => "scheduled_outage",
            Self::UnscheduledOutage => "unscheduled_outage",
        }
    }
}

impl fmt::Display for OperationalStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for OperationalStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Self::ServiceDelivery, Self::ScheduledOutage, Self::UnscheduledOutage]
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown status `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lifecycle {
    Development,
    Operational,
    Retired,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateAspect {
    Persistent,
    Dynamic,
    Environment,
    /// The null state.
    Stateless,
}

impl StateAspect {
    pub const STATEFUL: [StateAspect; 3] = [Self::Persistent, Self::Dynamic, Self::Environment];
}

/// How a composite depends on its children.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Composition {
    /// Every child is needed.
    #[default]
    Serial,
    /// Any surviving child keeps the composite up, at reduced capacity.
    Redundant,
}

/// How a consumer depends on a provider.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeSemantics {
    /// The consumer fails with the provider.
    #[default]
    Serial,
    /// The consumer fails only when all of its redundant providers are down.
    Redundant,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Interarrival {
    /// Disabled source (zero rate).
    Never,
    Lifetime(LifetimeDistribution),
}

#[derive(Debug, Clone, PartialEq)]
pub enum RepairModel {
    Fixed(f64),
    Lifetime(LifetimeDistribution),
}

/// Repair time when a component declares none.
pub const DEFAULT_REPAIR_H: f64 = 1.0;

impl Default for RepairModel {
    fn default() -> Self {
        Self::Fixed(DEFAULT_REPAIR_H)
    }
}

/// Sensor signature that drifts from `baseline` to `critical` over the
/// activation delay of a dormant fault.
#[derive(Debug, Clone, PartialEq)]
pub struct Precursor {
    pub baseline: f64,
    pub critical: f64,
    /// Chance that a given fault shows the signature at all.
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaultSource {
    pub descriptor: FaultDescriptor,
    pub interarrival: Interarrival,
    /// Hours from fault arrival to activation as an error; zero is immediate.
    pub activation_delay: f64,
    /// Fixed recurrence interval for intermittent faults.
    pub recurrence: Option<f64>,
    /// Class of the failure an unhandled error escalates to.
    pub failure: FailureDescriptor,
    /// Hours from error to failure when nothing intervenes.
    pub propagation_delay: f64,
    pub mask_probability: f64,
    /// Corrupted bits (memory) or replicas (redundancy) per error.
    pub multiplicity: u32,
    pub precursor: Option<Precursor>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub start: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub id: ComponentId,
    pub name: String,
    pub children: Vec<Component>,
    pub fault_sources: Vec<FaultSource>,
    pub repair: RepairModel,
    pub status: OperationalStatus,
    pub lifecycle: Lifecycle,
    pub state_profile: BTreeMap<StateAspect, f64>,
    pub composition: Composition,
    /// A spare carries no load until something migrates onto it.
    pub spare: bool,
    pub utilization: f64,
    pub maintenance: Vec<Window>,
}

impl Component {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceEdge {
    pub provider: ComponentId,
    pub consumer: ComponentId,
    pub semantics: EdgeSemantics,
    pub interaction_delay: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("protection domain has no state aspects")]
    NoAspects,
    #[error("stateless cannot be combined with other aspects")]
    MixedStateless,
    #[error("protection domain has no components")]
    NoComponents,
    #[error("unknown component `{0}` in protection domain")]
    UnknownComponent(ComponentId),
}

/// Components and state aspects a pattern instance protects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtectionDomain {
    pub components: BTreeSet<ComponentId>,
    pub aspects: BTreeSet<StateAspect>,
}

impl ProtectionDomain {
    pub fn new(
        components: impl IntoIterator<Item = ComponentId>,
        aspects: impl IntoIterator<Item = StateAspect>,
    ) -> Result<Self, DomainError> {
        let domain = Self {
            components: components.into_iter().collect(),
            aspects: aspects.into_iter().collect(),
        };
        domain.check()?;
        Ok(domain)
    }

    fn check(&self) -> Result<(), DomainError> {
        if self.components.is_empty() {
            return Err(DomainError::NoComponents);
        }
        if self.aspects.is_empty() {
            return Err(DomainError::NoAspects);
        }
        if self.aspects.contains(&StateAspect::Stateless) && self.aspects.len() > 1 {
            return Err(DomainError::MixedStateless);
        }
        Ok(())
    }

    pub fn is_stateless(&self) -> bool {
        self.aspects.len() == 1 && self.aspects.contains(&StateAspect::Stateless)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coverage {
    pub covered_components: BTreeSet<ComponentId>,
    pub uncovered_components: BTreeSet<ComponentId>,
    pub covered_aspects: BTreeSet<StateAspect>,
    pub uncovered_aspects: BTreeSet<StateAspect>,
    /// State units inside the domain.
    pub covered_units: f64,
    /// State units of the model outside the domain.
    pub uncovered_units: f64,
    pub stateless_by_design: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown component `{0}`")]
    UnknownComponent(ComponentId),
    #[error("component `{0}` is retired")]
    RetiredComponent(ComponentId),
    #[error("component `{0}` is not yet operational")]
    NotYetOperational(ComponentId),
    #[error("status change for `{component}` at t={at} precedes the previous change at t={since}")]
    TimeRegression { component: ComponentId, at: f64, since: f64 },
    #[error("lifecycle of `{component}` cannot go from {from:?} to {to:?}")]
    LifecycleRegression { component: ComponentId, from: Lifecycle, to: Lifecycle },
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("excluding `{excluded}` disconnects `{consumer}` from all providers")]
pub struct PartitionError {
    pub excluded: ComponentId,
    pub consumer: ComponentId,
}

/// Hours spent in each operational status.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StatusTimes {
    pub t_pu: f64,
    pub t_ud: f64,
    pub t_sd: f64,
}

impl StatusTimes {
    pub fn total(&self) -> f64 {
        self.t_pu + self.t_ud + self.t_sd
    }

    fn add(&mut self, status: OperationalStatus, dt: f64) {
        match status {
            OperationalStatus::ServiceDelivery => self.t_pu += dt,
            OperationalStatus::UnscheduledOutage => self.t_ud += dt,
            OperationalStatus::ScheduledOutage => self.t_sd += dt,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct StatusClock {
    status: OperationalStatus,
    since: f64,
    times: StatusTimes,
}

#[derive(Debug, Clone, PartialEq)]
struct NodeInfo {
    path: Vec<usize>,
    parent: Option<ComponentId>,
    children: Vec<ComponentId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    root: Component,
    edges: Vec<ServiceEdge>,
    order: Vec<ComponentId>,
    index: BTreeMap<ComponentId, NodeInfo>,
    excluded: BTreeSet<ComponentId>,
    /// Spares that have taken over load through migration.
    engaged: BTreeSet<ComponentId>,
    clocks: BTreeMap<ComponentId, StatusClock>,
    utilization: BTreeMap<ComponentId, f64>,
    lifecycle: BTreeMap<ComponentId, Lifecycle>,
}

/// Builds a model from the `system` and `edges` sections of a document.
pub fn build_model(doc: &ConfigDoc) -> Result<SystemModel, SchemaErrors> {
    let mut errors = Vec::new();
    let root = component_from_doc(&doc.system, "system", &mut errors);
    let mut seen = BTreeSet::new();
    check_unique(&root, "system", &mut seen, &mut errors);
    let mut edges = Vec::new();
    for (i, e) in doc.edges.iter().enumerate() {
        let path = format!("edges[{i}]");
        for (field, id) in [("provider", &e.provider), ("consumer", &e.consumer)] {
            if !seen.contains(id.as_str()) {
                errors.push(SchemaError::new(format!("{path}.{field}"), format!("unknown component `{id}`")));
            }
        }
        if e.provider == e.consumer {
            errors.push(SchemaError::new(path.clone(), "self-dependency"));
        }
        let interaction_delay = e.interaction_delay_h.unwrap_or(0.0);
        if !(interaction_delay >= 0.0 && interaction_delay.is_finite()) {
            errors.push(SchemaError::new(format!("{path}.interaction_delay_h"), "must be >= 0"));
        }
        edges.push(ServiceEdge {
            provider: ComponentId::new(e.provider.clone()),
            consumer: ComponentId::new(e.consumer.clone()),
            semantics: e.semantics.unwrap_or_default(),
            interaction_delay,
        });
    }
    if errors.is_empty() {
        if let Some(cycle_at) = find_cycle(&edges) {
            errors.push(SchemaError::new("edges", format!("service edges form a cycle through `{cycle_at}`")));
        }
    }
    if errors.is_empty() {
        Ok(SystemModel::assemble(root, edges))
    } else {
        Err(SchemaErrors(errors))
    }
}

fn check_unique(c: &Component, path: &str, seen: &mut BTreeSet<String>, errors: &mut Vec<SchemaError>) {
    if !seen.insert(c.id.0.clone()) {
        errors.push(SchemaError::new(format!("{path}.id"), format!("duplicate component id `{}`", c.id)));
    }
    for (i, child) in c.children.iter().enumerate() {
        check_unique(child, &format!("{path}.children[{i}]"), seen, errors);
    }
}

fn find_cycle(edges: &[ServiceEdge]) -> Option<ComponentId> {
    let mut adj: BTreeMap<&ComponentId, Vec<&ComponentId>> = BTreeMap::new();
    for e in edges {
        adj.entry(&e.provider).or_default().push(&e.consumer);
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut mark: BTreeMap<&ComponentId, u8> = BTreeMap::new();
    fn visit<'a>(
        n: &'a ComponentId,
        adj: &BTreeMap<&'a ComponentId, Vec<&'a ComponentId>>,
        mark: &mut BTreeMap<&'a ComponentId, u8>,
    ) -> Option<ComponentId> {
        match mark.get(n) {
            Some(1) => return Some(n.clone()),
            Some(2) => return None,
            _ => {}
        }
        mark.insert(n, 1);
        for m in adj.get(n).into_iter().flatten() {
            if let Some(c) = visit(m, adj, mark) {
                return Some(c);
            }
        }
        mark.insert(n, 2);
        None
    }
    let nodes: Vec<&ComponentId> = adj.keys().copied().collect();
    nodes.into_iter().find_map(|n| visit(n, &adj, &mut mark))
}

fn positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

fn non_negative(x: f64) -> bool {
    x >= 0.0 && x.is_finite()
}

fn lifetime_from(dist: &str, params: &mut Params<'_>) -> Option<LifetimeDistribution> {
    let built = match dist {
        "exponential" => {
            params.deny_unknown(&["rate"]);
            LifetimeDistribution::exponential(params.f64_req("rate")?)
        }
        "weibull" => {
            params.deny_unknown(&["shape", "scale"]);
            let shape = params.f64_req("shape");
            let scale = params.f64_req("scale");
            LifetimeDistribution::weibull(shape?, scale?)
        }
        "empirical" => {
            params.deny_unknown(&["samples"]);
            match params.f64_list("samples") {
                Some(s) => LifetimeDistribution::empirical(s),
                None => {
                    if !params.table.contains_key("samples") {
                        params.err("samples", "required");
                    }
                    return None;
                }
            }
        }
        _ => return None,
    };
    match built {
        Ok(d) => Some(d),
        Err(e) => {
            let path = params.path.clone();
            params.errors.push(SchemaError::new(path, e.to_string()));
            None
        }
    }
}

fn interarrival_from(doc: &FaultSourceDoc, path: &str, errors: &mut Vec<SchemaError>) -> Interarrival {
    let mut params = Params::new(&doc.params, format!("{path}.params"), errors);
    match doc.dist.as_str() {
        "never" => {
            params.deny_unknown(&[]);
            Interarrival::Never
        }
        "exponential" if params.f64_opt("rate") == Some(0.0) => {
            params.deny_unknown(&["rate"]);
            Interarrival::Never
        }
        "exponential" | "weibull" | "empirical" => lifetime_from(&doc.dist, &mut params)
            .map(Interarrival::Lifetime)
            .unwrap_or(Interarrival::Never),
        other => {
            errors.push(SchemaError::new(format!("{path}.dist"), format!("unknown distribution `{other}`")));
            Interarrival::Never
        }
    }
}

fn repair_from(doc: &DistDoc, path: &str, errors: &mut Vec<SchemaError>) -> RepairModel {
    let mut params = Params::new(&doc.params, format!("{path}.params"), errors);
    match doc.dist.as_str() {
        "fixed" => {
            params.deny_unknown(&["hours"]);
            match params.f64_req("hours") {
                Some(h) if non_negative(h) => RepairModel::Fixed(h),
                Some(_) => {
                    params.err("hours", "must be >= 0");
                    RepairModel::default()
                }
                None => RepairModel::default(),
            }
        }
        "exponential" | "weibull" | "empirical" => lifetime_from(&doc.dist, &mut params)
            .map(RepairModel::Lifetime)
            .unwrap_or_default(),
        other => {
            errors.push(SchemaError::new(format!("{path}.dist"), format!("unknown repair model `{other}`")));
            RepairModel::default()
        }
    }
}

/// Failure class used when a source does not name one.
pub const DEFAULT_FAILURE: &str = "undetected-permanent-complete";

fn source_from(doc: &FaultSourceDoc, path: &str, errors: &mut Vec<SchemaError>) -> Option<FaultSource> {
    let descriptor: Option<FaultDescriptor> = match doc.classes.parse() {
        Ok(d) => Some(d),
        Err(e) => {
            errors.push(SchemaError::new(format!("{path}.classes"), e.to_string()));
            None
        }
    };
    let interarrival = interarrival_from(doc, path, errors);
    let failure: Option<FailureDescriptor> = match doc.failure.as_deref().unwrap_or(DEFAULT_FAILURE).parse() {
        Ok(f) => Some(f),
        Err(e) => {
            errors.push(SchemaError::new(format!("{path}.failure"), e.to_string()));
            None
        }
    };
    let activation_delay = doc.activation_delay_h.unwrap_or(0.0);
    if !non_negative(activation_delay) {
        errors.push(SchemaError::new(format!("{path}.activation_delay_h"), "must be >= 0"));
    }
    let propagation_delay = doc.propagation_delay_h.unwrap_or(0.0);
    if !non_negative(propagation_delay) {
        errors.push(SchemaError::new(format!("{path}.propagation_delay_h"), "must be >= 0"));
    }
    let intermittent = descriptor.is_some_and(|d| d.persistence == Persistence::Intermittent);
    match (doc.recurrence_h, intermittent) {
        (Some(r), true) if !positive(r) => {
            errors.push(SchemaError::new(format!("{path}.recurrence_h"), "must be > 0"));
        }
        (None, true) => {
            errors.push(SchemaError::new(format!("{path}.recurrence_h"), "required for intermittent faults"));
        }
        (Some(_), false) if descriptor.is_some() => {
            errors.push(SchemaError::new(format!("{path}.recurrence_h"), "only intermittent faults recur"));
        }
        _ => {}
    }
    let mask_probability = doc.mask_probability.unwrap_or(0.0);
    if !(0.0..=1.0).contains(&mask_probability) {
        errors.push(SchemaError::new(format!("{path}.mask_probability"), "must lie in [0, 1]"));
    }
    let multiplicity = doc.multiplicity.unwrap_or(1);
    if multiplicity == 0 {
        errors.push(SchemaError::new(format!("{path}.multiplicity"), "must be >= 1"));
    }
    let precursor = doc.precursor.as_ref().map(|p| {
        let probability = p.probability.unwrap_or(1.0);
        if !(0.0..=1.0).contains(&probability) {
            errors.push(SchemaError::new(format!("{path}.precursor.probability"), "must lie in [0, 1]"));
        }
        if !(p.baseline.is_finite() && p.critical.is_finite()) || p.baseline == p.critical {
            errors.push(SchemaError::new(format!("{path}.precursor"), "baseline and critical must differ"));
        }
        Precursor {
            baseline: p.baseline,
            critical: p.critical,
            probability,
        }
    });
    Some(FaultSource {
        descriptor: descriptor?,
        interarrival,
        activation_delay,
        recurrence: doc.recurrence_h,
        failure: failure?,
        propagation_delay,
        mask_probability,
        multiplicity,
        precursor,
    })
}

fn component_from_doc(doc: &ComponentDoc, path: &str, errors: &mut Vec<SchemaError>) -> Component {
    if doc.id.is_empty() {
        errors.push(SchemaError::new(format!("{path}.id"), "must not be empty"));
    }
    let fault_sources = doc
        .fault_sources
        .iter()
        .enumerate()
        .filter_map(|(i, s)| source_from(s, &format!("{path}.fault_sources[{i}]"), errors))
        .collect();
    let repair = doc
        .repair
        .as_ref()
        .map(|r| repair_from(r, &format!("{path}.repair"), errors))
        .unwrap_or_default();
    if !(0.0..=1.0).contains(&doc.utilization) {
        errors.push(SchemaError::new(format!("{path}.utilization"), "must lie in [0, 1]"));
    }
    for (aspect, units) in &doc.state {
        if !non_negative(*units) {
            errors.push(SchemaError::new(
                format!("{path}.state.{}", serde_plain(aspect)),
                "must be >= 0",
            ));
        }
    }
    let maintenance = doc
        .maintenance
        .iter()
        .enumerate()
        .map(|(i, w)| {
            if !non_negative(w.start_h) || !positive(w.duration_h) {
                errors.push(SchemaError::new(
                    format!("{path}.maintenance[{i}]"),
                    "start must be >= 0 and duration > 0",
                ));
            }
            Window {
                start: w.start_h,
                duration: w.duration_h,
            }
        })
        .collect();
    let children = doc
        .children
        .iter()
        .enumerate()
        .map(|(i, c)| component_from_doc(c, &format!("{path}.children[{i}]"), errors))
        .collect();
    Component {
        id: ComponentId::new(doc.id.clone()),
        name: doc.name.clone().unwrap_or_else(|| doc.id.clone()),
        children,
        fault_sources,
        repair,
        status: doc.status.unwrap_or(OperationalStatus::ServiceDelivery),
        lifecycle: doc.lifecycle.unwrap_or(Lifecycle::Operational),
        state_profile: doc.state.clone(),
        composition: doc.composition.unwrap_or_default(),
        spare: doc.spare,
        utilization: doc.utilization,
        maintenance,
    }
}

fn serde_plain(aspect: &StateAspect) -> &'static str {
    match aspect {
        StateAspect::Persistent => "persistent",
        StateAspect::Dynamic => "dynamic",
        StateAspect::Environment => "environment",
        StateAspect::Stateless => "stateless",
    }
}

fn float(x: f64) -> toml::Value {
    toml::Value::Float(x)
}

fn lifetime_doc(d: &LifetimeDistribution) -> DistDoc {
    match d {
        LifetimeDistribution::Exponential { rate } => DistDoc {
            dist: "exponential".into(),
            params: table_from([("rate", float(*rate))]),
        },
        LifetimeDistribution::Weibull { shape, scale } => DistDoc {
            dist: "weibull".into(),
            params: table_from([("shape", float(*shape)), ("scale", float(*scale))]),
        },
        LifetimeDistribution::Empirical { samples } => DistDoc {
            dist: "empirical".into(),
            params: table_from([(
                "samples",
                toml::Value::Array(samples.iter().copied().map(float).collect()),
            )]),
        },
    }
}

fn component_to_doc(c: &Component) -> ComponentDoc {
    let repair = match &c.repair {
        RepairModel::Fixed(h) => DistDoc {
            dist: "fixed".into(),
            params: table_from([("hours", float(*h))]),
        },
        RepairModel::Lifetime(d) => lifetime_doc(d),
    };
    let fault_sources = c
        .fault_sources
        .iter()
        .map(|s| {
            let dist = match &s.interarrival {
                Interarrival::Never => DistDoc {
                    dist: "never".into(),
                    params: toml::Table::new(),
                },
                Interarrival::Lifetime(d) => lifetime_doc(d),
            };
            FaultSourceDoc {
                classes: s.descriptor.to_string(),
                dist: dist.dist,
                params: dist.params,
                activation_delay_h: Some(s.activation_delay),
                recurrence_h: s.recurrence,
                failure: Some(s.failure.to_string()),
                propagation_delay_h: Some(s.propagation_delay),
                mask_probability: Some(s.mask_probability),
                multiplicity: Some(s.multiplicity),
                precursor: s.precursor.as_ref().map(|p| PrecursorDoc {
                    baseline: p.baseline,
                    critical: p.critical,
                    probability: Some(p.probability),
                }),
            }
        })
        .collect();
    ComponentDoc {
        id: c.id.0.clone(),
        name: (c.name != c.id.0).then(|| c.name.clone()),
        composition: (!c.is_leaf()).then_some(c.composition),
        lifecycle: Some(c.lifecycle),
        status: Some(c.status),
        spare: c.spare,
        utilization: c.utilization,
        repair: Some(repair),
        state: c.state_profile.clone(),
        maintenance: c
            .maintenance
            .iter()
            .map(|w| WindowDoc {
                start_h: w.start,
                duration_h: w.duration,
            })
            .collect(),
        fault_sources,
        children: c.children.iter().map(component_to_doc).collect(),
    }
}

impl SystemModel {
    fn assemble(root: Component, edges: Vec<ServiceEdge>) -> Self {
        let mut model = Self {
            root,
            edges,
            order: Vec::new(),
            index: BTreeMap::new(),
            excluded: BTreeSet::new(),
            engaged: BTreeSet::new(),
            clocks: BTreeMap::new(),
            utilization: BTreeMap::new(),
            lifecycle: BTreeMap::new(),
        };
        let mut stack = vec![(Vec::new(), None::<ComponentId>)];
        while let Some((path, parent)) = stack.pop() {
            let c = model.at_path(&path).clone();
            let children: Vec<ComponentId> = c.children.iter().map(|k| k.id.clone()).collect();
            for i in (0..c.children.len()).rev() {
                let mut p = path.clone();
                p.push(i);
                stack.push((p, Some(c.id.clone())));
            }
            model.order.push(c.id.clone());
            model.clocks.insert(
                c.id.clone(),
                StatusClock {
                    status: c.status,
                    since: 0.0,
                    times: StatusTimes::default(),
                },
            );
            model.utilization.insert(c.id.clone(), c.utilization);
            model.lifecycle.insert(c.id.clone(), c.lifecycle);
            model.index.insert(c.id.clone(), NodeInfo { path, parent, children });
        }
        model
    }

    fn at_path(&self, path: &[usize]) -> &Component {
        path.iter().fold(&self.root, |c, &i| &c.children[i])
    }

    pub fn from_toml(text: &str) -> Result<Self, SchemaErrors> {
        let doc = ConfigDoc::from_toml(text)?;
        build_model(&doc)
    }

    /// The `system` and `edges` sections describing this model.
    pub fn to_docs(&self) -> (ComponentDoc, Vec<EdgeDoc>) {
        let edges = self
            .edges
            .iter()
            .map(|e| EdgeDoc {
                provider: e.provider.0.clone(),
                consumer: e.consumer.0.clone(),
                semantics: Some(e.semantics),
                interaction_delay_h: Some(e.interaction_delay),
            })
            .collect();
        (component_to_doc(&self.root), edges)
    }

    pub fn to_toml(&self) -> String {
        let (system, edges) = self.to_docs();
        ConfigDoc {
            sim: Default::default(),
            workload: Default::default(),
            system,
            edges,
            solution: Vec::new(),
        }
        .to_toml()
    }

    pub fn root(&self) -> &Component {
        &self.root
    }

    pub fn edges(&self) -> &[ServiceEdge] {
        &self.edges
    }

    /// Component ids in pre-order (declaration order).
    pub fn ids(&self) -> &[ComponentId] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn contains(&self, id: &ComponentId) -> bool {
        self.index.contains_key(id)
    }

    pub fn component(&self, id: &ComponentId) -> Option<&Component> {
        self.index.get(id).map(|n| self.at_path(&n.path))
    }

    fn require(&self, id: &ComponentId) -> Result<&NodeInfo, ModelError> {
        self.index.get(id).ok_or_else(|| ModelError::UnknownComponent(id.clone()))
    }

    pub fn parent(&self, id: &ComponentId) -> Option<&ComponentId> {
        self.index.get(id).and_then(|n| n.parent.as_ref())
    }

    pub fn children(&self, id: &ComponentId) -> &[ComponentId] {
        self.index.get(id).map(|n| n.children.as_slice()).unwrap_or(&[])
    }

    /// `id` and everything below it.
    pub fn subtree(&self, id: &ComponentId) -> Vec<ComponentId> {
        let mut out = Vec::new();
        let mut stack = vec![id.clone()];
        while let Some(n) = stack.pop() {
            if let Some(info) = self.index.get(&n) {
                stack.extend(info.children.iter().rev().cloned());
                out.push(n);
            }
        }
        out
    }

    pub fn leaves_under(&self, id: &ComponentId) -> Vec<ComponentId> {
        self.subtree(id)
            .into_iter()
            .filter(|c| self.children(c).is_empty())
            .collect()
    }

    /// True when `ancestor` is `id` or one of its ancestors.
    pub fn is_within(&self, id: &ComponentId, ancestor: &ComponentId) -> bool {
        let mut cur = Some(id);
        while let Some(c) = cur {
            if c == ancestor {
                return true;
            }
            cur = self.parent(c);
        }
        false
    }

    pub fn providers_of(&self, id: &ComponentId) -> impl Iterator<Item = &ServiceEdge> {
        let id = id.clone();
        self.edges.iter().filter(move |e| e.consumer == id)
    }

    pub fn consumers_of(&self, id: &ComponentId) -> impl Iterator<Item = &ServiceEdge> {
        let id = id.clone();
        self.edges.iter().filter(move |e| e.provider == id)
    }

    pub fn lifecycle(&self, id: &ComponentId) -> Option<Lifecycle> {
        self.lifecycle.get(id).copied()
    }

    pub fn is_operational(&self, id: &ComponentId) -> bool {
        self.lifecycle(id) == Some(Lifecycle::Operational)
    }

    pub fn status(&self, id: &ComponentId) -> Option<OperationalStatus> {
        self.clocks.get(id).map(|c| c.status)
    }

    pub fn is_excluded(&self, id: &ComponentId) -> bool {
        self.excluded.contains(id)
    }

    /// A spare that has taken over load through migration.
    pub fn is_engaged(&self, id: &ComponentId) -> bool {
        self.engaged.contains(id)
    }

    pub fn excluded(&self) -> &BTreeSet<ComponentId> {
        &self.excluded
    }

    pub fn utilization(&self, id: &ComponentId) -> f64 {
        self.utilization.get(id).copied().unwrap_or(0.0)
    }

    /// Status occupancy of `id` up to `now`.
    pub fn status_times(&self, id: &ComponentId, now: f64) -> Option<StatusTimes> {
        self.clocks.get(id).map(|c| {
            let mut t = c.times;
            t.add(c.status, (now - c.since).max(0.0));
            t
        })
    }

    pub fn set_status(&self, id: &ComponentId, status: OperationalStatus, at: f64) -> Result<Self, ModelError> {
        let mut next = self.clone();
        next.apply_status(id, status, at)?;
        Ok(next)
    }

    pub(crate) fn apply_status(
        &mut self,
        id: &ComponentId,
        status: OperationalStatus,
        at: f64,
    ) -> Result<(), ModelError> {
        self.require(id)?;
        match self.lifecycle(id) {
            Some(Lifecycle::Retired) => return Err(ModelError::RetiredComponent(id.clone())),
            Some(Lifecycle::Development) => return Err(ModelError::NotYetOperational(id.clone())),
            _ => {}
        }
        let clock = self.clocks.get_mut(id).expect("indexed components have clocks");
        if at < clock.since {
            return Err(ModelError::TimeRegression {
                component: id.clone(),
                at,
                since: clock.since,
            });
        }
        clock.times.add(clock.status, at - clock.since);
        clock.since = at;
        clock.status = status;
        Ok(())
    }

    /// Moves a component forward in its life cycle
    /// (development -> operational -> retired).
    pub fn set_lifecycle(&self, id: &ComponentId, to: Lifecycle) -> Result<Self, ModelError> {
        self.require(id)?;
        let from = self.lifecycle(id).expect("indexed");
        if to < from {
            return Err(ModelError::LifecycleRegression {
                component: id.clone(),
                from,
                to,
            });
        }
        let mut next = self.clone();
        next.lifecycle.insert(id.clone(), to);
        Ok(next)
    }

    pub fn check_domain(&self, domain: &ProtectionDomain) -> Result<(), DomainError> {
        domain.check()?;
        match domain.components.iter().find(|c| !self.contains(c)) {
            Some(c) => Err(DomainError::UnknownComponent(c.clone())),
            None => Ok(()),
        }
    }

    /// Domain components plus everything below them.
    pub fn domain_closure(&self, domain: &ProtectionDomain) -> BTreeSet<ComponentId> {
        domain.components.iter().flat_map(|c| self.subtree(c)).collect()
    }

    pub fn coverage(&self, domain: &ProtectionDomain) -> Coverage {
        let covered_components = self.domain_closure(domain);
        let uncovered_components: BTreeSet<ComponentId> = self
            .order
            .iter()
            .filter(|c| !covered_components.contains(*c))
            .cloned()
            .collect();
        let stateless_by_design = domain.is_stateless();
        let covered_aspects: BTreeSet<StateAspect> = if stateless_by_design {
            BTreeSet::new()
        } else {
            domain.aspects.clone()
        };
        let uncovered_aspects = StateAspect::STATEFUL
            .into_iter()
            .filter(|a| !covered_aspects.contains(a))
            .collect();
        let mut covered_units = 0.0;
        let mut uncovered_units = 0.0;
        for id in &self.order {
            let c = self.component(id).expect("indexed");
            for (aspect, units) in &c.state_profile {
                if *aspect == StateAspect::Stateless {
                    continue;
                }
                if covered_components.contains(id) && covered_aspects.contains(aspect) {
                    covered_units += units;
                } else {
                    uncovered_units += units;
                }
            }
        }
        Coverage {
            covered_components,
            uncovered_components,
            covered_aspects,
            uncovered_aspects,
            covered_units,
            uncovered_units,
            stateless_by_design,
        }
    }

    /// Remaining capacity of a composite relative to its original size,
    /// counting only leaves that are not excluded.
    pub fn degradation_factor(&self, id: &ComponentId) -> f64 {
        self.capacity_factor(id, |_| true)
    }

    /// Like [`degradation_factor`](Self::degradation_factor), but a leaf also
    /// needs `in_service` to count. Spares count only once engaged.
    pub fn capacity_factor(&self, id: &ComponentId, in_service: impl Fn(&ComponentId) -> bool) -> f64 {
        let leaves = self.leaves_under(id);
        let original = leaves
            .iter()
            .filter(|l| !self.component(l).is_some_and(|c| c.spare))
            .count();
        if original == 0 {
            return 1.0;
        }
        let active = leaves
            .iter()
            .filter(|l| {
                let idle_spare = self.component(l).is_some_and(|c| c.spare) && !self.engaged.contains(*l);
                !idle_spare && !self.excluded.contains(*l) && in_service(l)
            })
            .count();
        active.min(original) as f64 / original as f64
    }

    fn factor_after(&self, id: &ComponentId) -> f64 {
        let scope = self.parent(id).unwrap_or(id).clone();
        self.degradation_factor(&scope)
    }

    /// Excludes a component; returns the new model and the degradation
    /// factor of its parent.
    pub fn degrade(&self, id: &ComponentId) -> Result<(Self, f64), ModelError> {
        let mut next = self.clone();
        let factor = next.apply_exclude(id)?;
        Ok((next, factor))
    }

    pub(crate) fn apply_exclude(&mut self, id: &ComponentId) -> Result<f64, ModelError> {
        self.require(id)?;
        if self.excluded.contains(id) {
            return Ok(self.factor_after(id));
        }
        self.check_partition(id)?;
        self.excluded.insert(id.clone());
        Ok(self.factor_after(id))
    }

    fn check_partition(&self, id: &ComponentId) -> Result<(), PartitionError> {
        let err = |consumer: &ComponentId| PartitionError {
            excluded: id.clone(),
            consumer: consumer.clone(),
        };
        for e in self.consumers_of(id) {
            if self.excluded.contains(&e.consumer) {
                continue;
            }
            let alternative = e.semantics == EdgeSemantics::Redundant
                && self.providers_of(&e.consumer).any(|o| {
                    o.provider != *id && o.semantics == EdgeSemantics::Redundant && !self.excluded.contains(&o.provider)
                });
            if !alternative {
                return Err(err(&e.consumer));
            }
        }
        if let Some(parent) = self.parent(id) {
            let p = self.component(parent).expect("indexed");
            let removed: BTreeSet<ComponentId> = self.subtree(id).into_iter().collect();
            let survivors = self
                .leaves_under(parent)
                .into_iter()
                .filter(|l| !removed.contains(l) && !self.excluded.contains(l))
                .count();
            if p.composition == Composition::Serial || survivors == 0 {
                return Err(err(parent));
            }
        }
        Ok(())
    }

    /// Re-admits an excluded component after repair; idempotent.
    pub fn readmit(&self, id: &ComponentId) -> Result<(Self, f64), ModelError> {
        let mut next = self.clone();
        let factor = next.apply_readmit(id)?;
        Ok((next, factor))
    }

    pub(crate) fn apply_readmit(&mut self, id: &ComponentId) -> Result<f64, ModelError> {
        self.require(id)?;
        self.excluded.remove(id);
        Ok(self.factor_after(id))
    }

    /// Where the load of `from` should go: a spare sibling if one is
    /// available, otherwise the least-utilized sibling (ties by id).
    pub fn migration_target(&self, from: &ComponentId) -> Option<ComponentId> {
        let parent = self.parent(from)?;
        let candidates: Vec<&ComponentId> = self
            .children(parent)
            .iter()
            .filter(|c| {
                *c != from
                    && self.children(c).is_empty()
                    && !self.excluded.contains(*c)
                    && self.is_operational(c)
                    && self.status(c) == Some(OperationalStatus::ServiceDelivery)
            })
            .collect();
        let spare = candidates
            .iter()
            .filter(|c| self.component(c).is_some_and(|k| k.spare))
            .min()
            .copied();
        spare
            .or_else(|| {
                candidates
                    .iter()
                    .copied()
                    .min_by(|a, b| self.utilization(a).total_cmp(&self.utilization(b)).then_with(|| a.cmp(b)))
            })
            .cloned()
    }

    /// Moves the service edges and load of `from` onto `to`.
    pub fn rebind(&self, from: &ComponentId, to: &ComponentId) -> Result<Self, ModelError> {
        let mut next = self.clone();
        next.apply_rebind(from, to)?;
        Ok(next)
    }

    pub(crate) fn apply_rebind(&mut self, from: &ComponentId, to: &ComponentId) -> Result<(), ModelError> {
        self.require(from)?;
        self.require(to)?;
        let mut edges: Vec<ServiceEdge> = Vec::with_capacity(self.edges.len());
        for mut e in std::mem::take(&mut self.edges) {
            if e.provider == *from {
                e.provider = to.clone();
            }
            if e.consumer == *from {
                e.consumer = to.clone();
            }
            let duplicate = edges
                .iter()
                .any(|o| o.provider == e.provider && o.consumer == e.consumer);
            if e.provider != e.consumer && !duplicate {
                edges.push(e);
            }
        }
        self.edges = edges;
        let moved = self.utilization(from);
        *self.utilization.entry(to.clone()).or_insert(0.0) += moved;
        self.utilization.insert(from.clone(), 0.0);
        if self.component(to).is_some_and(|c| c.spare) {
            self.engaged.insert(to.clone());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(text: &str) -> SystemModel {
        SystemModel::from_toml(text).unwrap_or_else(|e| panic!("{e}"))
    }

    fn id(s: &str) -> ComponentId {
        ComponentId::new(s)
    }

    const POOL: &str = r#"
        [system]
        id = "pool"
        composition = "redundant"
        children = [{ id = "w1" }, { id = "w2" }, { id = "w3" }, { id = "w4" }]
    "#;

    #[test]
    fn single_node() {
        let m = model(
            r#"
            [system]
            id = "n"
            [[system.fault_sources]]
            classes = "active-transient-soft"
            dist = "exponential"
            params = { rate = 0.01 }
            "#,
        );
        assert_eq!(m.len(), 1);
        assert_eq!(m.root().fault_sources.len(), 1);
    }

    #[test]
    fn duplicate_id_is_reported_with_path() {
        let err = SystemModel::from_toml(
            r#"
            [system]
            id = "a"
            children = [{ id = "b" }, { id = "b" }]
            "#,
        )
        .unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert_eq!(err.0[0].path, "system.children[1].id");
    }

    #[test]
    fn schema_errors_collect_every_violation() {
        let err = SystemModel::from_toml(
            r#"
            [system]
            id = "a"
            utilization = 2.0
            [[system.fault_sources]]
            classes = "active-sometimes-soft"
            dist = "weibull"
            params = { shape = -1.0, scale = 3.0 }
            [[edges]]
            provider = "a"
            consumer = "ghost"
            "#,
        )
        .unwrap_err();
        let paths: Vec<&str> = err.0.iter().map(|e| e.path.as_str()).collect();
        assert!(paths.contains(&"system.utilization"));
        assert!(paths.contains(&"system.fault_sources[0].classes"));
        assert!(paths.contains(&"system.fault_sources[0].params"));
        assert!(paths.contains(&"edges[0].consumer"));
    }

    #[test]
    fn checkpoint_restart_topology() {
        let m = model(
            r#"
            [system]
            id = "node"
            children = [{ id = "process" }, { id = "disk" }]
            [[edges]]
            provider = "node"
            consumer = "process"
            [[edges]]
            provider = "disk"
            consumer = "process"
            "#,
        );
        assert_eq!(m.len(), 3);
        assert_eq!(m.edges().len(), 2);
        assert_eq!(m.parent(&id("disk")), Some(&id("node")));
    }

    #[test]
    fn cyclic_edges_rejected() {
        let err = SystemModel::from_toml(
            r#"
            [system]
            id = "r"
            children = [{ id = "a" }, { id = "b" }]
            [[edges]]
            provider = "a"
            consumer = "b"
            [[edges]]
            provider = "b"
            consumer = "a"
            "#,
        )
        .unwrap_err();
        assert_eq!(err.0[0].path, "edges");
    }

    #[test]
    fn status_bookkeeping() {
        let m = model(POOL);
        let w = id("w1");
        let m = m.set_status(&w, OperationalStatus::UnscheduledOutage, 10.0).unwrap();
        let m = m.set_status(&w, OperationalStatus::ServiceDelivery, 13.0).unwrap();
        let m = m.set_status(&w, OperationalStatus::ScheduledOutage, 20.0).unwrap();
        let m = m.set_status(&w, OperationalStatus::ServiceDelivery, 22.0).unwrap();
        let t = m.status_times(&w, 30.0).unwrap();
        assert_eq!(t, StatusTimes { t_pu: 25.0, t_ud: 3.0, t_sd: 2.0 });
        assert_eq!(t.total(), 30.0);
        assert!(matches!(
            m.set_status(&id("nope"), OperationalStatus::ServiceDelivery, 1.0),
            Err(ModelError::UnknownComponent(_))
        ));
        assert!(matches!(
            m.set_status(&w, OperationalStatus::ServiceDelivery, 1.0),
            Err(ModelError::TimeRegression { .. })
        ));
        let retired = m.set_lifecycle(&w, Lifecycle::Retired).unwrap();
        assert!(matches!(
            retired.set_status(&w, OperationalStatus::ServiceDelivery, 40.0),
            Err(ModelError::RetiredComponent(_))
        ));
        assert!(retired.set_lifecycle(&w, Lifecycle::Operational).is_err());
    }

    #[test]
    fn degrade_and_readmit() {
        let m = model(POOL);
        let (m1, f) = m.degrade(&id("w3")).unwrap();
        assert_eq!(f, 0.75);
        let (m2, f2) = m1.degrade(&id("w3")).unwrap();
        assert_eq!((f2, &m2), (0.75, &m1));
        let (m3, f3) = m2.readmit(&id("w3")).unwrap();
        assert_eq!(f3, 1.0);
        assert!(!m3.is_excluded(&id("w3")));
    }

    #[test]
    fn sole_provider_cannot_be_excluded() {
        let m = model(
            r#"
            [system]
            id = "r"
            composition = "redundant"
            children = [{ id = "fs" }, { id = "app" }, { id = "fs2" }]
            [[edges]]
            provider = "fs"
            consumer = "app"
            "#,
        );
        assert!(matches!(m.degrade(&id("fs")), Err(ModelError::Partition(_))));
        let redundant = model(
            r#"
            [system]
            id = "r"
            composition = "redundant"
            children = [{ id = "fs" }, { id = "app" }, { id = "fs2" }]
            [[edges]]
            provider = "fs"
            consumer = "app"
            semantics = "redundant"
            [[edges]]
            provider = "fs2"
            consumer = "app"
            semantics = "redundant"
            "#,
        );
        let (after, _) = redundant.degrade(&id("fs")).unwrap();
        assert!(matches!(after.degrade(&id("fs2")), Err(ModelError::Partition(_))));
    }

    #[test]
    fn engaged_spare_restores_capacity_and_is_preferred() {
        let m = model(
            r#"
            [system]
            id = "pool"
            composition = "redundant"
            children = [
                { id = "n1", utilization = 0.9 },
                { id = "n2", utilization = 0.2 },
                { id = "s1", spare = true },
            ]
            "#,
        );
        assert_eq!(m.migration_target(&id("n1")), Some(id("s1")));
        let (m, f) = m.degrade(&id("n1")).unwrap();
        assert_eq!(f, 0.5);
        let engaged = m.rebind(&id("n1"), &id("s1")).unwrap();
        assert_eq!(engaged.degradation_factor(&id("pool")), 1.0);
        let (without_spare, _) = m.degrade(&id("s1")).unwrap();
        assert_eq!(without_spare.migration_target(&id("n1")), Some(id("n2")));
    }

    #[test]
    fn lowest_utilization_ties_break_by_id() {
        let m = model(
            r#"
            [system]
            id = "pool"
            composition = "redundant"
            children = [{ id = "c", utilization = 0.5 }, { id = "b", utilization = 0.1 }, { id = "a", utilization = 0.1 }]
            "#,
        );
        assert_eq!(m.migration_target(&id("c")), Some(id("a")));
        let moved = m.rebind(&id("c"), &id("a")).unwrap();
        assert_eq!(moved.utilization(&id("a")), 0.6);
        assert_eq!(moved.utilization(&id("c")), 0.0);
    }

    #[test]
    fn coverage_reports_gaps() {
        let m = model(
            r#"
            [system]
            id = "node"
            state = { environment = 4.0 }
            [[system.children]]
            id = "matrix_a"
            state = { persistent = 64.0 }
            [[system.children]]
            id = "workspace"
            state = { dynamic = 16.0 }
            "#,
        );
        let all = ProtectionDomain::new(
            m.ids().iter().cloned(),
            [StateAspect::Persistent, StateAspect::Dynamic],
        )
        .unwrap();
        let c = m.coverage(&all);
        assert_eq!(c.uncovered_aspects, BTreeSet::from([StateAspect::Environment]));
        assert_eq!((c.covered_units, c.uncovered_units), (80.0, 4.0));

        let stateless = ProtectionDomain::new([id("node")], [StateAspect::Stateless]).unwrap();
        let c = m.coverage(&stateless);
        assert!(c.stateless_by_design);
        assert_eq!(c.covered_units, 0.0);

        let matrix = ProtectionDomain::new([id("matrix_a")], [StateAspect::Persistent]).unwrap();
        let c = m.coverage(&matrix);
        assert_eq!(c.covered_components, BTreeSet::from([id("matrix_a")]));
        assert_eq!(c.covered_aspects, BTreeSet::from([StateAspect::Persistent]));
        assert_eq!(c.covered_units, 64.0);

        assert_eq!(
            ProtectionDomain::new([id("node")], []).unwrap_err(),
            DomainError::NoAspects
        );
        assert_eq!(
            ProtectionDomain::new([id("node")], [StateAspect::Stateless, StateAspect::Dynamic]).unwrap_err(),
            DomainError::MixedStateless
        );
    }

    #[test]
    fn zero_rate_source_is_disabled() {
        let m = model(
            r#"
            [system]
            id = "n"
            [[system.fault_sources]]
            classes = "active-transient-soft"
            dist = "exponential"
            params = { rate = 0 }
            "#,
        );
        assert_eq!(m.root().fault_sources[0].interarrival, Interarrival::Never);
    }

    #[test]
    fn round_trip() {
        let m = model(
            r#"
            [system]
            id = "node"
            composition = "redundant"
            repair = { dist = "weibull", params = { shape = 1.5, scale = 0.3 } }
            [[system.children]]
            id = "p"
            name = "Process"
            utilization = 0.1
            state = { dynamic = 0.1, persistent = 3.3 }
            maintenance = [{ start_h = 5.5, duration_h = 2.0 }]
            [[system.children.fault_sources]]
            classes = "dormant-intermittent-hard"
            dist = "empirical"
            params = { samples = [0.3, 0.1] }
            recurrence_h = 0.7
            activation_delay_h = 1e-3
            precursor = { baseline = 40.0, critical = 90.0 }
            [[system.children]]
            id = "q"
            spare = true
            [[edges]]
            provider = "q"
            consumer = "p"
            semantics = "redundant"
            interaction_delay_h = 0.01
            "#,
        );
        let again = model(&m.to_toml());
        assert_eq!(again, m);
    }
}
