use std::collections::BTreeSet;

use serde::Serialize;

use super::hierarchy::{Architecture, PatternHierarchy, Strategy, Structure};
use super::Capability;
use crate::config::{InstanceDoc, Params, SchemaError, SchemaErrors};
use crate::engine::RecordKind;
use crate::model::{ProtectionDomain, StateAspect, SystemModel};
use crate::taxonomy::ComponentId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReplicaMode {
    Hot,
    Warm,
    Cold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Diversity {
    StateCopy,
    DesignVariant,
}

/// Replicas or variants behind a voter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplicaSet {
    pub count: u32,
    pub mode: ReplicaMode,
    pub diversity: Diversity,
}

impl ReplicaSet {
    pub fn can_compare(&self) -> bool {
        self.count >= 2
    }

    pub fn can_vote(&self) -> bool {
        self.count >= 3 && self.count % 2 == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NmrScheme {
    /// Replicated state with a voter (or comparator for N=2).
    Vote,
    /// Single error correction, double error detection codes.
    Secded,
    /// Checksum-encoded data structures that reconstruct corrupted elements.
    Checksum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RestructureMode {
    /// Move the load of the affected component elsewhere, then exclude it.
    Migrate,
    /// Exclude the affected component only.
    Exclude,
    /// Confine a detected error to the consuming application instead of the node.
    Relay,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitoringParams {
    pub interval: f64,
    pub latency: f64,
    pub miss_rate: f64,
    pub false_alarm_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionParams {
    pub threshold: f64,
    pub window: usize,
    pub sample_interval: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckpointParams {
    pub interval: f64,
    pub write_cost: f64,
    pub write_cost_per_unit: f64,
    pub restore_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RollforwardParams {
    pub checkpoint: CheckpointParams,
    pub rederive_cost: f64,
    pub journal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestructureParams {
    pub mode: RestructureMode,
    pub cost: f64,
    pub readmit: bool,
    /// Component that receives relayed errors; defaults to the workload.
    pub target: Option<ComponentId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NmrParams {
    pub replicas: u32,
    pub scheme: NmrScheme,
    pub mode: ReplicaMode,
    pub warm_start: f64,
    pub cold_start: f64,
    pub tolerance: f64,
    pub recovery_cost: f64,
    pub failure_probability: f64,
}

impl NmrParams {
    pub fn failover_latency(&self) -> f64 {
        match self.mode {
            ReplicaMode::Hot => 0.0,
            ReplicaMode::Warm => self.warm_start,
            ReplicaMode::Cold => self.cold_start,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NVersionParams {
    pub variants: u32,
    pub latencies: Vec<f64>,
    pub correlation: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryBlockParams {
    pub variants: u32,
    pub pass_probability: f64,
    pub execution_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "structure", rename_all = "snake_case")]
pub enum PatternParams {
    Monitoring(MonitoringParams),
    Prediction(PredictionParams),
    Restructure(RestructureParams),
    Rejuvenation { identify: f64, restore: f64 },
    Reinitialization { reboot: f64 },
    Rollback(CheckpointParams),
    Rollforward(RollforwardParams),
    Nmr(NmrParams),
    #[serde(rename = "nversion")]
    NVersion(NVersionParams),
    RecoveryBlock(RecoveryBlockParams),
}

impl PatternParams {
    pub fn structure(&self) -> Structure {
        match self {
            Self::Monitoring(_) => Structure::Monitoring,
            Self::Prediction(_) => Structure::Prediction,
            Self::Restructure(_) => Structure::Restructure,
            Self::Rejuvenation { .. } => Structure::Rejuvenation,
            Self::Reinitialization { .. } => Structure::Reinitialization,
            Self::Rollback(_) => Structure::Rollback,
            Self::Rollforward(_) => Structure::Rollforward,
            Self::Nmr(_) => Structure::Nmr,
            Self::NVersion(_) => Structure::NVersion,
            Self::RecoveryBlock(_) => Structure::RecoveryBlock,
        }
    }

    pub fn replica_set(&self) -> Option<ReplicaSet> {
        match self {
            Self::Nmr(p) => Some(ReplicaSet {
                count: p.replicas,
                mode: p.mode,
                diversity: Diversity::StateCopy,
            }),
            Self::NVersion(p) => Some(ReplicaSet {
                count: p.variants,
                mode: ReplicaMode::Hot,
                diversity: Diversity::DesignVariant,
            }),
            _ => None,
        }
    }

    /// Capabilities follow from the kind and its parameters.
    pub fn capabilities(&self) -> BTreeSet<Capability> {
        use Capability::*;
        let voting = |n: u32| {
            if n >= 3 && n % 2 == 1 {
                BTreeSet::from([Detection, Containment, Mitigation])
            } else {
                BTreeSet::from([Detection])
            }
        };
        match self {
            Self::Monitoring(_) | Self::Prediction(_) => BTreeSet::from([Detection]),
            Self::Restructure(p) if p.mode == RestructureMode::Relay => BTreeSet::from([Containment]),
            Self::Restructure(_)
            | Self::Rejuvenation { .. }
            | Self::Reinitialization { .. }
            | Self::Rollback(_)
            | Self::Rollforward(_) => BTreeSet::from([Containment, Mitigation]),
            Self::Nmr(p) => match p.scheme {
                NmrScheme::Vote => voting(p.replicas),
                NmrScheme::Secded => BTreeSet::from([Detection, Mitigation]),
                NmrScheme::Checksum => BTreeSet::from([Mitigation]),
            },
            Self::NVersion(p) => voting(p.variants),
            Self::RecoveryBlock(_) => BTreeSet::from([Detection, Containment, Mitigation]),
        }
    }

    /// Whether this instance depends on some other instance to notice events.
    pub fn needs_external_detection(&self) -> bool {
        !self.capabilities().contains(&Capability::Detection)
    }

    fn default_activation(&self) -> (BTreeSet<RecordKind>, Vec<ClassPattern>) {
        use RecordKind as K;
        let undetected = vec![ClassPattern::new("undetected-*-*-*")];
        let due = vec![ClassPattern::new("detected-unmasked-*-uncorrected")];
        match self {
            Self::Monitoring(_) => (BTreeSet::from([K::Failure]), vec![]),
            Self::Prediction(_) => (BTreeSet::from([K::Fault]), vec![]),
            Self::Rollback(_) | Self::Rollforward(_) | Self::Rejuvenation { .. } | Self::Reinitialization { .. } => {
                (BTreeSet::from([K::Detect]), vec![])
            }
            Self::Restructure(p) if p.mode == RestructureMode::Relay => (BTreeSet::from([K::Error]), due),
            Self::Restructure(_) => (BTreeSet::from([K::Predict, K::Detect]), vec![]),
            Self::Nmr(p) if p.scheme == NmrScheme::Checksum => (BTreeSet::from([K::Respond]), due),
            Self::Nmr(_) | Self::NVersion(_) | Self::RecoveryBlock(_) => (BTreeSet::from([K::Error]), undetected),
        }
    }
}

/// Capabilities of a structure with default parameters.
pub fn default_capabilities(s: Structure) -> BTreeSet<Capability> {
    let table = toml::Table::new();
    let mut errors = Vec::new();
    let params = match s {
        Structure::Monitoring => PatternParams::Monitoring(MonitoringParams {
            interval: 1.0,
            latency: 1.0,
            miss_rate: 0.0,
            false_alarm_rate: 0.0,
        }),
        Structure::Prediction => PatternParams::Prediction(PredictionParams {
            threshold: 0.0,
            window: 5,
            sample_interval: 1.0,
            margin: 1.0,
        }),
        Structure::Rollback => PatternParams::Rollback(CheckpointParams {
            interval: 1.0,
            write_cost: 0.0,
            write_cost_per_unit: 0.0,
            restore_cost: 0.0,
        }),
        Structure::Rollforward => PatternParams::Rollforward(RollforwardParams {
            checkpoint: CheckpointParams {
                interval: 1.0,
                write_cost: 0.0,
                write_cost_per_unit: 0.0,
                restore_cost: 0.0,
            },
            rederive_cost: 0.0,
            journal: true,
        }),
        other => parse_params(other, &table, "params", &mut errors).expect("defaults are valid"),
    };
    params.capabilities()
}

/// One hyphen-separated class tuple where `*` matches any word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct ClassPattern(String);

impl ClassPattern {
    pub fn new(pattern: impl Into<String>) -> Self {
        Self(pattern.into())
    }

    pub fn matches(&self, class: &str) -> bool {
        let pat: Vec<&str> = self.0.split('-').collect();
        let words: Vec<&str> = class.split('-').collect();
        pat.len() == words.len() && pat.iter().zip(&words).all(|(p, w)| *p == "*" || p == w)
    }
}

/// Which records an instance reacts to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActivationFilter {
    pub kinds: BTreeSet<RecordKind>,
    /// Empty means any class.
    pub classes: Vec<ClassPattern>,
    /// Empty means the instance's protection domain (with descendants).
    pub components: BTreeSet<ComponentId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternInstance {
    pub name: String,
    pub hierarchy: PatternHierarchy,
    /// Ancestors named in the configuration, if any.
    pub declared_strategy: Option<Strategy>,
    pub declared_architecture: Option<Architecture>,
    pub domain: ProtectionDomain,
    pub params: PatternParams,
    pub activation: ActivationFilter,
}

impl PatternInstance {
    /// An instance with the default activation filter for its parameters.
    pub fn new(name: impl Into<String>, domain: ProtectionDomain, params: PatternParams) -> Self {
        let (kinds, classes) = params.default_activation();
        Self {
            name: name.into(),
            hierarchy: PatternHierarchy::of(params.structure()),
            declared_strategy: None,
            declared_architecture: None,
            domain,
            params,
            activation: ActivationFilter {
                kinds,
                classes,
                components: BTreeSet::new(),
            },
        }
    }

    /// Declared ancestors agree with the fixed parent map.
    pub fn hierarchy_consistent(&self) -> Result<(), String> {
        PatternHierarchy::check(self.structure(), self.declared_strategy, self.declared_architecture).map(|_| ())
    }

    pub fn structure(&self) -> Structure {
        self.hierarchy.structure
    }

    pub fn capabilities(&self) -> BTreeSet<Capability> {
        self.params.capabilities()
    }

    /// Components whose records can activate this instance.
    pub fn scope(&self, model: &SystemModel) -> BTreeSet<ComponentId> {
        if self.activation.components.is_empty() {
            model.domain_closure(&self.domain)
        } else {
            self.activation
                .components
                .iter()
                .flat_map(|c| model.subtree(c))
                .collect()
        }
    }

    pub fn activates_on(&self, kind: RecordKind, class: &str, component: &ComponentId, model: &SystemModel) -> bool {
        self.activation.kinds.contains(&kind)
            && (self.activation.classes.is_empty() || self.activation.classes.iter().any(|p| p.matches(class)))
            && self.scope(model).contains(component)
    }
}

/// A set of pattern instances. Capabilities are always derived.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ResilienceSolution {
    pub instances: Vec<PatternInstance>,
}

impl ResilienceSolution {
    pub fn new(instances: Vec<PatternInstance>) -> Self {
        Self { instances }
    }

    pub fn capabilities(&self) -> BTreeSet<Capability> {
        self.instances.iter().flat_map(|i| i.capabilities()).collect()
    }

    pub fn structures(&self) -> BTreeSet<Structure> {
        self.instances.iter().map(|i| i.structure()).collect()
    }

    pub fn without(&self, index: usize) -> Self {
        let mut instances = self.instances.clone();
        instances.remove(index);
        Self { instances }
    }
}

fn check(cond: bool, params: &mut Params<'_>, key: &str, message: &str) {
    if !cond {
        params.err(key, message);
    }
}

fn bool_param(params: &mut Params<'_>, key: &str, default: bool) -> bool {
    match params.table.get(key) {
        None => default,
        Some(toml::Value::Boolean(b)) => *b,
        Some(_) => {
            params.err(key, "expected true or false");
            default
        }
    }
}

fn non_neg(params: &mut Params<'_>, key: &str) -> f64 {
    let v = params.f64_or(key, 0.0);
    check(v >= 0.0 && v.is_finite(), params, key, "must be >= 0");
    v
}

fn probability(params: &mut Params<'_>, key: &str, default: f64) -> f64 {
    let v = params.f64_or(key, default);
    check((0.0..=1.0).contains(&v), params, key, "must lie in [0, 1]");
    v
}

fn enum_param<T>(params: &mut Params<'_>, key: &str, default: T, words: &[(&str, T)]) -> T
where
    T: Copy,
{
    match params.str_opt(key) {
        None => default,
        Some(s) => match words.iter().find(|(w, _)| *w == s) {
            Some((_, v)) => *v,
            None => {
                let options: Vec<&str> = words.iter().map(|(w, _)| *w).collect();
                params.err(key, format!("expected one of {}", options.join(", ")));
                default
            }
        },
    }
}

fn checkpoint_params(params: &mut Params<'_>) -> CheckpointParams {
    let interval = params.f64_req("interval_h").unwrap_or(1.0);
    check(interval > 0.0 && interval.is_finite(), params, "interval_h", "must be > 0");
    CheckpointParams {
        interval,
        write_cost: non_neg(params, "write_cost_h"),
        write_cost_per_unit: non_neg(params, "write_cost_per_unit_h"),
        restore_cost: non_neg(params, "restore_cost_h"),
    }
}

fn count(params: &mut Params<'_>, key: &str, default: u64, min: u64) -> u32 {
    let n = params.u64_opt(key).unwrap_or(default);
    check(n >= min && n <= u32::MAX as u64, params, key, &format!("must be >= {min}"));
    n.min(u32::MAX as u64) as u32
}

/// Validates the `params` table of one instance.
pub(crate) fn parse_params(
    structure: Structure,
    table: &toml::Table,
    path: &str,
    errors: &mut Vec<SchemaError>,
) -> Option<PatternParams> {
    let before = errors.len();
    let mut p = Params::new(table, path, errors);
    let params = match structure {
        Structure::Monitoring => {
            p.deny_unknown(&["interval_h", "latency_h", "miss_rate", "false_alarm_rate"]);
            let interval = p.f64_req("interval_h").unwrap_or(1.0);
            check(interval > 0.0 && interval.is_finite(), &mut p, "interval_h", "must be > 0");
            let latency = p.f64_or("latency_h", interval);
            check(latency >= 0.0 && latency.is_finite(), &mut p, "latency_h", "must be >= 0");
            let miss_rate = p.f64_or("miss_rate", 0.0);
            check((0.0..1.0).contains(&miss_rate), &mut p, "miss_rate", "must lie in [0, 1)");
            PatternParams::Monitoring(MonitoringParams {
                interval,
                latency,
                miss_rate,
                false_alarm_rate: non_neg(&mut p, "false_alarm_rate"),
            })
        }
        Structure::Prediction => {
            p.deny_unknown(&["threshold", "window", "sample_interval_h", "margin_h"]);
            let threshold = p.f64_req("threshold").unwrap_or(0.0);
            let window = count(&mut p, "window", 5, 2) as usize;
            let sample_interval = p.f64_or("sample_interval_h", 1.0);
            check(sample_interval > 0.0, &mut p, "sample_interval_h", "must be > 0");
            let margin = p.f64_or("margin_h", 1.0);
            check(margin >= 0.0, &mut p, "margin_h", "must be >= 0");
            PatternParams::Prediction(PredictionParams {
                threshold,
                window,
                sample_interval,
                margin,
            })
        }
        Structure::Restructure => {
            p.deny_unknown(&["mode", "cost_h", "readmit", "target"]);
            let mode = enum_param(
                &mut p,
                "mode",
                RestructureMode::Migrate,
                &[
                    ("migrate", RestructureMode::Migrate),
                    ("exclude", RestructureMode::Exclude),
                    ("relay", RestructureMode::Relay),
                ],
            );
            PatternParams::Restructure(RestructureParams {
                mode,
                cost: non_neg(&mut p, "cost_h"),
                readmit: bool_param(&mut p, "readmit", true),
                target: p.str_opt("target").map(ComponentId::new),
            })
        }
        Structure::Rejuvenation => {
            p.deny_unknown(&["identify_h", "restore_h"]);
            PatternParams::Rejuvenation {
                identify: non_neg(&mut p, "identify_h"),
                restore: non_neg(&mut p, "restore_h"),
            }
        }
        Structure::Reinitialization => {
            p.deny_unknown(&["reboot_h"]);
            PatternParams::Reinitialization {
                reboot: non_neg(&mut p, "reboot_h"),
            }
        }
        Structure::Rollback => {
            p.deny_unknown(&["interval_h", "write_cost_h", "write_cost_per_unit_h", "restore_cost_h"]);
            PatternParams::Rollback(checkpoint_params(&mut p))
        }
        Structure::Rollforward => {
            p.deny_unknown(&[
                "interval_h",
                "write_cost_h",
                "write_cost_per_unit_h",
                "restore_cost_h",
                "rederive_cost_h",
                "journal",
            ]);
            PatternParams::Rollforward(RollforwardParams {
                checkpoint: checkpoint_params(&mut p),
                rederive_cost: non_neg(&mut p, "rederive_cost_h"),
                journal: bool_param(&mut p, "journal", true),
            })
        }
        Structure::Nmr => {
            p.deny_unknown(&[
                "replicas",
                "scheme",
                "mode",
                "warm_start_h",
                "cold_start_h",
                "tolerance",
                "recovery_cost_h",
                "failure_probability",
            ]);
            let scheme = enum_param(
                &mut p,
                "scheme",
                NmrScheme::Vote,
                &[
                    ("vote", NmrScheme::Vote),
                    ("secded", NmrScheme::Secded),
                    ("checksum", NmrScheme::Checksum),
                ],
            );
            let min = if scheme == NmrScheme::Vote { 2 } else { 1 };
            PatternParams::Nmr(NmrParams {
                replicas: count(&mut p, "replicas", 3, min),
                scheme,
                mode: enum_param(
                    &mut p,
                    "mode",
                    ReplicaMode::Hot,
                    &[
                        ("hot", ReplicaMode::Hot),
                        ("warm", ReplicaMode::Warm),
                        ("cold", ReplicaMode::Cold),
                    ],
                ),
                warm_start: non_neg(&mut p, "warm_start_h"),
                cold_start: non_neg(&mut p, "cold_start_h"),
                tolerance: non_neg(&mut p, "tolerance"),
                recovery_cost: non_neg(&mut p, "recovery_cost_h"),
                failure_probability: probability(&mut p, "failure_probability", 0.0),
            })
        }
        Structure::NVersion => {
            p.deny_unknown(&["variants", "latencies_h", "correlation", "tolerance"]);
            let variants = count(&mut p, "variants", 3, 2);
            let latencies = p.f64_list("latencies_h").unwrap_or_default();
            if !latencies.is_empty() && latencies.len() != variants as usize {
                p.err("latencies_h", "needs one latency per variant");
            }
            if latencies.iter().any(|l| !(*l >= 0.0)) {
                p.err("latencies_h", "latencies must be >= 0");
            }
            PatternParams::NVersion(NVersionParams {
                variants,
                latencies,
                correlation: probability(&mut p, "correlation", 0.0),
                tolerance: non_neg(&mut p, "tolerance"),
            })
        }
        Structure::RecoveryBlock => {
            p.deny_unknown(&["variants", "pass_probability", "execution_cost_h"]);
            PatternParams::RecoveryBlock(RecoveryBlockParams {
                variants: count(&mut p, "variants", 2, 1),
                pass_probability: probability(&mut p, "pass_probability", 0.9),
                execution_cost: non_neg(&mut p, "execution_cost_h"),
            })
        }
    };
    (errors.len() == before).then_some(params)
}

fn record_kind(word: &str) -> Option<RecordKind> {
    word.parse().ok()
}

/// Builds and checks every `[[solution]]` entry against the model.
pub fn build_solution(docs: &[InstanceDoc], model: &SystemModel) -> Result<ResilienceSolution, SchemaErrors> {
    let mut errors = Vec::new();
    let mut instances = Vec::new();
    for (i, doc) in docs.iter().enumerate() {
        let path = format!("solution[{i}]");
        let before = errors.len();
        let structure: Option<Structure> = match doc.structure.parse() {
            Ok(s) => Some(s),
            Err(e) => {
                errors.push(SchemaError::new(format!("{path}.structure"), e));
                None
            }
        };
        let strategy: Option<Strategy> = doc.strategy.as_deref().and_then(|s| match s.parse() {
            Ok(v) => Some(v),
            Err(e) => {
                errors.push(SchemaError::new(format!("{path}.strategy"), e));
                None
            }
        });
        let architecture: Option<Architecture> = doc.architecture.as_deref().and_then(|s| match s.parse() {
            Ok(v) => Some(v),
            Err(e) => {
                errors.push(SchemaError::new(format!("{path}.architecture"), e));
                None
            }
        });
        let components: Vec<ComponentId> = doc.domain.components.iter().map(|c| ComponentId::new(c.clone())).collect();
        for (j, c) in components.iter().enumerate() {
            if !model.contains(c) {
                errors.push(SchemaError::new(
                    format!("{path}.domain.components[{j}]"),
                    format!("unknown component `{c}`"),
                ));
            }
        }
        let aspects: Vec<StateAspect> = doc.domain.aspects.clone();
        let domain = match ProtectionDomain::new(components, aspects) {
            Ok(d) => Some(d),
            Err(e) => {
                errors.push(SchemaError::new(format!("{path}.domain"), e.to_string()));
                None
            }
        };
        let Some(structure) = structure else { continue };
        let params = parse_params(structure, &doc.params, &format!("{path}.params"), &mut errors);
        // Declared ancestors that contradict the fixed hierarchy are kept for
        // the validator to report; only unparseable names are schema errors.
        let hierarchy = PatternHierarchy::of(structure);
        if let Some(PatternParams::Restructure(RestructureParams { target: Some(t), .. })) = &params {
            if !model.contains(t) {
                errors.push(SchemaError::new(format!("{path}.params.target"), format!("unknown component `{t}`")));
            }
        }
        let activation = params.as_ref().map(|p| {
            let (kinds, classes) = p.default_activation();
            match &doc.activation {
                None => ActivationFilter {
                    kinds,
                    classes,
                    components: BTreeSet::new(),
                },
                Some(a) => {
                    let mut parsed = BTreeSet::new();
                    for (j, k) in a.kinds.iter().enumerate() {
                        match record_kind(k) {
                            Some(kind) => {
                                parsed.insert(kind);
                            }
                            None => errors.push(SchemaError::new(
                                format!("{path}.activation.kinds[{j}]"),
                                format!("unknown record kind `{k}`"),
                            )),
                        }
                    }
                    for (j, c) in a.components.iter().enumerate() {
                        if !model.contains(&ComponentId::new(c.clone())) {
                            errors.push(SchemaError::new(
                                format!("{path}.activation.components[{j}]"),
                                format!("unknown component `{c}`"),
                            ));
                        }
                    }
                    ActivationFilter {
                        kinds: if parsed.is_empty() { kinds } else { parsed },
                        classes: if a.classes.is_empty() {
                            classes
                        } else {
                            a.classes.iter().map(ClassPattern::new).collect()
                        },
                        components: a.components.iter().map(|c| ComponentId::new(c.clone())).collect(),
                    }
                }
            }
        });
        if errors.len() > before {
            continue;
        }
        let (Some(domain), Some(params), Some(activation)) = (domain, params, activation) else {
            continue;
        };
        let name = doc.name.clone().unwrap_or_else(|| format!("{structure}#{i}"));
        instances.push(PatternInstance {
            name,
            hierarchy,
            declared_strategy: strategy,
            declared_architecture: architecture,
            domain,
            params,
            activation,
        });
    }
    if errors.is_empty() {
        Ok(ResilienceSolution { instances })
    } else {
        Err(SchemaErrors(errors))
    }
}
