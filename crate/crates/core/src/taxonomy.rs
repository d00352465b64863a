//! Fault, error and failure classes and the causality DAG that links them.
//!
//! Every event carries a class tuple. Tuples render as lowercase hyphen-joined
//! words (`dormant-transient-soft`, `undetected-unmasked-soft-uncorrected`,
//! `detected-permanent-complete`); that spelling is part of the trace format.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TaxonomyError {
    #[error("benign fault {0} never activates")]
    BenignFault(EventId),
    #[error("event {id} is a {actual}, expected a {expected}")]
    WrongKind {
        id: EventId,
        expected: EventKind,
        actual: EventKind,
    },
    #[error("trigger at t={trigger} precedes fault time t={fault}")]
    TriggerBeforeFault { trigger: f64, fault: f64 },
    #[error("error {0} is masked or corrected and cannot escalate")]
    MaskedError(EventId),
    #[error("inconsistent error descriptor {0}: corrected errors must be detected and masked")]
    InconsistentDescriptor(ErrorDescriptor),
    #[error("cannot parse class tuple `{0}`")]
    Parse(String),
}

macro_rules! word_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $word:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "lowercase")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $word),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = TaxonomyError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($word => Ok($name::$variant),)+
                    other => Err(TaxonomyError::Parse(other.to_string())),
                }
            }
        }
    };
}

word_enum!(
    /// Whether a fault ever becomes active.
    Activity { Benign => "benign", Dormant => "dormant", Active => "active" }
);
word_enum!(
    /// Presence of a fault or failure over time.
    Persistence { Permanent => "permanent", Transient => "transient", Intermittent => "intermittent" }
);
word_enum!(
    /// Hard (systematically reproducible) or soft. Doubles as the error origin axis.
    Reproducibility { Hard => "hard", Soft => "soft" }
);
word_enum!(Detection { Undetected => "undetected", Detected => "detected" });
word_enum!(Masking { Unmasked => "unmasked", Masked => "masked" });
word_enum!(Correction { Uncorrected => "uncorrected", Corrected => "corrected" });
word_enum!(Severity { Complete => "complete", Partial => "partial", Byzantine => "byzantine" });
word_enum!(EventKind { Fault => "fault", Error => "error", Failure => "failure" });

/// How the consumer of an erroneous value treats it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConsumerSemantics {
    /// The value is absorbed (e.g. multiplied by zero); the error stops here.
    Annihilating,
    Propagating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FaultDescriptor {
    pub activity: Activity,
    pub persistence: Persistence,
    pub reproducibility: Reproducibility,
}

impl FaultDescriptor {
    pub fn new(activity: Activity, persistence: Persistence, reproducibility: Reproducibility) -> Self {
        Self {
            activity,
            persistence,
            reproducibility,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ErrorDescriptor {
    pub detection: Detection,
    pub masking: Masking,
    pub origin: Reproducibility,
    pub correction: Correction,
}

impl ErrorDescriptor {
    /// A freshly activated error: nobody has seen it and it propagates.
    pub fn latent(origin: Reproducibility) -> Self {
        Self {
            detection: Detection::Undetected,
            masking: Masking::Unmasked,
            origin,
            correction: Correction::Uncorrected,
        }
    }

    /// Detected, masked and corrected (a DCE).
    pub fn corrected(origin: Reproducibility) -> Self {
        Self {
            detection: Detection::Detected,
            masking: Masking::Masked,
            origin,
            correction: Correction::Corrected,
        }
    }

    /// Detected but still propagating (a DUE).
    pub fn detected_uncorrected(origin: Reproducibility) -> Self {
        Self {
            detection: Detection::Detected,
            masking: Masking::Unmasked,
            origin,
            correction: Correction::Uncorrected,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.correction == Correction::Uncorrected
            || (self.detection == Detection::Detected && self.masking == Masking::Masked)
    }

    pub fn checked(self) -> Result<Self, TaxonomyError> {
        if self.is_consistent() {
            Ok(self)
        } else {
            Err(TaxonomyError::InconsistentDescriptor(self))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FailureDescriptor {
    pub detection: Detection,
    pub persistence: Persistence,
    pub severity: Severity,
}

impl FailureDescriptor {
    pub fn new(detection: Detection, persistence: Persistence, severity: Severity) -> Self {
        Self {
            detection,
            persistence,
            severity,
        }
    }

    pub fn is_fail_stop(&self) -> bool {
        self.persistence == Persistence::Permanent && self.severity == Severity::Complete
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Descriptor {
    Fault(FaultDescriptor),
    Error(ErrorDescriptor),
    Failure(FailureDescriptor),
}

impl Descriptor {
    pub fn kind(&self) -> EventKind {
        match self {
            Descriptor::Fault(_) => EventKind::Fault,
            Descriptor::Error(_) => EventKind::Error,
            Descriptor::Failure(_) => EventKind::Failure,
        }
    }
}

impl fmt::Display for FaultDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-{}", self.activity, self.persistence, self.reproducibility)
    }
}

impl fmt::Display for ErrorDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}-{}-{}-{}",
            self.detection, self.masking, self.origin, self.correction
        )
    }
}

impl fmt::Display for FailureDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-{}", self.detection, self.persistence, self.severity)
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Descriptor::Fault(d) => d.fmt(f),
            Descriptor::Error(d) => d.fmt(f),
            Descriptor::Failure(d) => d.fmt(f),
        }
    }
}

fn split_tuple<const N: usize>(s: &str) -> Result<[&str; N], TaxonomyError> {
    let parts: Vec<&str> = s.split('-').collect();
    parts
        .try_into()
        .map_err(|_| TaxonomyError::Parse(s.to_string()))
}

impl FromStr for FaultDescriptor {
    type Err = TaxonomyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let [a, p, r] = split_tuple::<3>(s)?;
        let bad = |_| TaxonomyError::Parse(s.to_string());
        Ok(Self::new(a.parse().map_err(bad)?, p.parse().map_err(bad)?, r.parse().map_err(bad)?))
    }
}

impl FromStr for ErrorDescriptor {
    type Err = TaxonomyError;

    /// Accepts the full four-word form, or the three-word form with
    /// correction implied (`uncorrected` unless detected and masked).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |_| TaxonomyError::Parse(s.to_string());
        let parts: Vec<&str> = s.split('-').collect();
        let (d, m, o, c) = match parts.as_slice() {
            [d, m, o, c] => (*d, *m, *o, Some(*c)),
            [d, m, o] => (*d, *m, *o, None),
            _ => return Err(TaxonomyError::Parse(s.to_string())),
        };
        let detection: Detection = d.parse().map_err(bad)?;
        let masking: Masking = m.parse().map_err(bad)?;
        let origin: Reproducibility = o.parse().map_err(bad)?;
        let correction = match c {
            Some(c) => c.parse().map_err(bad)?,
            None if detection == Detection::Detected && masking == Masking::Masked => {
                Correction::Corrected
            }
            None => Correction::Uncorrected,
        };
        ErrorDescriptor {
            detection,
            masking,
            origin,
            correction,
        }
        .checked()
    }
}

impl FromStr for FailureDescriptor {
    type Err = TaxonomyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let [d, p, v] = split_tuple::<3>(s)?;
        let bad = |_| TaxonomyError::Parse(s.to_string());
        Ok(Self::new(d.parse().map_err(bad)?, p.parse().map_err(bad)?, v.parse().map_err(bad)?))
    }
}

impl FromStr for Descriptor {
    type Err = TaxonomyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let first = s.split('-').next().unwrap_or_default();
        if Activity::from_str(first).is_ok() {
            return s.parse().map(Descriptor::Fault);
        }
        if let Ok(d) = s.parse::<FailureDescriptor>() {
            return Ok(Descriptor::Failure(d));
        }
        s.parse().map(Descriptor::Error)
    }
}

macro_rules! string_serde {
    ($($ty:ty),+) => {
        $(
            impl Serialize for $ty {
                fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                    s.collect_str(self)
                }
            }

            impl<'de> Deserialize<'de> for $ty {
                fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                    let s = String::deserialize(d)?;
                    s.parse().map_err(serde::de::Error::custom)
                }
            }
        )+
    };
}

string_serde!(FaultDescriptor, ErrorDescriptor, FailureDescriptor, Descriptor);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EventId(pub u64);

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComponentId(pub String);

impl ComponentId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ComponentId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

/// One vertex of the fault-error-failure DAG.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub id: EventId,
    /// Simulation hours.
    pub time: f64,
    pub component: ComponentId,
    pub descriptor: Descriptor,
    pub cause: Option<EventId>,
}

impl Event {
    pub fn kind(&self) -> EventKind {
        self.descriptor.kind()
    }

    pub fn fault(id: EventId, time: f64, component: ComponentId, d: FaultDescriptor) -> Self {
        Self {
            id,
            time,
            component,
            descriptor: Descriptor::Fault(d),
            cause: None,
        }
    }

    pub fn with_cause(mut self, cause: EventId) -> Self {
        self.cause = Some(cause);
        self
    }

    fn expect_kind(&self, expected: EventKind) -> Result<(), TaxonomyError> {
        if self.kind() == expected {
            Ok(())
        } else {
            Err(TaxonomyError::WrongKind {
                id: self.id,
                expected,
                actual: self.kind(),
            })
        }
    }
}

/// Error origin follows the persistence of the fault that caused it.
pub fn origin_of(persistence: Persistence) -> Reproducibility {
    match persistence {
        Persistence::Permanent => Reproducibility::Hard,
        Persistence::Transient | Persistence::Intermittent => Reproducibility::Soft,
    }
}

/// Activates a dormant or active fault, producing the error it causes.
pub fn activate_fault(fault: &Event, trigger_time: f64, id: EventId) -> Result<Event, TaxonomyError> {
    fault.expect_kind(EventKind::Fault)?;
    let Descriptor::Fault(fd) = fault.descriptor else {
        unreachable!()
    };
    if fd.activity == Activity::Benign {
        return Err(TaxonomyError::BenignFault(fault.id));
    }
    if trigger_time < fault.time {
        return Err(TaxonomyError::TriggerBeforeFault {
            trigger: trigger_time,
            fault: fault.time,
        });
    }
    Ok(Event {
        id,
        time: trigger_time,
        component: fault.component.clone(),
        descriptor: Descriptor::Error(ErrorDescriptor::latent(origin_of(fd.persistence))),
        cause: Some(fault.id),
    })
}

/// Applies the consumer's treatment of an erroneous value. Masking is final.
pub fn mask_check(error: &Event, consumer: ConsumerSemantics) -> Result<ErrorDescriptor, TaxonomyError> {
    error.expect_kind(EventKind::Error)?;
    let Descriptor::Error(mut ed) = error.descriptor else {
        unreachable!()
    };
    if consumer == ConsumerSemantics::Annihilating {
        ed.masking = Masking::Masked;
    }
    Ok(ed)
}

/// An unmasked, uncorrected error reaching the service interface becomes a failure.
pub fn escalate_to_failure(
    error: &Event,
    descriptor: FailureDescriptor,
    at: f64,
    id: EventId,
) -> Result<Event, TaxonomyError> {
    error.expect_kind(EventKind::Error)?;
    let Descriptor::Error(ed) = error.descriptor else {
        unreachable!()
    };
    if ed.masking == Masking::Masked || ed.correction == Correction::Corrected {
        return Err(TaxonomyError::MaskedError(error.id));
    }
    Ok(Event {
        id,
        time: at.max(error.time),
        component: error.component.clone(),
        descriptor: Descriptor::Failure(descriptor),
        cause: Some(error.id),
    })
}

/// External faults induced in the dependents of a failed component.
pub fn cascade(
    failure: &Event,
    dependents: &[ComponentId],
    mut next_id: impl FnMut() -> EventId,
) -> Result<Vec<Event>, TaxonomyError> {
    failure.expect_kind(EventKind::Failure)?;
    let Descriptor::Failure(fd) = failure.descriptor else {
        unreachable!()
    };
    let template = FaultDescriptor::new(Activity::Dormant, fd.persistence, origin_of(fd.persistence));
    Ok(dependents
        .iter()
        .map(|c| Event {
            id: next_id(),
            time: failure.time,
            component: c.clone(),
            descriptor: Descriptor::Fault(template),
            cause: Some(failure.id),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CommonTerm {
    LatentFault,
    SolidFault,
    ElusiveFault,
    UE,
    LatentError,
    SilentError,
    SDC,
    DE,
    DUE,
    DCE,
    FailStop,
}

impl CommonTerm {
    pub fn label(self) -> &'static str {
        match self {
            CommonTerm::LatentFault => "latent fault",
            CommonTerm::SolidFault => "solid fault",
            CommonTerm::ElusiveFault => "elusive fault",
            CommonTerm::UE => "UE",
            CommonTerm::LatentError => "latent error",
            CommonTerm::SilentError => "silent error",
            CommonTerm::SDC => "SDC",
            CommonTerm::DE => "DE",
            CommonTerm::DUE => "DUE",
            CommonTerm::DCE => "DCE",
            CommonTerm::FailStop => "fail-stop",
        }
    }
}

impl fmt::Display for CommonTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// All common-usage labels that apply to a class tuple.
pub fn common_term(descriptor: &Descriptor) -> BTreeSet<CommonTerm> {
    let mut terms = BTreeSet::new();
    match descriptor {
        Descriptor::Fault(d) => {
            if d.activity == Activity::Dormant {
                terms.insert(CommonTerm::LatentFault);
            }
            terms.insert(match d.reproducibility {
                Reproducibility::Hard => CommonTerm::SolidFault,
                Reproducibility::Soft => CommonTerm::ElusiveFault,
            });
        }
        Descriptor::Error(d) => match (d.detection, d.masking) {
            (Detection::Undetected, masking) => {
                terms.extend([CommonTerm::UE, CommonTerm::LatentError, CommonTerm::SilentError]);
                if masking == Masking::Unmasked {
                    terms.insert(CommonTerm::SDC);
                }
            }
            (Detection::Detected, Masking::Unmasked) => {
                terms.extend([CommonTerm::DE, CommonTerm::DUE]);
            }
            (Detection::Detected, Masking::Masked) => {
                terms.extend([CommonTerm::DE, CommonTerm::DCE]);
            }
        },
        Descriptor::Failure(d) => {
            if d.is_fail_stop() {
                terms.insert(CommonTerm::FailStop);
            }
        }
    }
    terms
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    DuplicateId(EventId),
    DanglingCause { event: EventId, cause: EventId },
    Cycle(EventId),
    KindOrder { event: EventId, parent: EventId, from: EventKind, to: EventKind },
    TimeRegression { event: EventId, parent: EventId },
    NegativeTime(EventId),
    BenignParent { event: EventId, fault: EventId },
    OrphanError(EventId),
    OrphanFailure(EventId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateId(id) => write!(f, "duplicate event id {id}"),
            Violation::DanglingCause { event, cause } => {
                write!(f, "event {event} cites unknown cause {cause}")
            }
            Violation::Cycle(id) => write!(f, "cycle through event {id}"),
            Violation::KindOrder { event, parent, from, to } => {
                write!(f, "kind-order violation {from}->{to} ({parent}->{event})")
            }
            Violation::TimeRegression { event, parent } => {
                write!(f, "time regression: {event} precedes its cause {parent}")
            }
            Violation::NegativeTime(id) => write!(f, "negative timestamp on {id}"),
            Violation::BenignParent { event, fault } => {
                write!(f, "benign fault {fault} is the cause of error {event}")
            }
            Violation::OrphanError(id) => write!(f, "orphan error {id}"),
            Violation::OrphanFailure(id) => write!(f, "orphan failure {id}"),
        }
    }
}

/// A set of events whose `cause` fields form the DAG.
#[derive(Debug, Clone, Default)]
pub struct CausalityChain {
    events: Vec<Event>,
}

impl CausalityChain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, event: Event) {
        self.events.push(event);
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

impl FromIterator<Event> for CausalityChain {
    fn from_iter<I: IntoIterator<Item = Event>>(iter: I) -> Self {
        Self {
            events: iter.into_iter().collect(),
        }
    }
}

fn edge_allowed(from: EventKind, to: EventKind) -> bool {
    matches!(
        (from, to),
        (EventKind::Fault, EventKind::Error)
            | (EventKind::Error, EventKind::Error)
            | (EventKind::Error, EventKind::Failure)
            | (EventKind::Failure, EventKind::Fault)
    )
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ChainVerdict {
    pub violations: Vec<Violation>,
}

impl ChainVerdict {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks structural validity: acyclic, resolvable causes, legal kind
/// transitions, no time regression, and ancestry of errors and failures.
pub fn validate_chain(chain: &CausalityChain) -> ChainVerdict {
    let mut violations = Vec::new();
    let mut by_id: HashMap<EventId, &Event> = HashMap::with_capacity(chain.len());
    for e in chain.events() {
        if by_id.insert(e.id, e).is_some() {
            violations.push(Violation::DuplicateId(e.id));
        }
        if !(e.time >= 0.0) {
            violations.push(Violation::NegativeTime(e.id));
        }
    }

    for e in chain.events() {
        let Some(cause) = e.cause else { continue };
        let Some(parent) = by_id.get(&cause) else {
            violations.push(Violation::DanglingCause { event: e.id, cause });
            continue;
        };
        if !edge_allowed(parent.kind(), e.kind()) {
            violations.push(Violation::KindOrder {
                event: e.id,
                parent: parent.id,
                from: parent.kind(),
                to: e.kind(),
            });
        }
        if parent.time > e.time {
            violations.push(Violation::TimeRegression {
                event: e.id,
                parent: parent.id,
            });
        }
        if let (Descriptor::Fault(fd), EventKind::Error) = (parent.descriptor, e.kind()) {
            if fd.activity == Activity::Benign {
                violations.push(Violation::BenignParent {
                    event: e.id,
                    fault: parent.id,
                });
            }
        }
    }

    // Each event has at most one parent, so ancestry is a walk up the cause
    // pointers. Memoize the set of kinds seen above each event.
    #[derive(Clone, Copy, Default)]
    struct Seen {
        fault: bool,
        error: bool,
    }
    let mut memo: BTreeMap<EventId, Option<Seen>> = BTreeMap::new();
    for e in chain.events() {
        let mut path = Vec::new();
        let mut on_path = BTreeSet::new();
        let mut cursor = e.cause;
        let mut base = Some(Seen::default());
        while let Some(id) = cursor {
            if let Some(known) = memo.get(&id) {
                base = *known;
                break;
            }
            if !on_path.insert(id) {
                violations.push(Violation::Cycle(id));
                base = None;
                break;
            }
            let Some(parent) = by_id.get(&id) else { break };
            path.push(parent);
            cursor = parent.cause;
        }
        // Unwind: path[last] is the highest ancestor reached.
        let mut acc = base;
        for parent in path.iter().rev() {
            acc = acc.map(|mut s| {
                match parent.kind() {
                    EventKind::Fault => s.fault = true,
                    EventKind::Error => s.error = true,
                    EventKind::Failure => {}
                }
                s
            });
            memo.insert(parent.id, acc);
        }
        let Some(seen) = acc else { continue };
        match e.kind() {
            EventKind::Error if !seen.fault => violations.push(Violation::OrphanError(e.id)),
            EventKind::Failure if !seen.error => violations.push(Violation::OrphanFailure(e.id)),
            _ => {}
        }
    }
    violations.dedup();
    ChainVerdict { violations }
}
