use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::instance::{PatternParams, ResilienceSolution};
use super::Capability;
use crate::engine::RecordKind;
use crate::model::{Interarrival, StateAspect, SystemModel};
use crate::taxonomy::Activity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Capability,
    FaultModel,
    ProtectionDomain,
    Interfaces,
    Implementation,
}

impl Axis {
    pub const ALL: [Axis; 5] = [
        Axis::Capability,
        Axis::FaultModel,
        Axis::ProtectionDomain,
        Axis::Interfaces,
        Axis::Implementation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::Capability => "capability",
            Axis::FaultModel => "fault model",
            Axis::ProtectionDomain => "protection domain",
            Axis::Interfaces => "interfaces",
            Axis::Implementation => "implementation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisReport {
    pub axis: Axis,
    pub pass: bool,
    pub findings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    /// Detection, containment and mitigation are all present and every
    /// instance sits where the hierarchy puts it.
    pub complete: bool,
    pub capabilities: BTreeSet<Capability>,
    pub missing: BTreeSet<Capability>,
    pub axes: Vec<AxisReport>,
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn axis(&self, axis: Axis) -> &AxisReport {
        self.axes.iter().find(|a| a.axis == axis).expect("all axes reported")
    }

    /// `missing: detection, mitigation`, or `None` when nothing is missing.
    pub fn missing_line(&self) -> Option<String> {
        if self.missing.is_empty() {
            return None;
        }
        let names: Vec<&str> = self.missing.iter().map(|c| c.as_str()).collect();
        Some(format!("missing: {}", names.join(", ")))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "solution: {}", if self.complete { "complete" } else { "incomplete" })?;
        for a in &self.axes {
            writeln!(f, "  {:<18} {}", a.axis.as_str(), if a.pass { "pass" } else { "gap" })?;
            for finding in &a.findings {
                writeln!(f, "    - {finding}")?;
            }
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

fn report(axis: Axis, findings: Vec<String>) -> AxisReport {
    AxisReport {
        axis,
        pass: findings.is_empty(),
        findings,
    }
}

/// Checks a solution against the five design-space axes.
pub fn validate_solution(solution: &ResilienceSolution, model: &SystemModel) -> Verdict {
    let capabilities = solution.capabilities();
    let missing: BTreeSet<Capability> = Capability::ALL
        .iter()
        .copied()
        .filter(|c| !capabilities.contains(c))
        .collect();
    let scopes: Vec<BTreeSet<_>> = solution.instances.iter().map(|i| i.scope(model)).collect();
    let mut notes = Vec::new();

    let capability = report(
        Axis::Capability,
        if missing.is_empty() {
            vec![]
        } else {
            let names: Vec<&str> = missing.iter().map(|c| c.as_str()).collect();
            vec![format!("missing: {}", names.join(", "))]
        },
    );

    let mut fault_model = Vec::new();
    for id in model.ids() {
        let c = model.component(id).expect("listed ids exist");
        for s in &c.fault_sources {
            if s.descriptor.activity == Activity::Benign || s.interarrival == Interarrival::Never {
                continue;
            }
            if !scopes.iter().any(|scope| scope.contains(id)) {
                fault_model.push(format!("{id}: {} has no activating pattern", s.descriptor));
            }
        }
    }

    let mut domain = Vec::new();
    for id in model.ids() {
        let c = model.component(id).expect("listed ids exist");
        for (aspect, units) in &c.state_profile {
            if *aspect == StateAspect::Stateless || *units == 0.0 {
                continue;
            }
            let covered = solution.instances.iter().zip(&scopes).any(|(inst, scope)| {
                !inst.domain.is_stateless() && inst.domain.aspects.contains(aspect) && scope.contains(id)
            });
            if !covered {
                domain.push(format!("{id}: {} state ({units} units) outside every domain", aspect_name(*aspect)));
            }
        }
    }
    for inst in &solution.instances {
        if inst.domain.is_stateless() {
            notes.push(format!("{}: stateless by design", inst.name));
        }
    }

    let mut interfaces = Vec::new();
    for (i, inst) in solution.instances.iter().enumerate() {
        let needs = |kind: RecordKind| inst.activation.kinds.contains(&kind);
        if inst.params.needs_external_detection() {
            let provider = solution.instances.iter().enumerate().find(|(j, other)| {
                *j != i && other.capabilities().contains(&Capability::Detection) && !scopes[*j].is_disjoint(&scopes[i])
            });
            match provider {
                Some((_, p)) => notes.push(format!(
                    "{}: requires external detection, provided by {}",
                    inst.name, p.name
                )),
                None => interfaces.push(format!("{}: requires external detection", inst.name)),
            }
        }
        if needs(RecordKind::Respond) {
            let relay = solution.instances.iter().enumerate().any(|(j, other)| {
                j != i
                    && matches!(&other.params, PatternParams::Restructure(p) if p.mode == super::RestructureMode::Relay)
                    && !scopes[j].is_disjoint(&scopes[i])
            });
            if !relay {
                interfaces.push(format!("{}: activates on relayed errors but no relay covers its domain", inst.name));
            }
        }
        if needs(RecordKind::Predict) && !needs(RecordKind::Detect) {
            let predictor = solution.instances.iter().any(|o| matches!(o.params, PatternParams::Prediction(_)));
            if !predictor {
                interfaces.push(format!("{}: activates on predictions but no predictor exists", inst.name));
            }
        }
    }

    let mut implementation = Vec::new();
    for inst in &solution.instances {
        if let Err(e) = inst.hierarchy_consistent() {
            implementation.push(format!("{}: {e}", inst.name));
        }
        if let Some(set) = inst.params.replica_set() {
            if set.count > 2 && set.count % 2 == 0 {
                notes.push(format!(
                    "{}: {} replicas cannot vote; comparison only",
                    inst.name, set.count
                ));
            }
        }
    }

    let axes = vec![
        capability,
        report(Axis::FaultModel, fault_model),
        report(Axis::ProtectionDomain, domain),
        report(Axis::Interfaces, interfaces),
        report(Axis::Implementation, implementation),
    ];
    let complete = axes[0].pass && axes[4].pass;
    Verdict {
        complete,
        capabilities,
        missing,
        axes,
        notes,
    }
}

fn aspect_name(a: StateAspect) -> &'static str {
    match a {
        StateAspect::Persistent => "persistent",
        StateAspect::Dynamic => "dynamic",
        StateAspect::Environment => "environment",
        StateAspect::Stateless => "stateless",
    }
}
