//! System- versus application-perspective MTTF/MTTR.
//!
//! Vendors count full-system outages; users count application aborts. An
//! application abort that leaves the system running adds to AMTTR only.

use std::collections::BTreeMap;

use serde::Serialize;

use super::MetricsError;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scope {
    System,
    Application(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkerKind {
    /// Service lost (outage or abort begins).
    Down,
    /// Service restored.
    Up,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Marker {
    pub time: f64,
    pub scope: Scope,
    pub kind: MarkerKind,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PerspectiveLog {
    /// End of the observation window, hours.
    pub horizon: f64,
    /// Applications observed; an application without markers ran failure-free.
    pub applications: Vec<String>,
    pub markers: Vec<Marker>,
}

/// A point estimate, or a lower bound when the window ended before the event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub censored: bool,
}

impl Estimate {
    fn exact(value: f64) -> Self {
        Self { value, censored: false }
    }

    fn lower_bound(value: f64) -> Self {
        Self { value, censored: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScopeMetrics {
    pub mttf: Estimate,
    pub mttr: Estimate,
    pub failures: usize,
    pub uptime: f64,
    pub downtime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerspectiveMetrics {
    pub system: ScopeMetrics,
    pub applications: BTreeMap<String, ScopeMetrics>,
}

impl PerspectiveMetrics {
    pub fn smttf(&self) -> Estimate {
        self.system.mttf
    }

    pub fn smttr(&self) -> Estimate {
        self.system.mttr
    }

    pub fn amttf(&self, app: &str) -> Option<Estimate> {
        self.applications.get(app).map(|m| m.mttf)
    }

    pub fn amttr(&self, app: &str) -> Option<Estimate> {
        self.applications.get(app).map(|m| m.mttr)
    }
}

fn scope_metrics<'a>(horizon: f64, markers: impl Iterator<Item = &'a Marker>) -> ScopeMetrics {
    let mut markers: Vec<&Marker> = markers.collect();
    markers.sort_by(|a, b| a.time.total_cmp(&b.time));
    let mut up = true;
    let mut last = 0.0;
    let mut uptime = 0.0;
    let mut closed_downtime = 0.0;
    let mut failures = 0;
    let mut repairs = 0;
    for m in markers {
        match (up, m.kind) {
            (true, MarkerKind::Down) => {
                uptime += m.time - last;
                failures += 1;
                up = false;
                last = m.time;
            }
            (false, MarkerKind::Up) => {
                closed_downtime += m.time - last;
                repairs += 1;
                up = true;
                last = m.time;
            }
            // Repeated markers for a state already entered carry no information.
            _ => {}
        }
    }
    let open = (horizon - last).max(0.0);
    if up {
        uptime += open;
    }
    let mttf = if failures == 0 {
        Estimate::lower_bound(uptime)
    } else {
        Estimate::exact(uptime / failures as f64)
    };
    let mttr = if failures == 0 {
        Estimate::exact(0.0)
    } else if repairs == 0 {
        Estimate::lower_bound(open)
    } else {
        Estimate::exact(closed_downtime / repairs as f64)
    };
    ScopeMetrics {
        mttf,
        mttr,
        failures,
        uptime,
        downtime: closed_downtime + if up { 0.0 } else { open },
    }
}

pub fn perspective_metrics(log: &PerspectiveLog) -> Result<PerspectiveMetrics, MetricsError> {
    if !(log.horizon > 0.0) {
        return Err(MetricsError::EmptyLog);
    }
    let system = scope_metrics(log.horizon, log.markers.iter().filter(|m| m.scope == Scope::System));
    let mut names: Vec<&String> = log.applications.iter().collect();
    for m in &log.markers {
        if let Scope::Application(a) = &m.scope {
            names.push(a);
        }
    }
    let applications = names
        .into_iter()
        .map(|app| {
            let metrics = scope_metrics(
                log.horizon,
                log.markers
                    .iter()
                    .filter(|m| matches!(&m.scope, Scope::Application(a) if a == app)),
            );
            (app.clone(), metrics)
        })
        .collect();
    Ok(PerspectiveMetrics { system, applications })
}
