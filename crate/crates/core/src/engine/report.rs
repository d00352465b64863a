//! Metrics recomputed from a trace. A run builds its report with the same
//! function, so recomputing from the stored trace reproduces it exactly.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::trace::{RecordKind, Trace, TraceRecord};
use crate::metrics::{
    availability_from_times, fit_rate, nines_rating, perspective_metrics, precision, recall, DetectionTally,
    Estimate, Marker, MarkerKind, PerspectiveLog, Scope,
};
use crate::model::OperationalStatus;
use crate::taxonomy::{validate_chain, Descriptor, Detection, FailureDescriptor, Severity};

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Accounting {
    /// Work delivered, in workload units.
    pub progress: f64,
    /// Work computed and then thrown away by recovery.
    pub lost_work: f64,
    /// Time spent on resilience (checkpoints, restores, reconfiguration),
    /// in workload units.
    pub overhead: f64,
    /// Capacity that could not be used (outages, degraded operation).
    pub idle: f64,
}

impl Accounting {
    pub fn total(&self) -> f64 {
        self.progress + self.lost_work + self.overhead + self.idle
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ChainStats {
    pub faults: u64,
    pub errors: u64,
    pub failures: u64,
    /// Errors absorbed by their consumer.
    pub masked: u64,
    /// Detected and corrected errors.
    pub dce: u64,
    /// Detected but uncorrected errors.
    pub due: u64,
    /// Undetected or byzantine failures: silently wrong output.
    pub sdc: u64,
    /// Failures caused by another component's failure.
    pub cascades: u64,
    /// Failures of components that had already been isolated.
    pub avoided: u64,
    pub predictions: u64,
    /// Contained errors that no mitigation covered.
    pub coverage_gaps: u64,
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub horizon_h: f64,
    pub workload: String,
    pub rate: f64,
    pub accounting: Accounting,
    /// System (root) status occupancy, hours.
    pub t_pu: f64,
    pub t_ud: f64,
    pub t_sd: f64,
    pub availability: Option<f64>,
    pub app_availability: Option<f64>,
    pub nines: Option<u32>,
    pub downtime_annual_s: Option<f64>,
    /// Component service hours per observed failure.
    pub mttf_h: Estimate,
    pub fit: Option<f64>,
    pub smttf_h: Estimate,
    pub smttr_h: Estimate,
    pub amttf_h: Estimate,
    pub amttr_h: Estimate,
    pub detection: DetectionTally,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub chain: ChainStats,
}

#[derive(Default)]
struct Occupancy {
    status: Option<OperationalStatus>,
    since: f64,
    t: [f64; 3],
}

impl Occupancy {
    fn idx(s: OperationalStatus) -> usize {
        match s {
            OperationalStatus::ServiceDelivery => 0,
            OperationalStatus::UnscheduledOutage => 1,
            OperationalStatus::ScheduledOutage => 2,
        }
    }

    fn set(&mut self, s: OperationalStatus, at: f64) {
        if let Some(prev) = self.status {
            self.t[Self::idx(prev)] += at - self.since;
        }
        self.status = Some(s);
        self.since = at;
    }

    fn close(&mut self, horizon: f64) -> [f64; 3] {
        let mut t = self.t;
        if let Some(s) = self.status {
            t[Self::idx(s)] += (horizon - self.since).max(0.0);
        }
        t
    }
}

fn split_status(class: &str) -> Option<(&str, OperationalStatus)> {
    let (scope, status) = class.split_once('-')?;
    Some((scope, status.parse().ok()?))
}

fn censored(value: f64) -> Estimate {
    Estimate { value, censored: true }
}

impl SimReport {
    pub fn from_trace(trace: &Trace) -> Self {
        let header = trace.records.first().filter(|r| r.note.starts_with("begin"));
        let last_time = trace.records.last().map(|r| r.time).unwrap_or(0.0);
        let horizon = header.and_then(|h| h.note_f64("horizon_h")).unwrap_or(last_time);
        let rate = header.and_then(|h| h.note_f64("rate")).unwrap_or(1.0);
        let workload = header
            .and_then(|h| h.note_value("workload"))
            .unwrap_or("")
            .to_string();

        let mut system = Occupancy::default();
        let mut app = Occupancy::default();
        let mut components: BTreeMap<&str, Occupancy> = BTreeMap::new();
        let mut markers = Vec::new();
        let mut detection = DetectionTally::default();
        let mut chain = ChainStats::default();
        let mut accounting = Accounting::default();

        for r in &trace.records {
            match r.kind {
                RecordKind::Status => {
                    if r.note.starts_with("end") {
                        accounting = Accounting {
                            progress: r.note_f64("progress").unwrap_or(0.0),
                            lost_work: r.note_f64("lost").unwrap_or(0.0),
                            overhead: r.note_f64("overhead").unwrap_or(0.0),
                            idle: r.note_f64("idle").unwrap_or(0.0),
                        };
                        detection.fn_ += r.note_value("fn").and_then(|v| v.parse().ok()).unwrap_or(0);
                        continue;
                    }
                    let Some((scope, status)) = split_status(&r.class) else { continue };
                    let marker_scope = match scope {
                        "system" => {
                            system.set(status, r.time);
                            Some(Scope::System)
                        }
                        "application" => {
                            app.set(status, r.time);
                            Some(Scope::Application(r.component.0.clone()))
                        }
                        "component" => {
                            components.entry(r.component.as_str()).or_default().set(status, r.time);
                            None
                        }
                        _ => None,
                    };
                    if let Some(scope) = marker_scope {
                        let kind = match status {
                            OperationalStatus::UnscheduledOutage => Some(MarkerKind::Down),
                            OperationalStatus::ServiceDelivery => Some(MarkerKind::Up),
                            OperationalStatus::ScheduledOutage => None,
                        };
                        if let Some(kind) = kind {
                            markers.push(Marker {
                                time: r.time,
                                scope,
                                kind,
                            });
                        }
                    }
                }
                RecordKind::Fault => chain.faults += 1,
                RecordKind::Error => {
                    chain.errors += 1;
                    if let Ok(Descriptor::Error(e)) = r.class.parse::<Descriptor>() {
                        let terms = crate::taxonomy::common_term(&Descriptor::Error(e));
                        use crate::taxonomy::CommonTerm as T;
                        if e.masking == crate::taxonomy::Masking::Masked && e.detection == Detection::Undetected {
                            chain.masked += 1;
                        }
                        if terms.contains(&T::DCE) {
                            chain.dce += 1;
                        }
                        if terms.contains(&T::DUE) {
                            chain.due += 1;
                        }
                    }
                }
                RecordKind::Failure => {
                    chain.failures += 1;
                    let cascade = r.note.contains("cascade");
                    if cascade {
                        chain.cascades += 1;
                    }
                    if r.note.contains("avoided") {
                        chain.avoided += 1;
                    }
                    if r.note.contains("gap") {
                        chain.coverage_gaps += 1;
                    }
                    if let Ok(f) = r.class.parse::<FailureDescriptor>() {
                        if !cascade && (f.detection == Detection::Undetected || f.severity == Severity::Byzantine) {
                            chain.sdc += 1;
                        }
                    }
                }
                RecordKind::Detect => match r.note_value("verdict") {
                    Some("tp") => detection.tp += 1,
                    Some("fp") => detection.fp += 1,
                    _ => {}
                },
                RecordKind::Predict => chain.predictions += 1,
                _ => {}
            }
        }
        chain.violations = validate_chain(&trace.chain()).violations.len() as u64;

        let [t_pu, t_ud, t_sd] = system.close(horizon);
        let availability = availability_from_times(t_pu, t_ud, t_sd).ok();
        let [a_pu, a_ud, a_sd] = app.close(horizon);
        let app_availability = availability_from_times(a_pu, a_ud, a_sd).ok();
        let rating = availability.and_then(|a| nines_rating(a).ok());

        let uptime = components.values_mut().map(|o| o.close(horizon)[0]).fold(0.0, |a, b| a + b);
        let mttf_h = if chain.failures == 0 {
            censored(uptime)
        } else {
            Estimate {
                value: uptime / chain.failures as f64,
                censored: false,
            }
        };
        let fit = (!mttf_h.censored).then(|| fit_rate(mttf_h.value).ok()).flatten();

        let log = PerspectiveLog {
            horizon,
            applications: if workload.is_empty() { vec![] } else { vec![workload.clone()] },
            markers,
        };
        let (smttf_h, smttr_h, amttf_h, amttr_h) = match perspective_metrics(&log) {
            Ok(p) => {
                let app = p.applications.get(&workload).copied();
                (
                    p.smttf(),
                    p.smttr(),
                    app.map(|a| a.mttf).unwrap_or(censored(horizon)),
                    app.map(|a| a.mttr).unwrap_or(Estimate {
                        value: 0.0,
                        censored: false,
                    }),
                )
            }
            Err(_) => (censored(0.0), censored(0.0), censored(0.0), censored(0.0)),
        };

        SimReport {
            horizon_h: horizon,
            workload,
            rate,
            accounting,
            t_pu,
            t_ud,
            t_sd,
            availability,
            app_availability,
            nines: rating.as_ref().map(|r| r.nines),
            downtime_annual_s: rating.as_ref().map(|r| r.downtime_annual_s),
            mttf_h,
            fit,
            smttf_h,
            smttr_h,
            amttf_h,
            amttr_h,
            precision: precision(&detection).ok(),
            recall: recall(&detection).ok(),
            detection,
            chain,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "undefined".into())
}

fn est(e: Estimate) -> String {
    if e.censored {
        format!(">= {:.4} h (censored)", e.value)
    } else {
        format!("{:.4} h", e.value)
    }
}

impl fmt::Display for SimReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = &self.accounting;
        writeln!(f, "horizon      {} h, workload `{}` at {}/h", self.horizon_h, self.workload, self.rate)?;
        writeln!(
            f,
            "work         progress {:.4}  lost {:.4}  overhead {:.4}  idle {:.4}",
            a.progress, a.lost_work, a.overhead, a.idle
        )?;
        writeln!(f, "availability system {}  application {}", opt(self.availability), opt(self.app_availability))?;
        if let (Some(n), Some(d)) = (self.nines, self.downtime_annual_s) {
            writeln!(f, "nines        {n} ({:.1} s/year)", d)?;
        }
        writeln!(f, "mttf         {}  fit {}", est(self.mttf_h), opt(self.fit))?;
        writeln!(f, "system       mttf {}  mttr {}", est(self.smttf_h), est(self.smttr_h))?;
        writeln!(f, "application  mttf {}  mttr {}", est(self.amttf_h), est(self.amttr_h))?;
        let d = &self.detection;
        writeln!(
            f,
            "detection    tp {} fp {} fn {}  precision {}  recall {}",
            d.tp,
            d.fp,
            d.fn_,
            opt(self.precision),
            opt(self.recall)
        )?;
        let c = &self.chain;
        write!(
            f,
            "chain        faults {} errors {} failures {} masked {} dce {} due {} sdc {} cascades {} avoided {} predictions {} gaps {} violations {}",
            c.faults, c.errors, c.failures, c.masked, c.dce, c.due, c.sdc, c.cascades, c.avoided, c.predictions, c.coverage_gaps, c.violations
        )
    }
}

/// Convenience for tests: the records of one kind on one component.
pub fn records_for<'a>(trace: &'a Trace, kind: RecordKind, comp: &'a str) -> impl Iterator<Item = &'a TraceRecord> {
    trace
        .records
        .iter()
        .filter(move |r| r.kind == kind && r.component.as_str() == comp)
}
