//! The event loop.
//!
//! Component health is tracked as an own state (up, maintenance, failed) plus
//! an effective status derived from providers and children. Application
//! progress is integrated between events in workload units.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::queue::SimEventQueue;
use super::rng::substream;
use super::trace::{RecordKind, Trace, TraceRecord};
use super::SimConfig;
use crate::model::{
    Composition, EdgeSemantics, FaultSource, Interarrival, OperationalStatus, RepairModel, SystemModel,
};
use crate::patterns::{
    checkpoint_create, nmr_execute, nversion_execute, prediction_forecast, recovery_block, rollback_recover,
    rollforward_recover, CheckpointCost, CheckpointStore, ForecastConfig, Journal, NmrScheme, PatternError,
    PatternParams, ResilienceSolution, RestructureMode, VoteVerdict,
};
use crate::taxonomy::{
    origin_of, Activity, ComponentId, Detection, ErrorDescriptor, FailureDescriptor,
    FaultDescriptor, Masking, Persistence, Severity,
};

use OperationalStatus::{ScheduledOutage as Scheduled, ServiceDelivery as Up, UnscheduledOutage as Down};

/// Arrival times of a source's faults in `[0, horizon)`. Renewal sources
/// draw each gap from the interarrival distribution; intermittent sources
/// draw the first arrival and then recur at their fixed interval.
pub fn inject<R: Rng + ?Sized>(source: &FaultSource, rng: &mut R, horizon: f64) -> Vec<f64> {
    let Interarrival::Lifetime(dist) = &source.interarrival else {
        return Vec::new();
    };
    let mut out = Vec::new();
    if let Some(r) = source.recurrence.filter(|r| *r > 0.0) {
        let mut t = dist.sample(rng);
        while t < horizon {
            out.push(t);
            t += r;
        }
        return out;
    }
    let mut t = 0.0;
    loop {
        let gap = dist.sample(rng);
        t += gap;
        if !(t < horizon) {
            break;
        }
        out.push(t);
        if !(gap > 0.0) {
            break;
        }
    }
    out
}

/// Instances that receive a record, in declaration order.
pub fn dispatch_targets(
    kind: RecordKind,
    class: &str,
    component: &ComponentId,
    solution: &ResilienceSolution,
    model: &SystemModel,
) -> Vec<usize> {
    solution
        .instances
        .iter()
        .enumerate()
        .filter(|(_, i)| i.activates_on(kind, class, component, model))
        .map(|(n, _)| n)
        .collect()
}

fn rank(s: OperationalStatus) -> u8 {
    match s {
        Up => 0,
        Scheduled => 1,
        Down => 2,
    }
}

fn worst(a: OperationalStatus, b: OperationalStatus) -> OperationalStatus {
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}

fn best(a: OperationalStatus, b: OperationalStatus) -> OperationalStatus {
    if rank(b) < rank(a) {
        b
    } else {
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Verdict {
    Own,
    Hit,
    Spurious,
}

impl Verdict {
    fn as_str(self) -> &'static str {
        match self {
            Verdict::Own => "self",
            Verdict::Hit => "tp",
            Verdict::Spurious => "fp",
        }
    }
}

enum Ev {
    Arrive { comp: ComponentId, src: usize },
    Activate { comp: ComponentId, src: usize, fault: u64 },
    Escalate { incident: usize },
    Predict { comp: ComponentId, fault: u64, inst: usize, crossing: f64 },
    Detect { comp: ComponentId, failure: Option<u64>, verdict: Verdict, inst: Option<usize> },
    FalseAlarm { inst: usize },
    RepairDone { comp: ComponentId, epoch: u64 },
    AppRestart { epoch: u64 },
    RestoreDone { cause: u64, note: String },
    Checkpoint { inst: usize, k: u64 },
    MaintStart { comp: ComponentId },
    MaintEnd { comp: ComponentId },
}

struct Failed {
    detected: bool,
    /// Nonzero once a repair is scheduled.
    epoch: u64,
}

struct Incident {
    comp: ComponentId,
    src: usize,
    error: u64,
    /// Application the error was relayed to.
    contained: Option<ComponentId>,
    cancelled: bool,
}

struct PendingRestore {
    inst: usize,
    failure_time: f64,
    cause: u64,
}

#[derive(Default)]
struct App {
    status: Option<OperationalStatus>,
    aborted: Option<u64>,
    /// The current outage included unscheduled time.
    unscheduled: bool,
    /// Rejuvenation repaired the state in place.
    preserve: bool,
    last: f64,
    factor: f64,
    overhead_until: f64,
    progress: f64,
    lost: f64,
    overhead: f64,
    idle: f64,
}

struct Sim<'a> {
    cfg: &'a SimConfig,
    seed: u64,
    model: SystemModel,
    queue: SimEventQueue<Ev>,
    records: Vec<TraceRecord>,
    now: f64,
    rngs: BTreeMap<String, ChaCha8Rng>,
    failed: BTreeMap<ComponentId, Failed>,
    maintenance: BTreeMap<ComponentId, u32>,
    eff: BTreeMap<ComponentId, OperationalStatus>,
    /// Components excluded by a restructure instance.
    restructured: BTreeMap<ComponentId, usize>,
    detected: BTreeSet<u64>,
    incidents: Vec<Incident>,
    stores: BTreeMap<usize, CheckpointStore>,
    pending: Option<PendingRestore>,
    app: App,
    misses: u64,
    epochs: u64,
    checkpoint_ids: u64,
}

/// Runs `cfg` with `seed` in place of its own.
pub(crate) fn simulate(cfg: &SimConfig, seed: u64) -> Trace {
    let mut sim = Sim {
        cfg,
        seed,
        model: cfg.model.clone(),
        queue: SimEventQueue::new(),
        records: Vec::new(),
        now: 0.0,
        rngs: BTreeMap::new(),
        failed: BTreeMap::new(),
        maintenance: BTreeMap::new(),
        eff: BTreeMap::new(),
        restructured: BTreeMap::new(),
        detected: BTreeSet::new(),
        incidents: Vec::new(),
        stores: BTreeMap::new(),
        pending: None,
        app: App {
            factor: 1.0,
            ..App::default()
        },
        misses: 0,
        epochs: 0,
        checkpoint_ids: 0,
    };
    sim.start();
    while let Some((t, ev)) = sim.queue.pop() {
        sim.advance(t);
        sim.now = t;
        sim.handle(ev);
    }
    sim.finish();
    Trace { records: sim.records }
}

fn fmt_status(scope: &str, s: OperationalStatus) -> String {
    format!("{scope}-{}", s.as_str())
}

impl<'a> Sim<'a> {
    // ------------------------------------------------------------ plumbing

    fn workload(&self) -> &'a ComponentId {
        &self.cfg.workload
    }

    fn rng(&mut self, key: String) -> &mut ChaCha8Rng {
        let seed = self.seed;
        self.rngs.entry(key).or_insert_with_key(|k| substream(seed, k))
    }

    fn emit(&mut self, kind: RecordKind, comp: &ComponentId, class: String, cause: Option<u64>, note: String) -> u64 {
        let seq = self.records.len() as u64;
        self.records.push(TraceRecord {
            time: self.now,
            seq,
            kind,
            component: comp.clone(),
            class,
            cause,
            note,
        });
        seq
    }

    fn record(&self, seq: u64) -> &TraceRecord {
        &self.records[seq as usize]
    }

    fn at(&mut self, t: f64, ev: Ev) {
        if t < self.cfg.horizon {
            self.queue.push(t, ev);
        }
    }

    fn repair_time(&mut self, comp: &ComponentId) -> f64 {
        let model = self.model.component(comp).map(|c| c.repair.clone()).unwrap_or_default();
        match model {
            RepairModel::Fixed(h) => h,
            RepairModel::Lifetime(d) => d.sample(self.rng(format!("repair/{comp}"))),
        }
    }

    fn add_overhead(&mut self, hours: f64) {
        if hours > 0.0 {
            self.app.overhead_until = self.app.overhead_until.max(self.now) + hours;
        }
    }

    fn advance(&mut self, to: f64) {
        let dt = to - self.app.last;
        if !(dt > 0.0) {
            return;
        }
        let r = self.cfg.workload_rate;
        if self.app.status == Some(Up) {
            let o = (self.app.overhead_until - self.app.last).clamp(0.0, dt);
            let rest = dt - o;
            self.app.overhead += r * o;
            self.app.progress += r * self.app.factor * rest;
            self.app.idle += r * (1.0 - self.app.factor) * rest;
        } else {
            self.app.idle += r * dt;
        }
        self.app.last = to;
    }

    // ------------------------------------------------------------ status

    fn own(&self, c: &ComponentId) -> OperationalStatus {
        if self.failed.contains_key(c) {
            Down
        } else if self.maintenance.get(c).copied().unwrap_or(0) > 0 {
            Scheduled
        } else {
            Up
        }
    }

    /// Whether `c`'s status can affect others.
    fn propagates(&self, c: &ComponentId) -> bool {
        !self.model.is_excluded(c) && self.model.is_operational(c)
    }

    /// Least fixed point of the dependency equations over up < scheduled < down.
    fn effective(&self) -> BTreeMap<ComponentId, OperationalStatus> {
        let ids = self.model.ids();
        let mut eff: BTreeMap<ComponentId, OperationalStatus> = ids.iter().map(|c| (c.clone(), self.own(c))).collect();
        loop {
            let mut changed = false;
            for c in ids {
                let mut s = self.own(c);
                let mut redundant: Option<OperationalStatus> = None;
                for e in self.model.providers_of(c) {
                    if !self.propagates(&e.provider) {
                        continue;
                    }
                    let p = eff[&e.provider];
                    match e.semantics {
                        EdgeSemantics::Serial => s = worst(s, p),
                        EdgeSemantics::Redundant => redundant = Some(redundant.map_or(p, |r| best(r, p))),
                    }
                }
                if let Some(r) = redundant {
                    s = worst(s, r);
                }
                let composition = self.model.component(c).map(|k| k.composition).unwrap_or_default();
                let kids = self.model.children(c).iter().filter(|k| {
                    *k != self.workload()
                        && self.propagates(k)
                        && !(self.model.component(k).is_some_and(|x| x.spare) && !self.model.is_engaged(k))
                });
                let folded = kids.map(|k| eff[k]).reduce(|a, b| match composition {
                    Composition::Serial => worst(a, b),
                    Composition::Redundant => best(a, b),
                });
                if let Some(k) = folded {
                    s = worst(s, k);
                }
                if rank(s) > rank(eff[c]) {
                    eff.insert(c.clone(), s);
                    changed = true;
                }
            }
            if !changed {
                return eff;
            }
        }
    }

    fn app_status(&self) -> OperationalStatus {
        if self.app.aborted.is_some() {
            Down
        } else {
            self.eff.get(self.workload()).copied().unwrap_or(Up)
        }
    }

    /// Recomputes effective statuses, emitting status records and cascade
    /// chains caused by `trigger`, then updates the application.
    fn refresh(&mut self, trigger: Option<u64>) {
        let next = self.effective();
        let ids: Vec<ComponentId> = self.model.ids().to_vec();
        let root = self.model.root().id.clone();
        for c in &ids {
            let s = next[c];
            if self.eff.get(c) == Some(&s) {
                continue;
            }
            self.eff.insert(c.clone(), s);
            let mut cause = trigger;
            if s == Down && self.own(c) != Down && !self.model.is_excluded(c) {
                if let Some(t) = trigger.filter(|t| self.record(*t).kind == RecordKind::Failure) {
                    cause = Some(self.cascade(c, t));
                }
            }
            if self.model.is_operational(c) {
                let _ = self.model.apply_status(c, s, self.now);
            }
            self.emit(RecordKind::Status, c, fmt_status("component", s), cause, String::new());
            if *c == root {
                self.emit(RecordKind::Status, c, fmt_status("system", s), cause, String::new());
            }
        }
        self.update_app(trigger);
    }

    /// Fault, error and failure induced in `c` by a provider's failure.
    fn cascade(&mut self, c: &ComponentId, trigger: u64) -> u64 {
        let from = self.record(trigger).component.clone();
        let trig: FailureDescriptor = self.record(trigger).class.parse().expect("engine writes valid classes");
        let fault = FaultDescriptor::new(Activity::Dormant, trig.persistence, origin_of(trig.persistence));
        let note = format!("cascade from={from}");
        let f = self.emit(RecordKind::Fault, c, fault.to_string(), Some(trigger), note.clone());
        let error = ErrorDescriptor::latent(fault.reproducibility);
        let e = self.emit(RecordKind::Error, c, error.to_string(), Some(f), note.clone());
        let failure = FailureDescriptor::new(trig.detection, trig.persistence, Severity::Complete);
        let seq = self.emit(RecordKind::Failure, c, failure.to_string(), Some(e), note);
        self.follow_up(c, seq, failure);
        seq
    }

    fn update_app(&mut self, cause: Option<u64>) {
        let s = self.app_status();
        let prev = self.app.status;
        if prev != Some(s) {
            let w = self.workload().clone();
            self.emit(RecordKind::Status, &w, fmt_status("application", s), cause, String::new());
            self.app.status = Some(s);
            if s == Down {
                self.app.unscheduled = true;
            }
            if s == Up && prev.is_some() {
                self.resume();
            }
        }
        self.app.factor = self
            .model
            .capacity_factor(self.workload(), |l| self.eff.get(l) == Some(&Up));
    }

    /// The application is back after an outage.
    fn resume(&mut self) {
        if !std::mem::take(&mut self.app.unscheduled) {
            return;
        }
        if let Some(p) = self.pending.take() {
            self.restore(p);
        } else if !std::mem::take(&mut self.app.preserve) {
            // No recovery pattern: start over.
            self.app.lost += self.app.progress;
            self.app.progress = 0.0;
            self.stores.values_mut().for_each(CheckpointStore::clear);
        }
        self.app.preserve = false;
    }

    fn restore(&mut self, p: PendingRestore) {
        let cfg = self.cfg;
        let inst = &cfg.solution.instances[p.inst];
        let store = self.stores.entry(p.inst).or_default();
        let recovery = match &inst.params {
            PatternParams::Rollforward(rf) => {
                let journal = rf.journal.then_some(Journal {
                    from: 0.0,
                    to: p.failure_time,
                });
                rollforward_recover(store, journal, p.failure_time, self.app.progress, rf.rederive_cost)
            }
            _ => rollback_recover(store, p.failure_time),
        };
        let restored = recovery.restored_progress.min(self.app.progress);
        store.truncate_after(recovery.restored_time);
        let lost_units = self.app.progress - restored;
        self.app.lost += lost_units;
        self.app.progress = restored;
        self.add_overhead(recovery.cost);
        let mut note = format!(
            "{} instance={} restored_to={} lost_work_h={}",
            inst.structure(),
            inst.name,
            recovery.restored_time,
            recovery.lost_work
        );
        if let Some(flag) = recovery.flag {
            note.push_str(&format!(" flag={flag:?}"));
        }
        let t = self.now + recovery.cost;
        self.at(
            t,
            Ev::RestoreDone { cause: p.cause, note },
        );
    }

    // ------------------------------------------------------------ setup

    fn start(&mut self) {
        let cfg = self.cfg;
        let root = self.model.root().id.clone();
        let ids: Vec<ComponentId> = self.model.ids().to_vec();
        for c in &ids {
            let comp = self.model.component(c).expect("indexed");
            match comp.status {
                Down => {
                    self.failed.insert(
                        c.clone(),
                        Failed {
                            detected: false,
                            epoch: 0,
                        },
                    );
                }
                Scheduled => {
                    self.maintenance.insert(c.clone(), 1);
                }
                Up => {}
            }
        }
        self.eff = self.effective();
        let header = format!(
            "begin horizon_h={} rate={} workload={}",
            cfg.horizon, cfg.workload_rate, cfg.workload
        );
        let root_status = self.eff[&root];
        self.emit(RecordKind::Status, &root, fmt_status("system", root_status), None, header);
        for c in &ids {
            let s = self.eff[c];
            self.emit(RecordKind::Status, c, fmt_status("component", s), None, "begin".into());
        }
        let s = self.app_status();
        self.app.status = Some(s);
        self.app.unscheduled = s == Down;
        self.app.factor = self.model.capacity_factor(self.workload(), |l| self.eff.get(l) == Some(&Up));
        self.emit(
            RecordKind::Status,
            &cfg.workload,
            fmt_status("application", s),
            None,
            "begin".into(),
        );

        for c in &ids {
            if !self.model.is_operational(c) {
                continue;
            }
            let comp = self.model.component(c).expect("indexed").clone();
            for (i, source) in comp.fault_sources.iter().enumerate() {
                let times = inject(source, self.rng(format!("fault/{c}#{i}")), cfg.horizon);
                for t in times {
                    self.at(t, Ev::Arrive { comp: c.clone(), src: i });
                }
            }
            for w in comp.maintenance {
                self.at(w.start, Ev::MaintStart { comp: c.clone() });
                self.at(w.start + w.duration, Ev::MaintEnd { comp: c.clone() });
            }
        }
        for (i, inst) in cfg.solution.instances.iter().enumerate() {
            match &inst.params {
                PatternParams::Rollback(cp) => self.at(cp.interval, Ev::Checkpoint { inst: i, k: 1 }),
                PatternParams::Rollforward(rf) => self.at(rf.checkpoint.interval, Ev::Checkpoint { inst: i, k: 1 }),
                PatternParams::Monitoring(m) if m.false_alarm_rate > 0.0 => {
                    let gap = self.alarm_gap(i, m.false_alarm_rate);
                    self.at(gap, Ev::FalseAlarm { inst: i });
                }
                _ => {}
            }
        }
    }

    fn alarm_gap(&mut self, inst: usize, rate: f64) -> f64 {
        let name = self.cfg.solution.instances[inst].name.clone();
        let u: f64 = self.rng(format!("alarm/{name}")).random();
        -(1.0 - u).ln() / rate
    }

    // ------------------------------------------------------------ events

    fn handle(&mut self, ev: Ev) {
        match ev {
            Ev::Arrive { comp, src } => self.arrive(comp, src),
            Ev::Activate { comp, src, fault } => self.activate(comp, src, fault),
            Ev::Escalate { incident } => self.escalate(incident),
            Ev::Predict {
                comp,
                fault,
                inst,
                crossing,
            } => self.predicted(comp, fault, inst, crossing),
            Ev::Detect {
                comp,
                failure,
                verdict,
                inst,
            } => self.detect(comp, failure, verdict, inst),
            Ev::FalseAlarm { inst } => self.false_alarm(inst),
            Ev::RepairDone { comp, epoch } => self.repaired(comp, epoch),
            Ev::AppRestart { epoch } => {
                if self.app.aborted == Some(epoch) {
                    self.app.aborted = None;
                    self.refresh(None);
                }
            }
            Ev::RestoreDone { cause, note } => {
                let w = self.workload().clone();
                self.emit(RecordKind::Restore, &w, "-".into(), Some(cause), note);
            }
            Ev::Checkpoint { inst, k } => self.checkpoint(inst, k),
            Ev::MaintStart { comp } => {
                *self.maintenance.entry(comp).or_insert(0) += 1;
                self.refresh(None);
            }
            Ev::MaintEnd { comp } => {
                if let Some(n) = self.maintenance.get_mut(&comp) {
                    *n = n.saturating_sub(1);
                }
                self.refresh(None);
            }
        }
    }

    fn arrive(&mut self, comp: ComponentId, src: usize) {
        let cfg = self.cfg;
        let source = self.model.component(&comp).expect("indexed").fault_sources[src].clone();
        let class = source.descriptor.to_string();
        let fault = self.emit(RecordKind::Fault, &comp, class.clone(), None, format!("source={src}"));
        if source.descriptor.activity == Activity::Benign {
            return;
        }
        let activation = self.now + source.activation_delay;
        for i in dispatch_targets(RecordKind::Fault, &class, &comp, &cfg.solution, &self.model) {
            let PatternParams::Prediction(p) = &cfg.solution.instances[i].params else {
                continue;
            };
            let Some(pre) = &source.precursor else { continue };
            let shows: f64 = self.rng(format!("precursor/{comp}#{src}")).random();
            if shows >= pre.probability || !(source.activation_delay > 0.0) {
                continue;
            }
            // Sensor readings ramp from baseline to critical until activation.
            let d = source.activation_delay;
            let forecast = ForecastConfig {
                threshold: p.threshold,
                window: p.window,
                margin: p.margin,
            };
            let mut history = Vec::new();
            let mut k = 0u64;
            loop {
                let dt = k as f64 * p.sample_interval;
                if dt >= d {
                    break;
                }
                history.push((self.now + dt, pre.baseline + (pre.critical - pre.baseline) * dt / d));
                if let Ok(Some(pred)) = prediction_forecast(&comp, &history, &forecast) {
                    self.at(
                        pred.issued_at,
                        Ev::Predict {
                            comp: comp.clone(),
                            fault,
                            inst: i,
                            crossing: pred.projected_crossing,
                        },
                    );
                    break;
                }
                k += 1;
            }
        }
        self.at(
            activation,
            Ev::Activate {
                comp: comp.clone(),
                src,
                fault,
            },
        );
    }

    fn activate(&mut self, comp: ComponentId, src: usize, fault: u64) {
        if self.failed.contains_key(&comp) {
            return;
        }
        let cfg = self.cfg;
        let source = self.model.component(&comp).expect("indexed").fault_sources[src].clone();
        let origin = origin_of(source.descriptor.persistence);
        let latent = ErrorDescriptor::latent(origin);
        let mut error = self.emit(RecordKind::Error, &comp, latent.to_string(), Some(fault), String::new());
        let mask: f64 = self.rng(format!("mask/{comp}#{src}")).random();
        if mask < source.mask_probability {
            let masked = ErrorDescriptor {
                masking: Masking::Masked,
                ..latent
            };
            self.emit(RecordKind::Error, &comp, masked.to_string(), Some(error), "masked".into());
            return;
        }
        let mut current = latent;
        let mut contained: Option<ComponentId> = None;
        for inst in &cfg.solution.instances {
            if !inst.activates_on(RecordKind::Error, &current.to_string(), &comp, &self.model) {
                continue;
            }
            let outcome = match &inst.params {
                PatternParams::Nmr(p) => match p.scheme {
                    NmrScheme::Secded => match source.multiplicity {
                        0 | 1 => Some(true),
                        2 => Some(false),
                        _ => None,
                    },
                    NmrScheme::Vote => {
                        self.add_overhead(p.failover_latency());
                        vote_outcome(p.replicas, source.multiplicity)
                    }
                    NmrScheme::Checksum => None,
                },
                PatternParams::NVersion(p) => {
                    let correlated: f64 = self.rng(format!("pattern/{}", inst.name)).random();
                    let wrong = if correlated < p.correlation {
                        p.variants
                    } else {
                        source.multiplicity.min(p.variants)
                    };
                    let variants: Vec<(bool, f64)> = (0..p.variants)
                        .map(|v| (v >= wrong, p.latencies.get(v as usize).copied().unwrap_or(0.0)))
                        .collect();
                    match nversion_execute(&variants) {
                        Ok(out) => {
                            self.add_overhead(out.sync_overhead);
                            classify(out.vote.verdict, out.vote.output)
                        }
                        Err(_) => None,
                    }
                }
                PatternParams::RecoveryBlock(p) => {
                    let rng = self.rng(format!("pattern/{}", inst.name));
                    let draws: Vec<bool> = (0..p.variants).map(|_| rng.random::<f64>() < p.pass_probability).collect();
                    let variants = draws.into_iter().map(|ok| (move || ok, p.execution_cost));
                    match recovery_block(variants, |ok| *ok) {
                        Ok(out) => {
                            self.add_overhead(out.cost);
                            Some(true)
                        }
                        Err(PatternError::AllVariantsRejected { cost, .. }) => {
                            self.add_overhead(cost);
                            Some(false)
                        }
                        Err(_) => None,
                    }
                }
                PatternParams::Restructure(p) if p.mode == RestructureMode::Relay => {
                    let target = p.target.clone().unwrap_or_else(|| self.workload().clone());
                    let relay = self.emit(
                        RecordKind::Respond,
                        &comp,
                        current.to_string(),
                        Some(error),
                        format!("instance={} relay target={target}", inst.name),
                    );
                    self.add_overhead(p.cost);
                    contained = Some(target);
                    if self.compensate(&comp, &current.to_string(), relay, error) {
                        return;
                    }
                    continue;
                }
                _ => None,
            };
            match outcome {
                Some(true) => {
                    let dce = ErrorDescriptor::corrected(origin);
                    self.emit(
                        RecordKind::Error,
                        &comp,
                        dce.to_string(),
                        Some(error),
                        format!("instance={} corrected", inst.name),
                    );
                    return;
                }
                Some(false) if current.detection == Detection::Undetected => {
                    current = ErrorDescriptor::detected_uncorrected(origin);
                    error = self.emit(
                        RecordKind::Error,
                        &comp,
                        current.to_string(),
                        Some(error),
                        format!("instance={} detected", inst.name),
                    );
                }
                _ => {}
            }
        }
        let incident = self.incidents.len();
        self.incidents.push(Incident {
            comp,
            src,
            error,
            contained,
            cancelled: false,
        });
        self.at(self.now + source.propagation_delay, Ev::Escalate { incident });
    }

    /// Respond-activated compensation after a relay. True when resolved.
    fn compensate(&mut self, comp: &ComponentId, class: &str, relay: u64, error: u64) -> bool {
        let cfg = self.cfg;
        for i in dispatch_targets(RecordKind::Respond, class, comp, &cfg.solution, &self.model) {
            let inst = &cfg.solution.instances[i];
            let PatternParams::Nmr(p) = &inst.params else { continue };
            if p.scheme != NmrScheme::Checksum {
                continue;
            }
            self.add_overhead(p.recovery_cost);
            let draw: f64 = self.rng(format!("pattern/{}", inst.name)).random();
            if draw < p.failure_probability {
                let w = self.workload().clone();
                let origin: ErrorDescriptor = self.record(error).class.parse().expect("valid class");
                let persistence = match origin.origin {
                    crate::taxonomy::Reproducibility::Hard => Persistence::Permanent,
                    crate::taxonomy::Reproducibility::Soft => Persistence::Transient,
                };
                let fd = FailureDescriptor::new(Detection::Detected, persistence, Severity::Complete);
                let seq = self.emit(
                    RecordKind::Failure,
                    &w,
                    fd.to_string(),
                    Some(error),
                    format!("instance={} compensation failed abort", inst.name),
                );
                self.abort(seq);
                return true;
            }
            self.emit(
                RecordKind::Respond,
                comp,
                class.to_string(),
                Some(relay),
                format!("instance={} corrected", inst.name),
            );
            return true;
        }
        false
    }

    fn escalate(&mut self, incident: usize) {
        let inc = &self.incidents[incident];
        if inc.cancelled || self.failed.contains_key(&inc.comp) {
            return;
        }
        let (comp, src, error, contained) = (inc.comp.clone(), inc.src, inc.error, inc.contained.clone());
        let source = self.model.component(&comp).expect("indexed").fault_sources[src].clone();
        let err: ErrorDescriptor = self.record(error).class.parse().expect("valid class");
        if let Some(target) = contained {
            let fd = FailureDescriptor::new(Detection::Detected, source.descriptor.persistence, Severity::Complete);
            let note = format!("contained from={comp} coverage gap");
            let seq = self.emit(RecordKind::Failure, &target, fd.to_string(), Some(error), note);
            if target == *self.workload() {
                self.abort(seq);
            } else {
                self.fail(&target, seq, fd);
            }
            return;
        }
        let mut fd = source.failure;
        if err.detection == Detection::Detected {
            fd.detection = Detection::Detected;
        }
        let note = if self.model.is_excluded(&comp) { "avoided" } else { "" };
        let seq = self.emit(RecordKind::Failure, &comp, fd.to_string(), Some(error), note.into());
        self.fail(&comp, seq, fd);
    }

    /// A component failure record has been written; apply its effects.
    fn fail(&mut self, comp: &ComponentId, seq: u64, fd: FailureDescriptor) {
        if fd.severity == Severity::Complete {
            self.failed.insert(
                comp.clone(),
                Failed {
                    detected: false,
                    epoch: 0,
                },
            );
            self.refresh(Some(seq));
        }
        self.follow_up(comp, seq, fd);
    }

    /// Self-detection and monitor scheduling for a failure record.
    fn follow_up(&mut self, comp: &ComponentId, seq: u64, fd: FailureDescriptor) {
        let cfg = self.cfg;
        if fd.detection == Detection::Detected {
            self.at(
                self.now,
                Ev::Detect {
                    comp: comp.clone(),
                    failure: Some(seq),
                    verdict: Verdict::Own,
                    inst: None,
                },
            );
        }
        for i in dispatch_targets(RecordKind::Failure, &fd.to_string(), comp, &cfg.solution, &self.model) {
            let inst = &cfg.solution.instances[i];
            let PatternParams::Monitoring(m) = &inst.params else { continue };
            let miss: f64 = self.rng(format!("monitor/{}", inst.name)).random();
            if miss < m.miss_rate {
                self.misses += 1;
                continue;
            }
            self.at(
                self.now + m.latency,
                Ev::Detect {
                    comp: comp.clone(),
                    failure: Some(seq),
                    verdict: Verdict::Hit,
                    inst: Some(i),
                },
            );
        }
    }

    /// The application dies while its components stay up.
    fn abort(&mut self, failure: u64) {
        if self.app.aborted.is_some() || self.app.status != Some(Up) {
            return;
        }
        self.epochs += 1;
        let epoch = self.epochs;
        self.app.aborted = Some(epoch);
        self.refresh(Some(failure));
        let w = self.workload().clone();
        let fd: FailureDescriptor = self.record(failure).class.parse().expect("valid class");
        self.follow_up(&w, failure, fd);
        let t = self.now + self.repair_time(&w);
        self.at(t, Ev::AppRestart { epoch });
    }

    fn detect(&mut self, comp: ComponentId, failure: Option<u64>, verdict: Verdict, inst: Option<usize>) {
        if let Some(f) = failure {
            if !self.detected.insert(f) {
                return;
            }
        }
        let class = failure.map(|f| self.record(f).class.clone()).unwrap_or_else(|| "-".into());
        let mut note = format!("verdict={}", verdict.as_str());
        if let Some(i) = inst {
            note.push_str(&format!(" instance={}", self.cfg.solution.instances[i].name));
        }
        let seq = self.emit(RecordKind::Detect, &comp, class, failure, note);
        self.respond(&comp, seq, failure);
    }

    fn false_alarm(&mut self, inst: usize) {
        let cfg = self.cfg;
        let i = &cfg.solution.instances[inst];
        let PatternParams::Monitoring(m) = &i.params else { return };
        let scope: Vec<ComponentId> = i.scope(&self.model).into_iter().collect();
        if !scope.is_empty() {
            let u: f64 = self.rng(format!("alarm/{}", i.name)).random();
            let pick = scope[((u * scope.len() as f64) as usize).min(scope.len() - 1)].clone();
            self.detect(pick, None, Verdict::Spurious, Some(inst));
        }
        let gap = self.alarm_gap(inst, m.false_alarm_rate);
        self.at(self.now + gap, Ev::FalseAlarm { inst });
    }

    /// Recovery response to a detection record `detect` on `comp`.
    fn respond(&mut self, comp: &ComponentId, detect: u64, failure: Option<u64>) {
        let cfg = self.cfg;
        let class = self.record(detect).class.clone();
        let failure_time = failure.map(|f| self.record(f).time).unwrap_or(self.now);
        let persistence = failure
            .and_then(|f| self.record(f).class.parse::<FailureDescriptor>().ok())
            .map(|d| d.persistence);
        let mut repair: Option<f64> = None;
        for i in dispatch_targets(RecordKind::Detect, &class, comp, &cfg.solution, &self.model) {
            let inst = &cfg.solution.instances[i];
            match &inst.params {
                PatternParams::Rollback(_) | PatternParams::Rollforward(_) => {
                    if self.pending.is_some() {
                        continue;
                    }
                    let seq = self.emit(
                        RecordKind::Respond,
                        comp,
                        "-".into(),
                        Some(detect),
                        format!("instance={} {} pending", inst.name, inst.structure()),
                    );
                    let p = PendingRestore {
                        inst: i,
                        failure_time,
                        cause: seq,
                    };
                    if self.app.status == Some(Up) {
                        self.restore(p);
                    } else {
                        self.pending = Some(p);
                    }
                }
                PatternParams::Rejuvenation { identify, restore } => {
                    if persistence == Some(Persistence::Permanent) {
                        self.emit(
                            RecordKind::Respond,
                            comp,
                            "-".into(),
                            Some(detect),
                            format!("instance={} refused permanent", inst.name),
                        );
                        continue;
                    }
                    self.emit(
                        RecordKind::Respond,
                        comp,
                        "-".into(),
                        Some(detect),
                        format!("instance={} rejuvenate", inst.name),
                    );
                    repair = Some(identify + restore);
                    self.app.preserve = true;
                }
                PatternParams::Reinitialization { reboot } => {
                    self.emit(
                        RecordKind::Respond,
                        comp,
                        "-".into(),
                        Some(detect),
                        format!("instance={} reinitialize", inst.name),
                    );
                    repair = Some(*reboot);
                    let scope = inst.scope(&self.model);
                    for inc in &mut self.incidents {
                        if scope.contains(&inc.comp) {
                            inc.cancelled = true;
                        }
                    }
                    if scope.contains(self.workload()) {
                        self.app.lost += self.app.progress;
                        self.app.progress = 0.0;
                        self.stores.values_mut().for_each(CheckpointStore::clear);
                    }
                }
                PatternParams::Restructure(p) if p.mode != RestructureMode::Relay => {
                    self.reconfigure(i, comp, detect);
                }
                _ => {}
            }
        }
        let epoch = match self.failed.get_mut(comp) {
            Some(f) if f.epoch == 0 => {
                f.detected = true;
                self.epochs += 1;
                f.epoch = self.epochs;
                Some(self.epochs)
            }
            _ => None,
        };
        if let Some(epoch) = epoch {
            let hours = match repair {
                Some(h) => h,
                None => self.repair_time(comp),
            };
            self.at(
                self.now + hours,
                Ev::RepairDone {
                    comp: comp.clone(),
                    epoch,
                },
            );
        }
    }

    /// Migrate-or-exclude for restructure instance `i`.
    fn reconfigure(&mut self, i: usize, comp: &ComponentId, cause: u64) {
        let cfg = self.cfg;
        let inst = &cfg.solution.instances[i];
        let PatternParams::Restructure(p) = &inst.params else { return };
        if comp == self.workload() || self.model.parent(comp).is_none() || self.model.is_excluded(comp) {
            return;
        }
        let mut note = format!("instance={}", inst.name);
        if p.mode == RestructureMode::Migrate {
            if let Some(to) = self.model.migration_target(comp) {
                if self.model.apply_rebind(comp, &to).is_ok() {
                    note.push_str(&format!(" migrate to={to}"));
                }
            }
        }
        match self.model.apply_exclude(comp) {
            Ok(factor) => {
                note.push_str(&format!(" exclude factor={factor}"));
                self.restructured.insert(comp.clone(), i);
                self.add_overhead(p.cost);
            }
            Err(e) => note.push_str(&format!(" refused {}", e.to_string().replace(' ', "_"))),
        }
        self.emit(RecordKind::Respond, comp, "-".into(), Some(cause), note);
        self.refresh(None);
    }

    fn predicted(&mut self, comp: ComponentId, fault: u64, inst: usize, crossing: f64) {
        let cfg = self.cfg;
        if self.failed.contains_key(&comp) {
            return;
        }
        let class = self.record(fault).class.clone();
        let note = format!(
            "instance={} lead_h={} crossing={}",
            cfg.solution.instances[inst].name,
            crossing - self.now,
            crossing
        );
        let seq = self.emit(RecordKind::Predict, &comp, class.clone(), Some(fault), note);
        for i in dispatch_targets(RecordKind::Predict, &class, &comp, &cfg.solution, &self.model) {
            if matches!(&cfg.solution.instances[i].params, PatternParams::Restructure(p) if p.mode != RestructureMode::Relay)
            {
                self.reconfigure(i, &comp, seq);
            }
        }
    }

    fn repaired(&mut self, comp: ComponentId, epoch: u64) {
        if !self.failed.get(&comp).is_some_and(|f| f.epoch == epoch) {
            return;
        }
        self.failed.remove(&comp);
        if let Some(i) = self.restructured.get(&comp).copied() {
            let inst = &self.cfg.solution.instances[i];
            if let PatternParams::Restructure(p) = &inst.params {
                if p.readmit {
                    self.restructured.remove(&comp);
                    if let Ok(factor) = self.model.apply_readmit(&comp) {
                        let note = format!("instance={} readmit factor={factor}", inst.name);
                        self.emit(RecordKind::Respond, &comp, "-".into(), None, note);
                    }
                }
            }
        }
        self.refresh(None);
    }

    fn checkpoint(&mut self, inst: usize, k: u64) {
        let cfg = self.cfg;
        let i = &cfg.solution.instances[inst];
        let cp = match &i.params {
            PatternParams::Rollback(cp) => cp,
            PatternParams::Rollforward(rf) => &rf.checkpoint,
            _ => return,
        };
        if self.app.status == Some(Up) {
            let units = self.model.coverage(&i.domain).covered_units;
            let cost = CheckpointCost {
                write_fixed: cp.write_cost,
                write_per_unit: cp.write_cost_per_unit,
                restore_fixed: cp.restore_cost,
                restore_per_unit: 0.0,
            };
            self.checkpoint_ids += 1;
            let snapshot = checkpoint_create(self.checkpoint_ids, &i.domain, self.app.progress, units, self.now, &cost);
            if self.stores.entry(inst).or_default().push(snapshot).is_ok() {
                let write = cost.write(units);
                let w = self.workload().clone();
                let note = format!("instance={} progress={} cost_h={}", i.name, self.app.progress, write);
                self.emit(RecordKind::Checkpoint, &w, "-".into(), None, note);
                self.add_overhead(write);
            }
        }
        self.at((k + 1) as f64 * cp.interval, Ev::Checkpoint { inst, k: k + 1 });
    }

    fn finish(&mut self) {
        self.advance(self.cfg.horizon);
        self.now = self.cfg.horizon;
        if self.app.status == Some(Down) {
            // Work that is neither running nor saved was not delivered.
            let saved = self
                .stores
                .values()
                .filter_map(|s| s.latest_at(self.now).map(|c| c.progress_units))
                .fold(0.0_f64, f64::max)
                .min(self.app.progress);
            self.app.lost += self.app.progress - saved;
            self.app.progress = saved;
        }
        let root = self.model.root().id.clone();
        let s = self.eff[&root];
        let a = &self.app;
        let note = format!(
            "end progress={} lost={} overhead={} idle={} fn={}",
            a.progress, a.lost, a.overhead, a.idle, self.misses
        );
        self.emit(RecordKind::Status, &root, fmt_status("system", s), None, note);
    }
}

/// Outcome of a vote with `wrong` corrupted replicas out of `n`:
/// `Some(true)` corrected, `Some(false)` detected, `None` unnoticed.
fn vote_outcome(n: u32, wrong: u32) -> Option<bool> {
    let outputs: Vec<bool> = (0..n).map(|v| v >= wrong).collect();
    match nmr_execute(&outputs) {
        Ok(vote) => classify(vote.verdict, vote.output),
        Err(_) => None,
    }
}

fn classify(verdict: VoteVerdict, output: Option<bool>) -> Option<bool> {
    match verdict {
        // A corrupt majority outvotes the correct minority silently.
        VoteVerdict::Corrected => (output == Some(true)).then_some(true),
        VoteVerdict::DetectedUncorrectable => Some(false),
        // Unanimous: either nothing was wrong or every replica was.
        VoteVerdict::Agreed => (output == Some(true)).then_some(true),
    }
}
