//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if
//! any criterion fails.

mod common;

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use resilsim::config::ConfigDoc;
use resilsim::engine::{
    observe_composed_reliability, observe_detection, observe_system_reliability, run, substream, RecordKind,
    SimConfig, Trace,
};
use resilsim::metrics::{
    fit_rate, identical_parallel_reliability, identical_serial_reliability, nines_rating, parallel_reliability,
    precision, recall, serial_reliability, LifetimeDistribution,
};
use resilsim::model::{Composition, RepairModel};
use resilsim::patterns::{
    nmr_execute, nmr_execute_with_losses, required_replicas, Capability, VoteVerdict,
};
use resilsim::scenarios::{builtin, scenario_cr, scenario_crosslayer};
use resilsim::taxonomy::{CommonTerm, ComponentId};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Observed success fraction within `k` standard errors of `expected`.
fn within_sigma(observed: f64, expected: f64, n: u64, k: f64) -> bool {
    let se = (expected * (1.0 - expected) / n as f64).sqrt();
    (observed - expected).abs() <= k * se.max(f64::EPSILON)
}

const TRIALS: u64 = 100_000;
const CHUNKS: u64 = 50;

/// Engine Monte Carlo split into independent seed ranges.
fn parallel_reliability_trials(composition: Composition, ps: &[f64], seed: u64) -> f64 {
    let per = TRIALS / CHUNKS;
    let ok: f64 = (0..CHUNKS)
        .into_par_iter()
        .map(|c| observe_composed_reliability(composition, ps, per, seed + c * per) * per as f64)
        .sum();
    ok / TRIALS as f64
}

// ------------------------------------------------------------------ 1

/// Rows as printed in the availability-by-nines table, in seconds.
const NINES_TABLE: [(f64, u32, &str, f64); 6] = [
    (0.9, 1, "36 days, 12 hours", 36.0 * 86400.0 + 12.0 * 3600.0),
    (0.99, 2, "87 hours, 36 minutes", 87.0 * 3600.0 + 36.0 * 60.0),
    (0.999, 3, "8 hours, 45.6 minutes", 8.0 * 3600.0 + 45.6 * 60.0),
    (0.9999, 4, "52 minutes, 33.6 seconds", 52.0 * 60.0 + 33.6),
    (0.99999, 5, "5 minutes, 15.4 seconds", 5.0 * 60.0 + 15.4),
    (0.999999, 6, "31.5 seconds", 31.5),
];

fn nines_table() -> Outcome {
    let mut bad = Vec::new();
    for (a, nines, text, seconds) in NINES_TABLE {
        let r = nines_rating(a).expect("valid availability");
        if r.nines != nines || (r.downtime_annual_s - seconds).abs() > 0.1 || r.rendered != text {
            bad.push(format!("{a}: {} nines, {} ({:.2} s)", r.nines, r.rendered, r.downtime_annual_s));
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { "6 rows".into() } else { bad.join("; ") })
}

// ------------------------------------------------------------------ 2

fn composition() -> Outcome {
    let cases: [(Composition, Vec<f64>); 4] = [
        (Composition::Serial, vec![0.1, 0.2]),
        (Composition::Serial, vec![0.05, 0.1, 0.15]),
        (Composition::Redundant, vec![0.3, 0.4]),
        (Composition::Redundant, vec![0.5, 0.4, 0.3]),
    ];
    let mut details = Vec::new();
    let mut pass = true;
    for (i, (comp, ps)) in cases.iter().enumerate() {
        let rs: Vec<f64> = ps.iter().map(|p| 1.0 - p).collect();
        let analytic = match comp {
            Composition::Serial => serial_reliability(&rs),
            Composition::Redundant => parallel_reliability(&rs),
        }
        .unwrap();
        let observed = parallel_reliability_trials(*comp, ps, 1_000_000 * (i as u64 + 1));
        let ok = within_sigma(observed, analytic, TRIALS, 3.0);
        pass &= ok;
        details.push(format!("{comp:?}{}: {observed:.4} vs {analytic:.4}", ps.len()));
    }
    for n in 1..=6 {
        for r in [0.0, 0.3, 0.75, 0.9, 0.999, 1.0] {
            let v = vec![r; n as usize];
            pass &= identical_serial_reliability(r, n).unwrap() == serial_reliability(&v).unwrap();
            pass &= identical_parallel_reliability(r, n).unwrap() == parallel_reliability(&v).unwrap();
        }
    }
    outcome(pass, details.join(", "))
}

// ------------------------------------------------------------------ 3

fn all_or_nothing() -> Outcome {
    let p = 0.1;
    let mut pass = true;
    let mut details = Vec::new();
    for n in [1u32, 2, 4, 8] {
        let per = TRIALS / CHUNKS;
        let ok: f64 = (0..CHUNKS)
            .into_par_iter()
            .map(|c| observe_system_reliability(n, p, per, 7_000_000 * n as u64 + c * per) * per as f64)
            .sum();
        let observed = ok / TRIALS as f64;
        let analytic = (1.0 - p).powi(n as i32);
        pass &= within_sigma(observed, analytic, TRIALS, 3.0);
        details.push(format!("N={n}: {observed:.4} vs {analytic:.4}"));
    }
    outcome(pass, details.join(", "))
}

// ------------------------------------------------------------------ 4

fn mttf_fit() -> Outcome {
    let dist = LifetimeDistribution::exponential(0.001).unwrap();
    let mut rng = substream(4, "acceptance/mttf");
    let n = 100_000;
    let mean = (0..n).map(|_| dist.sample(&mut rng)).sum::<f64>() / n as f64;
    let close = ((mean - 1000.0) / 1000.0).abs() <= 0.03;
    let fit = fit_rate(mean).unwrap();
    let product = ((fit * mean - 1e9) / 1e9).abs() <= 1e-9;
    outcome(close && product, format!("mttf {mean:.1} h, fit {fit:.1}"))
}

// ------------------------------------------------------------------ 5

fn tmr_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cases = 0;
    let mut masked = 0;
    for _ in 0..100 {
        let good: u64 = rng.random();
        for pos in 0..3 {
            let mut bad: u64 = rng.random();
            while bad == good {
                bad = rng.random();
            }
            let mut outputs = [good; 3];
            outputs[pos] = bad;
            let vote = nmr_execute(&outputs).unwrap();
            cases += 1;
            if vote.output == Some(good) && vote.verdict.term() == Some(CommonTerm::DCE) {
                masked += 1;
            }
        }
    }
    let mut dmr = 0;
    let mut dmr_due = 0;
    for a in 0u8..=255 {
        for b in 0u8..=255 {
            if a == b {
                continue;
            }
            let vote = nmr_execute(&[a, b]).unwrap();
            dmr += 1;
            if vote.output.is_none() && vote.verdict.term() == Some(CommonTerm::DUE) {
                dmr_due += 1;
            }
        }
    }
    let mut minimal = true;
    for f in 0..=3u32 {
        let need = required_replicas(f);
        minimal &= survives_all_losses(need, f);
        minimal &= (1..need).all(|n| !survives_all_losses(n, f));
    }
    outcome(
        masked == cases && dmr == dmr_due && minimal,
        format!("{masked}/{cases} masked, {dmr_due}/{dmr} DMR DUE, minimal replicas {minimal}"),
    )
}

/// Whether every pattern of exactly `f` fail-stop losses among `n` replicas
/// still yields the correct output.
fn survives_all_losses(n: u32, f: u32) -> bool {
    if f > n {
        return false;
    }
    (0u32..1 << n).filter(|m| m.count_ones() == f).all(|mask| {
        let outputs: Vec<Option<u32>> = (0..n).map(|i| (mask & (1 << i) == 0).then_some(42)).collect();
        let vote = nmr_execute_with_losses(&outputs);
        vote.output == Some(42) && vote.verdict != VoteVerdict::DetectedUncorrectable
    })
}

// ------------------------------------------------------------------ 6

fn restore_of(trace: &Trace) -> Option<(f64, f64)> {
    let r = trace.of_kind(RecordKind::Restore).next()?;
    Some((r.note_f64("restored_to")?, r.note_f64("lost_work_h")?))
}

fn rollback_golden() -> Outcome {
    let sc = scenario_cr();
    let cfg = sc.config().unwrap();
    let (trace, report) = run(&cfg);
    let rollforward = SimConfig::from_toml(&sc.config_toml().replace("\"rollback\"", "\"rollforward\"")).unwrap();
    let (fwd_trace, fwd_report) = run(&rollforward);
    let back = restore_of(&trace);
    let fwd = restore_of(&fwd_trace);
    let pass = back == Some((20.0, 5.0))
        && report.accounting.lost_work == 5.0
        && fwd.is_some_and(|(_, lost)| lost == 0.0)
        && fwd_report.accounting.lost_work == 0.0
        && fwd_report.accounting.progress >= report.accounting.progress;
    outcome(
        pass,
        format!(
            "rollback {back:?} progress {}, rollforward {fwd:?} progress {}",
            report.accounting.progress, fwd_report.accounting.progress
        ),
    )
}

// ------------------------------------------------------------------ 7

fn chain_fuzz() -> Outcome {
    let bad: Vec<String> = (0..10_000u64)
        .into_par_iter()
        .filter_map(|seed| {
            let cfg = SimConfig::from_toml(&common::random_config(seed)).expect("generator emits valid configs");
            let (trace, report) = run(&cfg);
            if report.chain.violations > 0 {
                return Some(format!("seed {seed}: {} violations", report.chain.violations));
            }
            let orphan = trace.of_kind(RecordKind::Failure).find_map(|f| {
                let kinds = common::ancestor_kinds(&trace, f.seq);
                (!(kinds.contains(&RecordKind::Fault) && kinds.contains(&RecordKind::Error)))
                    .then(|| format!("seed {seed}: failure {} lacks ancestors", f.seq))
            });
            orphan
        })
        .collect();
    outcome(bad.is_empty(), if bad.is_empty() { "10000 runs".into() } else { bad[..bad.len().min(3)].join("; ") })
}

// ------------------------------------------------------------------ 8

fn determinism() -> Outcome {
    let mut pass = true;
    for sc in builtin() {
        let cfg = sc.config().unwrap();
        let (t1, r1) = run(&cfg);
        let (t2, r2) = run(&cfg);
        pass &= t1.to_text() == t2.to_text() && r1.to_json() == r2.to_json() && format!("{r1}") == format!("{r2}");
    }
    outcome(pass, format!("{} scenarios", builtin().len()))
}

// ------------------------------------------------------------------ 9

fn completeness() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for sc in builtin() {
        let cfg = sc.config().unwrap();
        let detectors: Vec<&str> = cfg
            .solution
            .instances
            .iter()
            .filter(|i| i.capabilities().contains(&Capability::Detection))
            .map(|i| i.name.as_str())
            .collect();
        let mut doc: ConfigDoc = sc.doc();
        doc.solution.retain(|i| i.name.as_deref() != Some(sc.detection_instance));
        let reduced = SimConfig::from_doc(&doc).unwrap();
        let line = reduced.verdict.missing_line();
        let ok = cfg.verdict.complete
            && detectors == [sc.detection_instance]
            && !reduced.verdict.complete
            && line.as_deref() == Some("missing: detection");
        pass &= ok;
        details.push(format!("{}: {:?}", sc.name, line));
    }
    outcome(pass, details.join(", "))
}

// ------------------------------------------------------------------ 10

fn perspective() -> Outcome {
    let sc = scenario_crosslayer();
    let cfg = sc.config().unwrap();
    let app = cfg.model.component(&ComponentId::new("app")).unwrap();
    let RepairModel::Fixed(recovery) = app.repair else {
        return outcome(false, "application recovery is not fixed");
    };
    let (_, report) = run(&cfg);
    let pass = recovery > 0.0
        && report.smttr_h.value == 0.0
        && !report.smttr_h.censored
        && report.amttr_h.value == recovery
        && !report.amttr_h.censored
        && report.chain.due > 0;
    outcome(
        pass,
        format!("smttr {:?}, amttr {:?}, configured {recovery}", report.smttr_h, report.amttr_h),
    )
}

// ------------------------------------------------------------------ 11

fn precision_recall() -> Outcome {
    let mut rng = substream(11, "acceptance/detection");
    let tally = observe_detection(10_000, 0.2, 0.1, 1.0, &mut rng);
    let p = precision(&tally).unwrap();
    let r = recall(&tally).unwrap();
    let pass = within_sigma(p, 0.8, tally.indicated(), 3.0) && within_sigma(r, 0.9, tally.actual(), 3.0);
    outcome(pass, format!("precision {p:.4}, recall {r:.4} ({tally:?})"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 11] = [
        ("nines table", nines_table, Some(Duration::from_secs(1))),
        ("reliability composition", composition, Some(Duration::from_secs(10))),
        ("(1-p)^N", all_or_nothing, Some(Duration::from_secs(30))),
        ("MTTF/FIT", mttf_fit, None),
        ("TMR suite", tmr_suite, None),
        ("rollback accounting", rollback_golden, None),
        ("chain validity fuzz", chain_fuzz, None),
        ("determinism", determinism, None),
        ("completeness validator", completeness, None),
        ("perspective metrics", perspective, None),
        ("precision/recall", precision_recall, None),
    ];
    let mut failed = Vec::new();
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut o = check();
        let took = start.elapsed();
        if let Some(limit) = limit {
            if took > *limit {
                o.pass = false;
                o.detail.push_str(&format!(" [over {limit:?}]"));
            }
        }
        println!(
            "criterion {:>2} {:<24} {} ({:.2?}) {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            took,
            o.detail
        );
        if !o.pass {
            failed.push(*name);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
