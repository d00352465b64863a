//! Monte Carlo experiments built on the engine and pattern functions.

use rand::Rng;

use super::{RecordKind, SimConfig};
use crate::metrics::DetectionTally;
use crate::model::{Composition, SystemModel};
use crate::patterns::{monitoring_check, Bounds, Observation, ResilienceSolution};
use crate::taxonomy::ComponentId;

fn composed_system(composition: Composition, probabilities: &[f64]) -> SystemModel {
    let children: Vec<String> = probabilities
        .iter()
        .enumerate()
        .map(|(i, p)| {
            // Exponential lifetime whose failure probability within one hour is p.
            let rate = -(1.0 - p.clamp(0.0, 1.0)).ln();
            let dist = if rate.is_finite() {
                format!(r#"dist = "exponential", params = {{ rate = {rate:?} }}"#)
            } else {
                r#"dist = "empirical", params = { samples = [0.0] }"#.to_string()
            };
            format!(r#"{{ id = "c{i}", fault_sources = [{{ classes = "active-permanent-hard", {dist} }}] }}"#)
        })
        .collect();
    let word = match composition {
        Composition::Serial => "serial",
        Composition::Redundant => "redundant",
    };
    let text = format!(
        "[system]\nid = \"system\"\ncomposition = \"{word}\"\nchildren = [{}]\n",
        children.join(", ")
    );
    SystemModel::from_toml(&text).expect("generated model is valid")
}

/// Fraction of one-hour runs in which a system of independent components,
/// component `i` failing within the hour with probability `probabilities[i]`,
/// never suffers an unscheduled outage. Trial `i` uses seed `seed + i`.
pub fn observe_composed_reliability(composition: Composition, probabilities: &[f64], trials: u64, seed: u64) -> f64 {
    if trials == 0 {
        return f64::NAN;
    }
    let model = composed_system(composition, probabilities);
    let base = SimConfig::new(model, ResilienceSolution::default(), 1.0, seed).expect("valid horizon");
    let root = base.model.root().id.clone();
    let mut ok = 0u64;
    for i in 0..trials {
        let trace = super::sim::simulate(&base, seed.wrapping_add(i));
        let failed = trace
            .of_kind(RecordKind::Status)
            .any(|r| r.component == root && r.class == "system-unscheduled_outage");
        if !failed {
            ok += 1;
        }
    }
    ok as f64 / trials as f64
}

/// Serial special case: `n` identical components.
pub fn observe_system_reliability(n: u32, p: f64, trials: u64, seed: u64) -> f64 {
    observe_composed_reliability(Composition::Serial, &vec![p; n as usize], trials, seed)
}

/// Heartbeat-monitor experiment over `events` real failures.
///
/// Each real failure stops the heartbeat; with probability `miss_rate` the
/// monitor keeps seeing fresh beats and stays silent. Every raised
/// indication is spurious with probability `false_positive_fraction`: a
/// healthy component whose beat arrived late. Indications come from
/// [`monitoring_check`] on the heartbeat age.
pub fn observe_detection<R: Rng + ?Sized>(
    events: u64,
    false_positive_fraction: f64,
    miss_rate: f64,
    interval: f64,
    rng: &mut R,
) -> DetectionTally {
    let bounds = Bounds::heartbeat(interval);
    let component = ComponentId::new("node");
    let observe = |age: f64| {
        let obs = Observation {
            component: component.clone(),
            parameter: "heartbeat_age_h".into(),
            value: age,
            time: 0.0,
        };
        monitoring_check(&obs, bounds).expect("heartbeat bounds are ordered")
    };
    let late = |rng: &mut R| bounds.hi * (1.0 + rng.random::<f64>());
    let fresh = |rng: &mut R| bounds.hi * rng.random::<f64>();
    let mut tally = DetectionTally::default();
    for _ in 0..events {
        if rng.random::<f64>() < miss_rate {
            match observe(fresh(rng)) {
                Some(_) => tally.tp += 1,
                None => tally.fn_ += 1,
            }
            continue;
        }
        // Spurious indications interleaved so that each indication in the
        // stream is spurious with the configured probability.
        while rng.random::<f64>() < false_positive_fraction {
            match observe(late(rng)) {
                Some(_) => tally.fp += 1,
                None => tally.tn += 1,
            }
        }
        match observe(late(rng)) {
            Some(_) => tally.tp += 1,
            None => tally.fn_ += 1,
        }
    }
    tally
}
