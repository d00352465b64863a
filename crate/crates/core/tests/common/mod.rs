//! Shared test helpers: a generator of random, valid configurations.

#![allow(dead_code)]

use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use resilsim::engine::{RecordKind, Trace};

const ACTIVITY: [&str; 3] = ["benign", "dormant", "active"];
const PERSISTENCE: [&str; 3] = ["permanent", "transient", "intermittent"];
const REPRO: [&str; 2] = ["hard", "soft"];
const DETECTION: [&str; 2] = ["detected", "undetected"];
const SEVERITY: [&str; 3] = ["complete", "partial", "byzantine"];
const ASPECTS: [&str; 3] = ["persistent", "dynamic", "environment"];

fn pick<'a, R: Rng>(rng: &mut R, xs: &'a [&'a str]) -> &'a str {
    xs.choose(rng).copied().unwrap()
}

fn fault_source<R: Rng>(rng: &mut R, out: &mut String, table: &str) {
    let persistence = pick(rng, &PERSISTENCE);
    let _ = writeln!(out, "\n[[{table}.fault_sources]]");
    let _ = writeln!(
        out,
        "classes = \"{}-{persistence}-{}\"",
        pick(rng, &ACTIVITY),
        pick(rng, &REPRO)
    );
    match rng.random_range(0..3) {
        0 => {
            let _ = writeln!(out, "dist = \"exponential\"\nparams = {{ rate = {:?} }}", rng.random_range(0.01..0.3));
        }
        1 => {
            let _ = writeln!(
                out,
                "dist = \"weibull\"\nparams = {{ shape = {:?}, scale = {:?} }}",
                rng.random_range(0.5..3.0),
                rng.random_range(5.0..60.0)
            );
        }
        _ => {
            let _ = writeln!(
                out,
                "dist = \"empirical\"\nparams = {{ samples = [{:?}, {:?}] }}",
                rng.random_range(0.0..30.0),
                rng.random_range(1.0..30.0)
            );
        }
    }
    if persistence == "intermittent" {
        let _ = writeln!(out, "recurrence_h = {:?}", rng.random_range(0.5..10.0));
    }
    if rng.random_bool(0.5) {
        let _ = writeln!(out, "activation_delay_h = {:?}", rng.random_range(0.0..4.0));
    }
    if rng.random_bool(0.3) {
        let _ = writeln!(out, "propagation_delay_h = {:?}", rng.random_range(0.0..2.0));
    }
    let _ = writeln!(
        out,
        "failure = \"{}-{}-{}\"",
        pick(rng, &DETECTION),
        pick(rng, &PERSISTENCE),
        pick(rng, &SEVERITY)
    );
    let _ = writeln!(out, "mask_probability = {:?}", rng.random_range(0.0..0.5));
    let _ = writeln!(out, "multiplicity = {}", rng.random_range(1..4));
    if rng.random_bool(0.3) {
        let _ = writeln!(
            out,
            "precursor = {{ baseline = 50.0, critical = 100.0, probability = {:?} }}",
            rng.random_range(0.0..1.0)
        );
    }
}

fn component<R: Rng>(rng: &mut R, out: &mut String, table: &str, id: &str, leaf: bool) {
    let _ = writeln!(out, "\n[[{table}]]\nid = \"{id}\"");
    if rng.random_bool(0.5) {
        let comp = if rng.random_bool(0.5) { "serial" } else { "redundant" };
        let _ = writeln!(out, "composition = \"{comp}\"");
    }
    if leaf && rng.random_bool(0.2) {
        let _ = writeln!(out, "spare = true");
    }
    let _ = writeln!(out, "utilization = {:?}", rng.random_range(0.0..1.0));
    if rng.random_bool(0.6) {
        let _ = writeln!(
            out,
            "state = {{ {} = {:?} }}",
            pick(rng, &ASPECTS),
            rng.random_range(1.0..32.0)
        );
    }
    if rng.random_bool(0.5) {
        let _ = writeln!(
            out,
            "repair = {{ dist = \"fixed\", params = {{ hours = {:?} }} }}",
            rng.random_range(0.1..5.0)
        );
    }
    if rng.random_bool(0.15) {
        let _ = writeln!(
            out,
            "maintenance = [{{ start_h = {:?}, duration_h = {:?} }}]",
            rng.random_range(0.0..40.0),
            rng.random_range(0.5..3.0)
        );
    }
    for _ in 0..rng.random_range(0..3) {
        fault_source(rng, out, table);
    }
}

fn instance<R: Rng>(rng: &mut R, out: &mut String, i: usize, ids: &[String]) {
    let structure = pick(
        rng,
        &[
            "monitoring",
            "prediction",
            "restructure",
            "rejuvenation",
            "reinitialization",
            "rollback",
            "rollforward",
            "nmr",
            "nversion",
            "recovery_block",
        ],
    );
    let target = ids.choose(rng).unwrap();
    let params = match structure {
        "monitoring" => format!(
            "interval_h = {:?}, miss_rate = {:?}, false_alarm_rate = {:?}",
            rng.random_range(0.1..2.0),
            rng.random_range(0.0..0.5),
            rng.random_range(0.0..0.2)
        ),
        "prediction" => format!(
            "threshold = {:?}, sample_interval_h = {:?}",
            rng.random_range(60.0..95.0),
            rng.random_range(0.1..1.0)
        ),
        "restructure" => {
            let mode = pick(rng, &["migrate", "exclude", "relay"]);
            format!("mode = \"{mode}\", cost_h = {:?}", rng.random_range(0.0..0.5))
        }
        "rejuvenation" => format!("identify_h = {:?}, restore_h = {:?}", rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)),
        "reinitialization" => format!("reboot_h = {:?}", rng.random_range(0.0..2.0)),
        "rollback" | "rollforward" => format!(
            "interval_h = {:?}, write_cost_h = {:?}, restore_cost_h = {:?}",
            rng.random_range(1.0..15.0),
            rng.random_range(0.0..0.3),
            rng.random_range(0.0..0.5)
        ),
        "nmr" => {
            let scheme = pick(rng, &["vote", "secded", "checksum"]);
            format!(
                "scheme = \"{scheme}\", replicas = {}, mode = \"{}\", failure_probability = {:?}",
                rng.random_range(2..6),
                pick(rng, &["hot", "warm", "cold"]),
                rng.random_range(0.0..0.5)
            )
        }
        "nversion" => format!("variants = {}, correlation = {:?}", rng.random_range(2..5), rng.random_range(0.0..0.5)),
        _ => format!("variants = {}, pass_probability = {:?}", rng.random_range(1..4), rng.random_range(0.1..1.0)),
    };
    let _ = writeln!(
        out,
        "\n[[solution]]\nstructure = \"{structure}\"\nname = \"p{i}\"\ndomain = {{ components = [\"{target}\"], aspects = [\"{}\"] }}\nparams = {{ {params} }}",
        pick(rng, &ASPECTS)
    );
}

/// A random configuration: a two-level tree with faults, service edges
/// between leaves (lower to higher index, so acyclic) and up to four
/// pattern instances.
pub fn random_config(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "[sim]\nhorizon_h = {:?}\nseed = {}\n\n[system]\nid = \"root\"",
        rng.random_range(10.0..60.0),
        rng.random::<u32>()
    );
    let mut ids = vec!["root".to_string()];
    let mut leaves = Vec::new();
    for a in 0..rng.random_range(1..4) {
        let id = format!("c{a}");
        let kids = rng.random_range(0..3);
        component(&mut rng, &mut out, "system.children", &id, kids == 0);
        ids.push(id.clone());
        if kids == 0 {
            leaves.push(id.clone());
        }
        for b in 0..kids {
            let kid = format!("c{a}_{b}");
            component(&mut rng, &mut out, "system.children.children", &kid, true);
            ids.push(kid.clone());
            leaves.push(kid);
        }
    }
    let workload = ids.choose(&mut rng).unwrap().clone();
    let _ = writeln!(out, "\n[workload]\nrate = {:?}\ncomponent = \"{workload}\"", rng.random_range(0.5..4.0));
    for i in 0..leaves.len() {
        for j in i + 1..leaves.len() {
            if rng.random_bool(0.25) {
                let sem = if rng.random_bool(0.5) { "serial" } else { "redundant" };
                let _ = writeln!(
                    out,
                    "\n[[edges]]\nprovider = \"{}\"\nconsumer = \"{}\"\nsemantics = \"{sem}\"",
                    leaves[i], leaves[j]
                );
            }
        }
    }
    for i in 0..rng.random_range(0..5) {
        instance(&mut rng, &mut out, i, &ids);
    }
    out
}

/// Kinds of all causal ancestors of a record.
pub fn ancestor_kinds(trace: &Trace, seq: u64) -> Vec<RecordKind> {
    let mut kinds = Vec::new();
    let mut cur = trace.get(seq).and_then(|r| r.cause);
    while let Some(c) = cur {
        let r = trace.get(c).expect("causes refer to earlier records");
        kinds.push(r.kind);
        cur = r.cause;
    }
    kinds
}
