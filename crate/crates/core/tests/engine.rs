use resilsim::engine::{dispatch_targets, inject, run, substream, ConfigError, RecordKind, SimConfig, Trace};
use resilsim::metrics::LifetimeDistribution;
use resilsim::model::{FaultSource, Interarrival};
use resilsim::taxonomy::ComponentId;

fn config(text: &str) -> SimConfig {
    SimConfig::from_toml(text).unwrap_or_else(|e| panic!("{e}\n{text}"))
}

fn source(text: &str) -> FaultSource {
    let cfg = config(&format!("[system]\nid = \"x\"\n\n[[system.fault_sources]]\n{text}\n"));
    cfg.model.root().fault_sources[0].clone()
}

#[test]
fn config_errors_name_their_paths() {
    let bad = "[sim]\nhorizon_h = 0.0\n\n[workload]\nrate = -1.0\ncomponent = \"ghost\"\n\n[system]\nid = \"x\"\n";
    let ConfigError::Schema(errs) = SimConfig::from_toml(bad).unwrap_err();
    let paths: Vec<&str> = errs.0.iter().map(|e| e.path.as_str()).collect();
    assert!(paths.contains(&"sim.horizon_h"), "{paths:?}");
    assert!(paths.contains(&"workload.rate"), "{paths:?}");
    assert!(paths.contains(&"workload.component"), "{paths:?}");
    assert!(SimConfig::from_toml("[system\n").is_err());
    assert!(SimConfig::from_toml("[system]\nid = \"x\"\nbogus = 1\n").is_err());
}

#[test]
fn exponential_arrivals_are_poisson() {
    let s = source("classes = \"active-transient-soft\"\ndist = \"exponential\"\nparams = { rate = 0.2 }");
    let n = 4000;
    let counts: Vec<usize> = (0..n).map(|i| inject(&s, &mut substream(i, "poisson"), 50.0).len()).collect();
    let mean = counts.iter().sum::<usize>() as f64 / n as f64;
    let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    // Poisson(10): mean and variance both 10.
    assert!((mean - 10.0).abs() < 3.0 * (10.0 / n as f64).sqrt(), "{mean}");
    assert!((var / 10.0 - 1.0).abs() < 0.1, "{var}");
}

#[test]
fn intermittent_sources_recur_at_a_fixed_interval() {
    let s = source(
        "classes = \"active-intermittent-hard\"\ndist = \"empirical\"\nparams = { samples = [2.0] }\nrecurrence_h = 3.0",
    );
    assert_eq!(inject(&s, &mut substream(0, "x"), 12.0), [2.0, 5.0, 8.0, 11.0]);
}

#[test]
fn zero_rate_sources_never_fire() {
    let s = source("classes = \"active-transient-soft\"\ndist = \"exponential\"\nparams = { rate = 0.0 }");
    assert_eq!(s.interarrival, Interarrival::Never);
    assert!(inject(&s, &mut substream(0, "x"), 1e9).is_empty());
}

#[test]
fn mean_time_to_first_failure_matches_the_rate() {
    let cfg = config(
        "[sim]\nhorizon_h = 100000.0\n\n[system]\nid = \"x\"\n\n[[system.fault_sources]]\nclasses = \"active-permanent-hard\"\ndist = \"exponential\"\nparams = { rate = 0.01 }\n",
    );
    let n = 2000;
    let mut total = 0.0;
    for seed in 0..n {
        let (trace, _) = run(&cfg.clone().with_seed(seed));
        total += trace.of_kind(RecordKind::Failure).next().unwrap().time;
    }
    let mean = total / n as f64;
    // Exponential: standard deviation equals the mean.
    assert!((mean - 100.0).abs() < 3.0 * 100.0 / (n as f64).sqrt(), "{mean}");
}

#[test]
fn simulated_lifetimes_follow_the_distribution() {
    let d = LifetimeDistribution::weibull(2.0, 50.0).unwrap();
    let expected = resilsim::metrics::mttf(&d).unwrap();
    let mut rng = substream(3, "weibull");
    let n = 20000;
    let mean = (0..n).map(|_| d.sample(&mut rng)).sum::<f64>() / n as f64;
    assert!((mean / expected - 1.0).abs() < 0.02, "{mean} vs {expected}");
}

const PIPELINE: &str = r#"
[sim]
horizon_h = 9.0

[system]
id = "rack"

[[system.children]]
id = "storage"
repair = { dist = "fixed", params = { hours = 2.0 } }

[[system.children.fault_sources]]
classes = "active-permanent-hard"
dist = "empirical"
params = { samples = [5.0] }
failure = "detected-permanent-complete"

[[system.children]]
id = "compute"

[[edges]]
provider = "storage"
consumer = "compute"
"#;

#[test]
fn provider_failure_cascades_to_consumer() {
    let (trace, report) = run(&config(PIPELINE));
    // The serial rack fails with its child, compute with its provider.
    let cascade: Vec<_> = trace
        .records
        .iter()
        .filter(|r| r.note.starts_with("cascade") && r.component.as_str() == "compute")
        .collect();
    assert_eq!(cascade.len(), 3);
    assert_eq!(
        cascade.iter().map(|r| r.kind).collect::<Vec<_>>(),
        [RecordKind::Fault, RecordKind::Error, RecordKind::Failure]
    );
    assert!(cascade.iter().all(|r| r.component.as_str() == "compute"));
    let origin = trace.of_kind(RecordKind::Failure).next().unwrap();
    assert_eq!(cascade[0].cause, Some(origin.seq));
    assert_eq!(report.chain.cascades, 2);
    assert_eq!(report.chain.violations, 0);
    // Storage is down 5..7, and with it the whole serial rack.
    assert!((report.t_ud - 2.0).abs() < 1e-9);
    assert!((report.t_pu + report.t_ud + report.t_sd - 9.0).abs() < 1e-9);
}

#[test]
fn redundant_providers_absorb_one_loss() {
    let text = PIPELINE.replace(
        "[[edges]]\nprovider = \"storage\"\nconsumer = \"compute\"\n",
        "[[system.children]]\nid = \"mirror\"\n\n[[edges]]\nprovider = \"storage\"\nconsumer = \"compute\"\nsemantics = \"redundant\"\n\n[[edges]]\nprovider = \"mirror\"\nconsumer = \"compute\"\nsemantics = \"redundant\"\n",
    );
    let (trace, _) = run(&config(&text));
    assert!(trace
        .records
        .iter()
        .all(|r| !(r.note.starts_with("cascade") && r.component.as_str() == "compute")));
}

#[test]
fn maintenance_is_scheduled_downtime() {
    let text = "[sim]\nhorizon_h = 10.0\n\n[system]\nid = \"x\"\nmaintenance = [{ start_h = 2.0, duration_h = 3.0 }]\n";
    let (_, report) = run(&config(text));
    assert!((report.t_sd - 3.0).abs() < 1e-9);
    assert_eq!(report.t_ud, 0.0);
    // Availability counts scheduled downtime in the denominator.
    assert!((report.availability.unwrap() - 0.7).abs() < 1e-12);
    assert!((report.accounting.idle - 3.0).abs() < 1e-9);
}

#[test]
fn false_alarms_are_counted() {
    let text = r#"
[sim]
horizon_h = 200.0

[system]
id = "x"

[[solution]]
structure = "monitoring"
name = "hb"
domain = { components = ["x"], aspects = ["dynamic"] }
params = { interval_h = 1.0, false_alarm_rate = 0.1 }
"#;
    let (_, report) = run(&config(text));
    // Poisson(20) false alarms, no real failures.
    assert!(report.detection.fp > 5 && report.detection.fp < 40, "{:?}", report.detection);
    assert_eq!(report.detection.tp, 0);
    assert_eq!(report.precision, Some(0.0));
    assert_eq!(report.recall, None);
}

#[test]
fn degraded_pools_lose_capacity() {
    let text = r#"
[sim]
horizon_h = 10.0

[workload]
rate = 2.0

[system]
id = "pool"
composition = "redundant"

[[system.children]]
id = "a"
repair = { dist = "fixed", params = { hours = 100.0 } }

[[system.children.fault_sources]]
classes = "active-permanent-hard"
dist = "empirical"
params = { samples = [4.0] }

[[system.children]]
id = "b"
"#;
    let (_, report) = run(&config(text));
    let a = &report.accounting;
    // Full rate for 4 h, half rate for 6 h.
    assert!((a.progress - (4.0 * 2.0 + 6.0 * 1.0)).abs() < 1e-9, "{a:?}");
    assert!((a.idle - 6.0).abs() < 1e-9);
    assert_eq!(report.t_ud, 0.0);
}

#[test]
fn dispatch_follows_declaration_order_and_scope() {
    let cfg = config(
        r#"
[system]
id = "node"

[[system.children]]
id = "mem"
state = { persistent = 1.0 }

[[system.children]]
id = "cpu"

[[solution]]
structure = "nmr"
name = "ecc"
domain = { components = ["mem"], aspects = ["persistent"] }
params = { scheme = "secded" }

[[solution]]
structure = "monitoring"
name = "hb"
domain = { components = ["node"], aspects = ["dynamic"] }
params = { interval_h = 1.0 }
activation = { kinds = ["error"] }
"#,
    );
    let mem = ComponentId::new("mem");
    let cpu = ComponentId::new("cpu");
    let err = "undetected-unmasked-soft-uncorrected";
    assert_eq!(dispatch_targets(RecordKind::Error, err, &mem, &cfg.solution, &cfg.model), [0, 1]);
    assert_eq!(dispatch_targets(RecordKind::Error, err, &cpu, &cfg.solution, &cfg.model), [1]);
    assert!(dispatch_targets(RecordKind::Failure, err, &mem, &cfg.solution, &cfg.model).is_empty());
}

#[test]
fn stored_traces_parse_back() {
    let (trace, _) = run(&config(PIPELINE));
    let text = trace.to_text();
    assert_eq!(Trace::parse(&text).unwrap(), trace);
    let broken: String = text.lines().take(3).chain(["t=1 seq=99 kind=fault"]).collect::<Vec<_>>().join("\n");
    assert_eq!(Trace::parse(&broken).unwrap_err().line, 4);
}
