//! Invariants checked over generated inputs.

mod common;

use proptest::prelude::*;
use resilsim::config::ConfigDoc;
use resilsim::engine::{run, RecordKind, SimConfig, SimReport, Trace};
use resilsim::metrics::{
    identical_parallel_reliability, identical_serial_reliability, parallel_availability, parallel_reliability,
    reliability_at, serial_availability, serial_reliability, unreliability_at, LifetimeDistribution,
};
use resilsim::scenarios::scenario_cr;

use common::{ancestor_kinds, random_config};

fn probabilities() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..=1.0, 1..8)
}

fn distribution() -> impl Strategy<Value = LifetimeDistribution> {
    prop_oneof![
        (1e-4f64..10.0).prop_map(|r| LifetimeDistribution::exponential(r).unwrap()),
        (0.3f64..5.0, 0.1f64..1000.0).prop_map(|(k, l)| LifetimeDistribution::weibull(k, l).unwrap()),
        prop::collection::vec(0.01f64..100.0, 1..20).prop_map(|s| LifetimeDistribution::empirical(s).unwrap()),
    ]
}

proptest! {
    #[test]
    fn serial_and_parallel_are_dual(ps in probabilities()) {
        let q: Vec<f64> = ps.iter().map(|p| 1.0 - p).collect();
        let serial = serial_reliability(&ps).unwrap();
        let parallel = parallel_reliability(&q).unwrap();
        prop_assert!((serial - (1.0 - parallel)).abs() < 1e-12);
        prop_assert_eq!(serial_availability(&ps).unwrap(), serial);
        prop_assert_eq!(parallel_availability(&ps).unwrap(), parallel_reliability(&ps).unwrap());
        prop_assert!(serial <= ps.iter().cloned().fold(1.0, f64::min) + 1e-15);
    }

    #[test]
    fn identical_shortcuts_match_the_general_forms(p in 0.0f64..=1.0, n in 1u32..12) {
        let parts = vec![p; n as usize];
        prop_assert_eq!(identical_serial_reliability(p, n).unwrap(), serial_reliability(&parts).unwrap());
        prop_assert_eq!(identical_parallel_reliability(p, n).unwrap(), parallel_reliability(&parts).unwrap());
    }

    #[test]
    fn reliability_and_unreliability_sum_to_one(d in distribution(), t in 0.0f64..500.0) {
        let r = reliability_at(&d, t).unwrap();
        let f = unreliability_at(&d, t).unwrap();
        prop_assert!((0.0..=1.0).contains(&r));
        prop_assert!((r + f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reliability_never_increases(d in distribution(), a in 0.0f64..500.0, b in 0.0f64..500.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(reliability_at(&d, hi).unwrap() <= reliability_at(&d, lo).unwrap() + 1e-15);
    }

    #[test]
    fn rollback_loses_no_more_than_no_pattern(failure in 20.5f64..39.5, interval in 0.5f64..20.0) {
        // Empirical lifetimes renew, so keep to one crash within 40 h.
        let text = scenario_cr()
            .config_toml()
            .replace("samples = [25.0]", &format!("samples = [{failure:?}]"))
            .replace("interval_h = 10.0", &format!("interval_h = {interval:?}"));
        let cfg = SimConfig::from_toml(&text).unwrap();
        let bare = cfg.clone().with_solution(Default::default());
        let (_, with) = run(&cfg);
        let (_, without) = run(&bare);
        prop_assert!(with.accounting.lost_work <= without.accounting.lost_work + 1e-9);
        prop_assert!(with.accounting.lost_work < interval + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_runs_keep_their_invariants(seed in any::<u64>()) {
        let text = random_config(seed);
        let cfg = SimConfig::from_toml(&text).unwrap();
        let (trace, report) = run(&cfg);

        // Every failure descends from a fault through an error.
        prop_assert_eq!(report.chain.violations, 0, "{}", text);
        for f in trace.of_kind(RecordKind::Failure) {
            let kinds = ancestor_kinds(&trace, f.seq);
            prop_assert!(kinds.contains(&RecordKind::Fault) && kinds.contains(&RecordKind::Error), "{}", f);
        }

        // Time and work bookkeeping close over the horizon.
        prop_assert!((report.t_pu + report.t_ud + report.t_sd - cfg.horizon).abs() < 1e-6);
        let expected = cfg.workload_rate * cfg.horizon;
        prop_assert!((report.accounting.total() - expected).abs() < 1e-6 * expected.max(1.0), "{:?}", report.accounting);

        // The stored trace alone reproduces the report.
        let parsed = Trace::parse(&trace.to_text()).unwrap();
        prop_assert_eq!(&parsed, &trace);
        prop_assert_eq!(SimReport::from_trace(&parsed), report.clone());

        // Same seed, same bytes.
        let (again, _) = run(&cfg);
        prop_assert_eq!(again.to_text(), trace.to_text());
    }

    #[test]
    fn configuration_documents_round_trip(seed in any::<u64>()) {
        let doc = ConfigDoc::from_toml(&random_config(seed)).unwrap();
        let again = ConfigDoc::from_toml(&doc.to_toml()).unwrap();
        prop_assert_eq!(doc, again);
    }
}
