use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Capability;

macro_rules! named {
    ($name:ident { $($variant:ident => $word:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
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
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($word => Ok($name::$variant),)+
                    other => Err(format!("unknown {} `{other}`", stringify!($name).to_lowercase())),
                }
            }
        }
    };
}

named!(Strategy {
    FaultTreatment => "fault_treatment",
    Recovery => "recovery",
    Compensation => "compensation",
});

named!(Architecture {
    FaultDiagnosis => "fault_diagnosis",
    Reconfiguration => "reconfiguration",
    CheckpointRecovery => "checkpoint_recovery",
    StateDiversity => "state_diversity",
    DesignDiversity => "design_diversity",
});

named!(Structure {
    Monitoring => "monitoring",
    Prediction => "prediction",
    Restructure => "restructure",
    Rejuvenation => "rejuvenation",
    Reinitialization => "reinitialization",
    Rollback => "rollback",
    Rollforward => "rollforward",
    Nmr => "nmr",
    NVersion => "nversion",
    RecoveryBlock => "recovery_block",
});

impl Architecture {
    pub fn strategy(self) -> Strategy {
        match self {
            Self::FaultDiagnosis => Strategy::FaultTreatment,
            Self::Reconfiguration | Self::CheckpointRecovery => Strategy::Recovery,
            Self::StateDiversity | Self::DesignDiversity => Strategy::Compensation,
        }
    }
}

impl Structure {
    pub fn architecture(self) -> Architecture {
        match self {
            Self::Monitoring | Self::Prediction => Architecture::FaultDiagnosis,
            Self::Restructure | Self::Rejuvenation | Self::Reinitialization => Architecture::Reconfiguration,
            Self::Rollback | Self::Rollforward => Architecture::CheckpointRecovery,
            Self::Nmr => Architecture::StateDiversity,
            Self::NVersion | Self::RecoveryBlock => Architecture::DesignDiversity,
        }
    }

    pub fn strategy(self) -> Strategy {
        self.architecture().strategy()
    }
}

/// The three behavioral tiers of one structure pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PatternHierarchy {
    pub strategy: Strategy,
    pub architecture: Architecture,
    pub structure: Structure,
}

impl PatternHierarchy {
    pub fn of(structure: Structure) -> Self {
        Self {
            strategy: structure.strategy(),
            architecture: structure.architecture(),
            structure,
        }
    }

    /// Checks declared ancestors against the fixed parent map.
    pub fn check(
        structure: Structure,
        strategy: Option<Strategy>,
        architecture: Option<Architecture>,
    ) -> Result<Self, String> {
        let h = Self::of(structure);
        if let Some(a) = architecture {
            if a != h.architecture {
                return Err(format!("{structure} belongs to {}, not {a}", h.architecture));
            }
        }
        if let Some(s) = strategy {
            if s != h.strategy {
                return Err(format!("{structure} belongs to {}, not {s}", h.strategy));
            }
        }
        Ok(h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: &'static str,
    pub doc: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub hierarchy: PatternHierarchy,
    /// Capabilities with default parameters.
    pub capabilities: BTreeSet<Capability>,
    pub notes: Vec<&'static str>,
    pub params: Vec<ParamSpec>,
}

const fn p(name: &'static str, default: &'static str, doc: &'static str) -> ParamSpec {
    ParamSpec { name, default, doc }
}

const CHECKPOINT_PARAMS: [ParamSpec; 4] = [
    p("interval_h", "required", "hours between checkpoints"),
    p("write_cost_h", "0", "fixed hours to write one checkpoint"),
    p("write_cost_per_unit_h", "0", "additional write hours per state unit"),
    p("restore_cost_h", "0", "hours to restore from a checkpoint"),
];

fn entry_params(s: Structure) -> Vec<ParamSpec> {
    match s {
        Structure::Monitoring => vec![
            p("interval_h", "required", "heartbeat or sampling interval"),
            p("latency_h", "interval_h", "hours from failure to detection"),
            p("miss_rate", "0", "probability a real failure goes unnoticed"),
            p("false_alarm_rate", "0", "spurious indications per hour"),
        ],
        Structure::Prediction => vec![
            p("threshold", "required", "sensor value that precedes a fault"),
            p("window", "5", "samples in the trend window (>= 2)"),
            p("sample_interval_h", "1", "hours between sensor samples"),
            p("margin_h", "1", "lead time of a prediction"),
        ],
        Structure::Restructure => vec![
            p("mode", "migrate", "migrate | exclude | relay"),
            p("cost_h", "0", "reconfiguration hours"),
            p("readmit", "true", "re-admit the component after repair"),
        ],
        Structure::Rejuvenation => vec![
            p("identify_h", "0", "hours to isolate the affected substate"),
            p("restore_h", "0", "hours to restore it"),
        ],
        Structure::Reinitialization => vec![p("reboot_h", "0", "hours to reboot the scope")],
        Structure::Rollback => CHECKPOINT_PARAMS.to_vec(),
        Structure::Rollforward => {
            let mut v = CHECKPOINT_PARAMS.to_vec();
            v.push(p("rederive_cost_h", "0", "hours to replay the journal"));
            v.push(p("journal", "true", "whether a journal covers the last interval"));
            v
        }
        Structure::Nmr => vec![
            p("replicas", "3", "replica count N; tolerating f fail-stop losses needs 2N+1 (N = f)"),
            p("scheme", "vote", "vote | secded | checksum"),
            p("mode", "hot", "hot | warm | cold"),
            p("warm_start_h", "0", "failover latency of a warm replica"),
            p("cold_start_h", "0", "failover latency of a cold replica"),
            p("tolerance", "0", "absolute difference treated as agreement"),
            p("recovery_cost_h", "0", "hours to reconstruct corrupted state"),
            p("failure_probability", "0", "chance that reconstruction fails"),
        ],
        Structure::NVersion => vec![
            p("variants", "3", "independently designed versions"),
            p("latencies_h", "[]", "per-variant latency; spread adds sync overhead"),
            p("correlation", "0", "chance that variants share a design fault"),
            p("tolerance", "0", "absolute difference treated as agreement"),
        ],
        Structure::RecoveryBlock => vec![
            p("variants", "2", "primary plus alternates"),
            p("pass_probability", "0.9", "chance a variant passes the acceptance test"),
            p("execution_cost_h", "0", "hours per variant execution"),
        ],
    }
}

fn entry_notes(s: Structure) -> Vec<&'static str> {
    match s {
        Structure::Rollback => vec!["requires external detection"],
        Structure::Rollforward => vec!["requires external detection", "needs a journal or external information"],
        Structure::Rejuvenation => vec!["requires external detection", "refuses persistent events"],
        Structure::Reinitialization => vec!["requires external detection", "discards all progress of its scope"],
        Structure::Restructure => vec![
            "requires external detection or prediction",
            "mode=relay only contains (forwards detected errors to the application)",
        ],
        Structure::Nmr => vec![
            "N=2 compares only (detection); odd N votes (detection, containment, mitigation)",
            "tolerating N fail-stop replicas needs 2N+1 replicas",
            "even N > 2 falls back to comparison",
        ],
        Structure::NVersion => vec!["timing differences between variants add synchronization overhead"],
        Structure::RecoveryBlock => vec!["variants run one at a time until one passes the acceptance test"],
        Structure::Monitoring => vec!["detects only; pair with a recovery pattern"],
        Structure::Prediction => vec!["detects ahead of time; pair with a reconfiguration pattern"],
    }
}

/// The full catalog: 3 strategies, 5 architectures, 10 structures.
pub fn catalog() -> Vec<CatalogEntry> {
    Structure::ALL
        .iter()
        .map(|&s| CatalogEntry {
            hierarchy: PatternHierarchy::of(s),
            capabilities: super::default_capabilities(s),
            notes: entry_notes(s),
            params: entry_params(s),
        })
        .collect()
}
