use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taxonomy::{CausalityChain, ComponentId, Descriptor, Event, EventId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Fault,
    Error,
    Failure,
    Detect,
    Predict,
    Respond,
    Checkpoint,
    Restore,
    Status,
}

impl RecordKind {
    pub const ALL: [RecordKind; 9] = [
        Self::Fault,
        Self::Error,
        Self::Failure,
        Self::Detect,
        Self::Predict,
        Self::Respond,
        Self::Checkpoint,
        Self::Restore,
        Self::Status,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Fault => "fault",
            Self::Error => "error",
            Self::Failure => "failure",
            Self::Detect => "detect",
            Self::Predict => "predict",
            Self::Respond => "respond",
            Self::Checkpoint => "checkpoint",
            Self::Restore => "restore",
            Self::Status => "status",
        }
    }

    /// Fault, error and failure records are vertices of the causality DAG.
    pub fn is_chain(self) -> bool {
        matches!(self, Self::Fault | Self::Error | Self::Failure)
    }
}

impl fmt::Display for RecordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RecordKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown record kind `{s}`"))
    }
}

/// One trace line.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub time: f64,
    pub seq: u64,
    pub kind: RecordKind,
    pub component: ComponentId,
    /// Class tuple, `<scope>-<status>` for status records, `-` when absent.
    pub class: String,
    pub cause: Option<u64>,
    pub note: String,
}

impl TraceRecord {
    /// Value of `key=value` inside the note.
    pub fn note_value(&self, key: &str) -> Option<&str> {
        self.note
            .split_whitespace()
            .find_map(|w| w.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
    }

    pub fn note_f64(&self, key: &str) -> Option<f64> {
        self.note_value(key).and_then(|v| v.parse().ok())
    }
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t={} seq={} kind={} comp={} class={} cause=",
            self.time, self.seq, self.kind, self.component, self.class
        )?;
        match self.cause {
            Some(c) => write!(f, "{c}")?,
            None => f.write_str("-")?,
        }
        write!(f, " note={}", self.note)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("trace line {line}: {message}")]
pub struct TraceParseError {
    pub line: usize,
    pub message: String,
}

fn field<'a>(rest: &mut &'a str, key: &str) -> Result<&'a str, String> {
    let body = rest
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| format!("expected `{key}=`"))?;
    match body.find(' ') {
        Some(i) => {
            *rest = &body[i + 1..];
            Ok(&body[..i])
        }
        None => Err(format!("truncated after `{key}=`")),
    }
}

impl FromStr for TraceRecord {
    type Err = String;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let mut rest = line;
        let time: f64 = field(&mut rest, "t")?.parse().map_err(|_| "bad time".to_string())?;
        if !(time >= 0.0 && time.is_finite()) {
            return Err(format!("time {time} out of range"));
        }
        let seq = field(&mut rest, "seq")?.parse().map_err(|_| "bad seq".to_string())?;
        let kind = field(&mut rest, "kind")?.parse()?;
        let component = ComponentId::new(field(&mut rest, "comp")?);
        let class = field(&mut rest, "class")?.to_string();
        let cause = match field(&mut rest, "cause")? {
            "-" => None,
            c => Some(c.parse().map_err(|_| format!("bad cause `{c}`"))?),
        };
        let note = rest
            .strip_prefix("note=")
            .ok_or_else(|| "expected `note=`".to_string())?
            .to_string();
        Ok(Self {
            time,
            seq,
            kind,
            component,
            class,
            cause,
            note,
        })
    }
}

/// Ordered records of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn parse(text: &str) -> Result<Self, TraceParseError> {
        let mut records: Vec<TraceRecord> = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: String| TraceParseError { line: i + 1, message };
            let rec: TraceRecord = line.parse().map_err(err)?;
            if let Some(prev) = records.last() {
                if rec.time < prev.time {
                    return Err(err(format!("time {} precedes {}", rec.time, prev.time)));
                }
            }
            if let Some(c) = rec.cause {
                if !seen.contains(&c) {
                    return Err(err(format!("cause {c} does not refer to an earlier record")));
                }
            }
            seen.insert(rec.seq);
            records.push(rec);
        }
        Ok(Self { records })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }

    pub fn get(&self, seq: u64) -> Option<&TraceRecord> {
        self.records
            .binary_search_by_key(&seq, |r| r.seq)
            .ok()
            .map(|i| &self.records[i])
    }

    /// The fault-error-failure DAG realized by this trace.
    pub fn chain(&self) -> CausalityChain {
        self.records
            .iter()
            .filter(|r| r.kind.is_chain())
            .filter_map(|r| {
                let descriptor: Descriptor = r.class.parse().ok()?;
                Some(Event {
                    id: EventId(r.seq),
                    time: r.time,
                    component: r.component.clone(),
                    descriptor,
                    cause: r.cause.map(EventId),
                })
            })
            .collect()
    }

    pub fn of_kind(&self, kind: RecordKind) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter().filter(move |r| r.kind == kind)
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
