//! Reliability, availability and detection-quality metrics.

mod availability;
mod detection;
mod distribution;
mod perspective;
pub mod quadrature;
mod reliability;

use thiserror::Error;

pub use availability::{
    availability_from_mttf, availability_from_times, identical_parallel_availability,
    identical_serial_availability, mtbf, nines_rating, parallel_availability, render_duration,
    serial_availability, AvailabilityRecord, NinesRating, HOURS_PER_YEAR, SECONDS_PER_YEAR,
};
pub use detection::{precision, precision_complement, recall, recall_complement, DetectionTally};
pub use distribution::{
    hazard_rate_at, mttf, mttf_by_quadrature, reliability_at, unreliability_at, LifetimeDistribution,
    MTTF_REL_TOL, TRUNCATION_QUANTILE,
};
pub use perspective::{
    perspective_metrics, Estimate, Marker, MarkerKind, PerspectiveLog, PerspectiveMetrics, Scope,
    ScopeMetrics,
};
pub use reliability::{
    fit_rate, identical_parallel_reliability, identical_serial_reliability, parallel_reliability,
    serial_reliability, ReliabilityReport, FIT_HOURS,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("reliability is zero at t={0}; hazard rate undefined")]
    DegenerateReliability(f64),
    #[error("empirical distributions have no density")]
    NoDensity,
    #[error("mean-life integral did not converge")]
    DivergentIntegral,
    #[error("MTTF must be positive")]
    ZeroMttf,
    #[error("no parts to compose")]
    EmptyParts,
    #[error("probability {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("{0} undefined: zero denominator")]
    UndefinedMetric(&'static str),
    #[error("event log has no observation window")]
    EmptyLog,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
