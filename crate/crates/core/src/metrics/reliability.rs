use serde::Serialize;

use super::distribution::{mttf, reliability_at, LifetimeDistribution};
use super::MetricsError;

pub const FIT_HOURS: f64 = 1e9;

/// Expected failures in 10^9 hours of operation.
pub fn fit_rate(mttf_h: f64) -> Result<f64, MetricsError> {
    if mttf_h > 0.0 {
        Ok(FIT_HOURS / mttf_h)
    } else {
        Err(MetricsError::ZeroMttf)
    }
}

fn check_parts(parts: &[f64]) -> Result<(), MetricsError> {
    if parts.is_empty() {
        return Err(MetricsError::EmptyParts);
    }
    if let Some(p) = parts.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(MetricsError::OutOfRange(*p));
    }
    Ok(())
}

/// Dependent components: all must survive.
pub fn serial_reliability(parts: &[f64]) -> Result<f64, MetricsError> {
    check_parts(parts)?;
    Ok(parts.iter().product())
}

/// Redundant components: at least one must survive.
pub fn parallel_reliability(parts: &[f64]) -> Result<f64, MetricsError> {
    check_parts(parts)?;
    Ok(1.0 - parts.iter().map(|r| 1.0 - r).product::<f64>())
}

/// R^n for n identical serial components.
pub fn identical_serial_reliability(r: f64, n: u32) -> Result<f64, MetricsError> {
    if n == 0 {
        return Err(MetricsError::EmptyParts);
    }
    check_parts(&[r])?;
    // Repeated multiplication, so the result matches the general form bit for bit.
    Ok((1..n).fold(r, |acc, _| acc * r))
}

/// 1 - (1 - R)^n for n identical redundant components.
pub fn identical_parallel_reliability(r: f64, n: u32) -> Result<f64, MetricsError> {
    if n == 0 {
        return Err(MetricsError::EmptyParts);
    }
    check_parts(&[r])?;
    let q = 1.0 - r;
    Ok(1.0 - (1..n).fold(q, |acc, _| acc * q))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReliabilityReport {
    pub mttf: f64,
    pub fit: f64,
    pub reliability_curve: Vec<(f64, f64)>,
}

impl ReliabilityReport {
    /// Samples R(t) at `points` evenly spaced times over [0, horizon].
    pub fn for_distribution(dist: &LifetimeDistribution, horizon: f64, points: usize) -> Result<Self, MetricsError> {
        let mttf = mttf(dist)?;
        let fit = fit_rate(mttf)?;
        let steps = points.max(2) - 1;
        let reliability_curve = (0..=steps)
            .map(|i| {
                let t = horizon * i as f64 / steps as f64;
                reliability_at(dist, t).map(|r| (t, r))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            mttf,
            fit,
            reliability_curve,
        })
    }
}
