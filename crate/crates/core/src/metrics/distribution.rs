//! Lifetime distributions: reliability R(t), density, hazard rate and mean life.

use rand::Rng;
use rand_distr::{Distribution, Exp, Weibull};
use serde::{Deserialize, Serialize};

use super::quadrature;
use super::MetricsError;

/// Time-to-event law. Rates and scales are per hour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "lowercase")]
pub enum LifetimeDistribution {
    Exponential { rate: f64 },
    Weibull { shape: f64, scale: f64 },
    /// Sorted, non-negative observed lifetimes.
    Empirical { samples: Vec<f64> },
}

impl LifetimeDistribution {
    pub fn exponential(rate: f64) -> Result<Self, MetricsError> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(MetricsError::InvalidParameter(format!("exponential rate must be > 0, got {rate}")));
        }
        Ok(Self::Exponential { rate })
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self, MetricsError> {
        if !(shape > 0.0 && shape.is_finite() && scale > 0.0 && scale.is_finite()) {
            return Err(MetricsError::InvalidParameter(format!(
                "weibull shape and scale must be > 0, got k={shape} scale={scale}"
            )));
        }
        Ok(Self::Weibull { shape, scale })
    }

    pub fn empirical(mut samples: Vec<f64>) -> Result<Self, MetricsError> {
        if samples.is_empty() {
            return Err(MetricsError::InvalidParameter("empirical distribution needs samples".into()));
        }
        if samples.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(MetricsError::InvalidParameter("empirical samples must be finite and >= 0".into()));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self::Empirical { samples })
    }

    /// Re-checks the invariants; used after deserialization.
    pub fn validated(self) -> Result<Self, MetricsError> {
        match self {
            Self::Exponential { rate } => Self::exponential(rate),
            Self::Weibull { shape, scale } => Self::weibull(shape, scale),
            Self::Empirical { samples } => Self::empirical(samples),
        }
    }

    /// Draws one lifetime.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Exponential { rate } => Exp::new(*rate).expect("validated rate").sample(rng),
            Self::Weibull { shape, scale } => Weibull::new(*scale, *shape).expect("validated weibull").sample(rng),
            Self::Empirical { samples } => samples[rng.random_range(0..samples.len())],
        }
    }

    fn survival(&self, t: f64) -> f64 {
        match self {
            Self::Exponential { rate } => (-rate * t).exp(),
            Self::Weibull { shape, scale } => (-(t / scale).powf(*shape)).exp(),
            Self::Empirical { samples } => {
                let survivors = samples.len() - samples.partition_point(|s| *s <= t);
                survivors as f64 / samples.len() as f64
            }
        }
    }

    /// Probability density f(t); `None` for the empirical distribution.
    pub fn density(&self, t: f64) -> Option<f64> {
        match self {
            Self::Exponential { rate } => Some(rate * (-rate * t).exp()),
            Self::Weibull { shape, scale } => {
                let z = t / scale;
                Some(shape / scale * z.powf(shape - 1.0) * (-z.powf(*shape)).exp())
            }
            Self::Empirical { .. } => None,
        }
    }

    /// Time by which a fraction `p` of units have failed.
    pub fn quantile(&self, p: f64) -> f64 {
        match self {
            Self::Exponential { rate } => -(1.0 - p).ln() / rate,
            Self::Weibull { shape, scale } => scale * (-(1.0 - p).ln()).powf(1.0 / shape),
            Self::Empirical { samples } => {
                let idx = ((p * samples.len() as f64).ceil() as usize).clamp(1, samples.len());
                samples[idx - 1]
            }
        }
    }
}

fn check_time(t: f64) -> Result<(), MetricsError> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(MetricsError::NegativeTime(t))
    }
}

/// R(t): probability of no error or failure during [0, t].
pub fn reliability_at(dist: &LifetimeDistribution, t: f64) -> Result<f64, MetricsError> {
    check_time(t)?;
    Ok(dist.survival(t))
}

/// F(t) = 1 - R(t).
pub fn unreliability_at(dist: &LifetimeDistribution, t: f64) -> Result<f64, MetricsError> {
    Ok(1.0 - reliability_at(dist, t)?)
}

/// Hazard rate f(t)/R(t), per hour.
pub fn hazard_rate_at(dist: &LifetimeDistribution, t: f64) -> Result<f64, MetricsError> {
    check_time(t)?;
    match dist {
        LifetimeDistribution::Exponential { rate } => Ok(*rate),
        LifetimeDistribution::Weibull { shape, scale } => {
            if dist.survival(t) == 0.0 {
                return Err(MetricsError::DegenerateReliability(t));
            }
            // f/R simplifies to k t^(k-1) / scale^k.
            Ok(shape / scale * (t / scale).powf(shape - 1.0))
        }
        LifetimeDistribution::Empirical { .. } => {
            if dist.survival(t) == 0.0 {
                Err(MetricsError::DegenerateReliability(t))
            } else {
                Err(MetricsError::NoDensity)
            }
        }
    }
}

/// Relative tolerance for the numeric mean-life integral.
pub const MTTF_REL_TOL: f64 = 1e-6;
/// The integral of R(t) is truncated at this quantile.
pub const TRUNCATION_QUANTILE: f64 = 1.0 - 1e-10;

/// Expected time to failure (or to error; the formula is the same).
pub fn mttf(dist: &LifetimeDistribution) -> Result<f64, MetricsError> {
    Ok(match dist {
        LifetimeDistribution::Exponential { rate } => 1.0 / rate,
        LifetimeDistribution::Weibull { shape, scale } => scale * libm::tgamma(1.0 + 1.0 / shape),
        LifetimeDistribution::Empirical { samples } => samples.iter().sum::<f64>() / samples.len() as f64,
    })
}

/// Mean life by integrating R(t) from 0 to the truncation quantile.
pub fn mttf_by_quadrature(dist: &LifetimeDistribution) -> Result<f64, MetricsError> {
    let upper = dist.quantile(TRUNCATION_QUANTILE);
    if !upper.is_finite() {
        return Err(MetricsError::DivergentIntegral);
    }
    if let LifetimeDistribution::Empirical { samples } = dist {
        // R is a step function; integrate it piecewise exactly.
        let n = samples.len() as f64;
        let mut prev = 0.0;
        let mut total = 0.0;
        for (i, s) in samples.iter().enumerate() {
            total += (s - prev) * (samples.len() - i) as f64 / n;
            prev = *s;
        }
        return Ok(total);
    }
    // Split at the scale so the shape near the origin gets its own intervals.
    let knee = match dist {
        LifetimeDistribution::Weibull { scale, .. } => scale.min(upper),
        _ => upper * 0.5,
    };
    let mut total = 0.0;
    for (a, b) in [(0.0, knee), (knee, upper)] {
        let q = quadrature::integrate(|t| dist.survival(t), a, b, MTTF_REL_TOL * 1e-2, 4000);
        if !q.converged {
            return Err(MetricsError::DivergentIntegral);
        }
        total += q.value;
    }
    Ok(total)
}
