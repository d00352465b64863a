use std::fmt;

use serde::Serialize;

use super::MetricsError;

/// Calendar year used for annual downtime (365 days).
pub const HOURS_PER_YEAR: f64 = 365.0 * 24.0;
pub const SECONDS_PER_YEAR: f64 = HOURS_PER_YEAR * 3600.0;

/// A = t_pu / (t_pu + t_ud + t_sd).
pub fn availability_from_times(t_pu: f64, t_ud: f64, t_sd: f64) -> Result<f64, MetricsError> {
    for t in [t_pu, t_ud, t_sd] {
        if t < 0.0 {
            return Err(MetricsError::NegativeTime(t));
        }
    }
    let total = t_pu + t_ud + t_sd;
    if total > 0.0 {
        Ok(t_pu / total)
    } else {
        Err(MetricsError::ZeroDenominator)
    }
}

/// A = MTTF / (MTTF + MTTR) = MTTF / MTBF.
pub fn availability_from_mttf(mttf: f64, mttr: f64) -> Result<f64, MetricsError> {
    if mttf < 0.0 || mttr < 0.0 {
        return Err(MetricsError::NegativeTime(mttf.min(mttr)));
    }
    let mtbf = mtbf(mttf, mttr);
    if mtbf > 0.0 {
        Ok(mttf / mtbf)
    } else {
        Err(MetricsError::ZeroDenominator)
    }
}

pub fn mtbf(mttf: f64, mttr: f64) -> f64 {
    mttf + mttr
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

pub fn serial_availability(parts: &[f64]) -> Result<f64, MetricsError> {
    check_parts(parts)?;
    Ok(parts.iter().product())
}

pub fn parallel_availability(parts: &[f64]) -> Result<f64, MetricsError> {
    check_parts(parts)?;
    Ok(1.0 - parts.iter().map(|a| 1.0 - a).product::<f64>())
}

pub fn identical_serial_availability(a: f64, n: u32) -> Result<f64, MetricsError> {
    super::reliability::identical_serial_reliability(a, n)
}

pub fn identical_parallel_availability(a: f64, n: u32) -> Result<f64, MetricsError> {
    super::reliability::identical_parallel_reliability(a, n)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AvailabilityRecord {
    pub t_pu: f64,
    pub t_ud: f64,
    pub t_sd: f64,
    pub mttf: f64,
    pub mttr: f64,
    pub mtbf: f64,
    pub availability: f64,
}

impl AvailabilityRecord {
    /// Builds the record from status occupancy and the number of unscheduled
    /// outages. With no outages MTTF is the observed uptime and MTTR is zero.
    pub fn from_occupancy(t_pu: f64, t_ud: f64, t_sd: f64, outages: usize) -> Result<Self, MetricsError> {
        let availability = availability_from_times(t_pu, t_ud, t_sd)?;
        let (mttf, mttr) = if outages == 0 {
            (t_pu, 0.0)
        } else {
            (t_pu / outages as f64, t_ud / outages as f64)
        };
        Ok(Self {
            t_pu,
            t_ud,
            t_sd,
            mttf,
            mttr,
            mtbf: mtbf(mttf, mttr),
            availability,
        })
    }
}

/// Availability rating: count of leading nines and the yearly downtime it allows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NinesRating {
    pub nines: u32,
    pub downtime_annual_s: f64,
    pub rendered: String,
}

impl fmt::Display for NinesRating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} nines, {}", self.nines, self.rendered)
    }
}

pub fn nines_rating(a: f64) -> Result<NinesRating, MetricsError> {
    if !(0.0..1.0).contains(&a) {
        return Err(MetricsError::OutOfRange(a));
    }
    let unavailability = 1.0 - a;
    // Tolerate the representation error of values such as 0.99999.
    let nines = (-unavailability.log10() + 1e-9).floor().max(0.0) as u32;
    let downtime_annual_s = unavailability * SECONDS_PER_YEAR;
    Ok(NinesRating {
        nines,
        downtime_annual_s,
        rendered: render_duration(downtime_annual_s),
    })
}

const UNITS: [(&str, &str, f64); 4] = [
    ("second", "seconds", 1.0),
    ("minute", "minutes", 60.0),
    ("hour", "hours", 3600.0),
    ("day", "days", 86400.0),
];

fn unit_name(idx: usize, count: f64) -> &'static str {
    if count == 1.0 {
        UNITS[idx].0
    } else {
        UNITS[idx].1
    }
}

fn one_decimal(x: f64) -> String {
    let r = (x * 10.0).round() / 10.0;
    if r.fract() == 0.0 {
        format!("{r:.0}")
    } else {
        format!("{r:.1}")
    }
}

/// Renders a duration the way availability tables do: the smallest unit in
/// which the value is below 100, as whole units plus a one-decimal remainder
/// in the next smaller unit ("8 hours, 45.6 minutes").
pub fn render_duration(seconds: f64) -> String {
    let idx = (0..UNITS.len())
        .find(|&i| seconds / UNITS[i].2 < 100.0)
        .unwrap_or(UNITS.len() - 1);
    let value = seconds / UNITS[idx].2;
    if idx == 0 {
        let v = (value * 10.0).round() / 10.0;
        return format!("{} {}", one_decimal(value), unit_name(0, v));
    }
    let mut major = value.floor();
    let ratio = UNITS[idx].2 / UNITS[idx - 1].2;
    let mut minor = ((value - major) * ratio * 10.0).round() / 10.0;
    if minor >= ratio {
        major += 1.0;
        minor -= ratio;
    }
    if minor == 0.0 {
        format!("{major:.0} {}", unit_name(idx, major))
    } else {
        format!(
            "{major:.0} {}, {} {}",
            unit_name(idx, major),
            one_decimal(minor),
            unit_name(idx - 1, minor)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn availability_examples() {
        assert!((availability_from_times(999.0, 1.0, 0.0).unwrap() - 0.999).abs() < 1e-15);
        assert!((availability_from_mttf(999.0, 1.0).unwrap() - 0.999).abs() < 1e-15);
        assert_eq!(availability_from_times(0.0, 5.0, 1.0).unwrap(), 0.0);
        assert!(matches!(availability_from_times(0.0, 0.0, 0.0), Err(MetricsError::ZeroDenominator)));
        assert!(matches!(availability_from_mttf(0.0, 0.0), Err(MetricsError::ZeroDenominator)));
    }

    #[test]
    fn steady_state_forms_agree() {
        // Ten cycles of 99 h up, 1 h down.
        let rec = AvailabilityRecord::from_occupancy(990.0, 10.0, 0.0, 10).unwrap();
        assert_eq!(rec.mtbf, rec.mttf + rec.mttr);
        let via_mttf = availability_from_mttf(rec.mttf, rec.mttr).unwrap();
        assert!((rec.availability - via_mttf).abs() < 1e-15);
    }

    #[test]
    fn composed_availability() {
        assert!((serial_availability(&[0.99, 0.99]).unwrap() - 0.9801).abs() < 1e-15);
        assert!((parallel_availability(&[0.9, 0.9]).unwrap() - 0.99).abs() < 1e-15);
        assert_eq!(parallel_availability(&[1.0, 0.3]).unwrap(), 1.0);
    }

    #[test]
    fn nines_rows() {
        let r = nines_rating(0.99999).unwrap();
        assert_eq!(r.nines, 5);
        assert_eq!(r.rendered, "5 minutes, 15.4 seconds");
        let r = nines_rating(0.9).unwrap();
        assert_eq!((r.nines, r.rendered.as_str()), (1, "36 days, 12 hours"));
        let r = nines_rating(0.999999).unwrap();
        assert_eq!((r.nines, r.rendered.as_str()), (6, "31.5 seconds"));
        assert_eq!(nines_rating(0.5).unwrap().nines, 0);
        assert_eq!(nines_rating(0.95).unwrap().nines, 1);
        assert!(nines_rating(1.0).is_err());
    }

    #[test]
    fn rendering_carries_rounded_remainders() {
        assert_eq!(render_duration(3599.99), "60 minutes");
        assert_eq!(render_duration(7200.0), "2 hours");
        assert_eq!(render_duration(90000.0 * 100.0), "104 days, 4 hours");
    }
}
