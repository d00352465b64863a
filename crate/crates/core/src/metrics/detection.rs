use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Detector outcome counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionTally {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl DetectionTally {
    pub fn merge(&mut self, other: &DetectionTally) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.tn += other.tn;
        self.fn_ += other.fn_;
    }

    pub fn indicated(&self) -> u64 {
        self.tp + self.fp
    }

    pub fn actual(&self) -> u64 {
        self.tp + self.fn_
    }
}

/// Fraction of indications that were real: TP / (TP + FP).
pub fn precision(t: &DetectionTally) -> Result<f64, MetricsError> {
    match t.indicated() {
        0 => Err(MetricsError::UndefinedMetric("precision")),
        n => Ok(t.tp as f64 / n as f64),
    }
}

/// Fraction of real events that were indicated: TP / (TP + FN).
pub fn recall(t: &DetectionTally) -> Result<f64, MetricsError> {
    match t.actual() {
        0 => Err(MetricsError::UndefinedMetric("recall")),
        n => Ok(t.tp as f64 / n as f64),
    }
}

/// 1 - FP / (TP + FP); equal to [`precision`] up to rounding.
pub fn precision_complement(t: &DetectionTally) -> Result<f64, MetricsError> {
    match t.indicated() {
        0 => Err(MetricsError::UndefinedMetric("precision")),
        n => Ok(1.0 - t.fp as f64 / n as f64),
    }
}

/// 1 - FN / (TP + FN); equal to [`recall`] up to rounding.
pub fn recall_complement(t: &DetectionTally) -> Result<f64, MetricsError> {
    match t.actual() {
        0 => Err(MetricsError::UndefinedMetric("recall")),
        n => Ok(1.0 - t.fn_ as f64 / n as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let t = DetectionTally { tp: 8, fp: 2, tn: 0, fn_: 8 };
        assert_eq!(precision(&t).unwrap(), 0.8);
        assert_eq!(recall(&t).unwrap(), 0.5);
        let perfect = DetectionTally { tp: 3, ..Default::default() };
        assert_eq!(precision(&perfect).unwrap(), 1.0);
        assert!(matches!(precision(&DetectionTally::default()), Err(MetricsError::UndefinedMetric(_))));
        assert!(matches!(recall(&DetectionTally { fp: 4, ..Default::default() }), Err(MetricsError::UndefinedMetric(_))));
    }

    proptest! {
        #[test]
        fn complementary_forms_agree(tp in 0u64..10_000, fp in 0u64..10_000, fn_ in 0u64..10_000) {
            let t = DetectionTally { tp, fp, tn: 0, fn_ };
            if let (Ok(a), Ok(b)) = (precision(&t), precision_complement(&t)) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            if let (Ok(a), Ok(b)) = (recall(&t), recall_complement(&t)) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
