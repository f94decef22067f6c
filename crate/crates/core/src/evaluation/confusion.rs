use serde::{Deserialize, Serialize};

use crate::classifier::AlarmLabel;
use crate::error::{Error, Result};
use crate::labels::Class;

/// 4x4 counts; rows are predicted N, V, S, F and columns the truth.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 4]; 4],
}

/// One-vs-rest reduction for one class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

/// Percentages; `None` marks an undefined metric (zero denominator).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BinaryMetrics {
    pub acc: Option<f64>,
    pub se: Option<f64>,
    pub sp: Option<f64>,
}

/// Which stage's label is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Global-stage label alone.
    Red,
    /// Final label with yellow and red merged.
    Final,
}

impl ConfusionMatrix {
    pub fn from_rows(counts: [[u64; 4]; 4]) -> Self {
        ConfusionMatrix { counts }
    }

    pub fn add(&mut self, predicted: Class, truth: Class) {
        self.counts[predicted.index()][truth.index()] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for r in 0..4 {
            for c in 0..4 {
                self.counts[r][c] += other.counts[r][c];
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn binary(&self, class: Class) -> BinaryCounts {
        let i = class.index();
        let tp = self.counts[i][i];
        let fp = self.counts[i].iter().sum::<u64>() - tp;
        let fn_ = (0..4).map(|r| self.counts[r][i]).sum::<u64>() - tp;
        BinaryCounts { tp, fp, fn_, tn: self.total() - tp - fp - fn_ }
    }
}

impl BinaryCounts {
    pub fn metrics(&self) -> BinaryMetrics {
        let pct = |num: u64, den: u64| (den > 0).then(|| 100.0 * num as f64 / den as f64);
        BinaryMetrics {
            acc: pct(self.tp + self.tn, self.tp + self.tn + self.fp + self.fn_),
            se: pct(self.tp, self.tp + self.fn_),
            sp: pct(self.tn, self.tn + self.fp),
        }
    }
}

pub fn binary_metrics(cm: &ConfusionMatrix, class: Class) -> BinaryMetrics {
    cm.binary(class).metrics()
}

/// Counts aligned predicted/true sequences.
pub fn confusion(predicted: &[Class], truth: &[Class]) -> Result<ConfusionMatrix> {
    if predicted.len() != truth.len() {
        return Err(Error::InvalidParameter(format!(
            "{} predictions for {} truths",
            predicted.len(),
            truth.len()
        )));
    }
    let mut cm = ConfusionMatrix::default();
    predicted.iter().zip(truth).for_each(|(&p, &t)| cm.add(p, t));
    Ok(cm)
}

/// Confusion of an alarm stream; every alarm must carry a truth label.
pub fn confusion_alarms(alarms: &[AlarmLabel], variant: Variant) -> Result<ConfusionMatrix> {
    let mut cm = ConfusionMatrix::default();
    for a in alarms {
        let truth = a.truth.ok_or_else(|| {
            Error::InvalidParameter(format!("{} segment {}: alarm without a truth label", a.patient_id, a.time_index))
        })?;
        let predicted = match variant {
            Variant::Red => a.global,
            Variant::Final => a.value.class(),
        };
        cm.add(predicted, truth);
    }
    Ok(cm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_binary() {
        let b = BinaryCounts { tp: 1, fp: 1, fn_: 1, tn: 1 };
        let m = b.metrics();
        assert_eq!((m.acc, m.se, m.sp), (Some(50.0), Some(50.0), Some(50.0)));
    }

    #[test]
    fn undefined_sentinel() {
        let cm = ConfusionMatrix::default();
        assert_eq!(binary_metrics(&cm, Class::V), BinaryMetrics { acc: None, se: None, sp: None });
    }

    #[test]
    fn diagonal_is_perfect() {
        let cm = confusion(&Class::ALL, &Class::ALL).unwrap();
        for c in Class::ALL {
            let m = binary_metrics(&cm, c);
            assert_eq!((m.acc, m.se, m.sp), (Some(100.0), Some(100.0), Some(100.0)));
        }
        assert!(confusion(&[Class::N], &[]).is_err());
    }
}
