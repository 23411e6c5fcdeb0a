use std::collections::BTreeMap;

use serde::Serialize;

use super::EvalError;
use crate::classify::{Label, PredictionRecord};

/// Binary confusion matrix with F as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fn_: u64, fp: u64, tn: u64) -> Self {
        ConfusionMatrix { tp, fn_, fp, tn }
    }

    /// Parse failures are scored as misclassified.
    pub fn from_records(records: &[PredictionRecord]) -> Self {
        records.iter().fold(ConfusionMatrix::default(), |mut m, r| {
            match (r.gold, r.effective_prediction()) {
                (Label::F, Label::F) => m.tp += 1,
                (Label::F, Label::NF) => m.fn_ += 1,
                (Label::NF, Label::F) => m.fp += 1,
                (Label::NF, Label::NF) => m.tn += 1,
            }
            m
        })
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.fp + self.tn
    }

    pub fn support(&self, label: Label) -> u64 {
        match label {
            Label::F => self.tp + self.fn_,
            Label::NF => self.fp + self.tn,
        }
    }

    /// (true positives, false positives, false negatives) for `label`.
    fn counts(&self, label: Label) -> (u64, u64, u64) {
        match label {
            Label::F => (self.tp, self.fp, self.fn_),
            Label::NF => (self.tn, self.fn_, self.fp),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub confusion: ConfusionMatrix,
    pub per_class: BTreeMap<Label, ClassMetrics>,
    pub accuracy: f64,
    /// Support-weighted averages over the two classes.
    pub weighted: Averages,
    /// Records flagged ParseFailure (already counted as errors above).
    pub parse_failures: usize,
    /// Metrics whose denominator was zero and were reported as 0.
    pub zero_division: Vec<String>,
}

fn ratio(num: u64, den: u64, name: String, zero: &mut Vec<String>) -> f64 {
    if den == 0 {
        zero.push(name);
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl MetricsReport {
    pub fn from_confusion(confusion: ConfusionMatrix) -> Result<Self, EvalError> {
        let total = confusion.total();
        if total == 0 {
            return Err(EvalError::Empty);
        }
        let mut zero = Vec::new();
        let mut per_class = BTreeMap::new();
        for label in Label::ALL {
            let (tp, fp, fn_) = confusion.counts(label);
            let precision = ratio(tp, tp + fp, format!("{label} precision"), &mut zero);
            let recall = ratio(tp, tp + fn_, format!("{label} recall"), &mut zero);
            let f1 = if precision + recall == 0.0 {
                zero.push(format!("{label} f1"));
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            per_class.insert(
                label,
                ClassMetrics {
                    precision,
                    recall,
                    f1,
                    support: confusion.support(label),
                },
            );
        }
        let weighted_mean = |get: fn(&ClassMetrics) -> f64| {
            per_class.values().map(|m| get(m) * m.support as f64).sum::<f64>() / total as f64
        };
        let weighted = Averages {
            precision: weighted_mean(|m| m.precision),
            recall: weighted_mean(|m| m.recall),
            f1: weighted_mean(|m| m.f1),
        };
        Ok(MetricsReport {
            confusion,
            accuracy: (confusion.tp + confusion.tn) as f64 / total as f64,
            per_class,
            weighted,
            parse_failures: 0,
            zero_division: zero,
        })
    }

    pub fn class(&self, label: Label) -> &ClassMetrics {
        &self.per_class[&label]
    }
}

/// Accuracy plus per-class and support-weighted precision, recall and F1.
pub fn compute_metrics(records: &[PredictionRecord]) -> Result<MetricsReport, EvalError> {
    let mut report = MetricsReport::from_confusion(ConfusionMatrix::from_records(records))?;
    report.parse_failures = records.iter().filter(|r| r.parse_failed()).count();
    Ok(report)
}
