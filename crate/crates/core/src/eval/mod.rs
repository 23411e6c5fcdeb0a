//! Correctness metrics, paired McNemar comparison and token/cost reports.

mod mcnemar;
mod metrics;
pub mod report;
mod usage;

use thiserror::Error;

pub use mcnemar::{
    chi2_1_upper_tail, mcnemar, mcnemar_with, pair_predictions, ContingencyTable, McNemarResult, McNemarVariant,
};
pub use metrics::{compute_metrics, Averages, ClassMetrics, ConfusionMatrix, MetricsReport};
pub use usage::{usage_report, UsageReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no predictions to evaluate")]
    Empty,
    #[error("duplicate item id `{0}`")]
    DuplicateId(String),
    #[error("runs are not paired: only in a: {only_in_a:?}; only in b: {only_in_b:?}")]
    IdMismatch {
        only_in_a: Vec<String>,
        only_in_b: Vec<String>,
    },
}
