//! Functional / non-functional requirement classification: dataset loading,
//! the single-agent baseline, the debate pipeline, and label parsing.

mod dataset;
mod pipeline;
pub mod prompts;
mod records;

use thiserror::Error;

use crate::engine::labels::{find_label, CLASSIFICATION_MARKER};

pub use dataset::{load_dataset, parse_dataset, Dataset, DatasetError, Label, LabelMapping, LabeledRequirement};
pub use pipeline::{for_each_ordered, run_baseline, run_mad, ItemFailure, RunOptions, RunOutput};
pub use records::{read_predictions, transcript_ref, write_predictions, PredictionRecord, RecordsError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no F/NF label found in reply")]
pub struct ParseFailure;

/// Reads F or NF from a free-text reply: the last `CLASSIFICATION:` marker
/// wins; otherwise a standalone `NF` token, then a standalone `F`.
pub fn parse_label(response_text: &str) -> Result<Label, ParseFailure> {
    let labels = Label::names();
    find_label(response_text, CLASSIFICATION_MARKER, &labels)
        .map(|l| l.parse().expect("label from the F/NF set"))
        .ok_or(ParseFailure)
}
