use std::collections::BTreeSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Label;
use crate::engine::OutcomeFlag;
use crate::llm::Usage;

/// Per-item outcome of a classification run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionRecord {
    pub id: String,
    pub predicted: Label,
    pub gold: Label,
    pub correct: bool,
    pub flags: BTreeSet<OutcomeFlag>,
    pub usage: Usage,
    /// Path of the transcript relative to the run directory; empty for the baseline.
    pub transcript_ref: String,
}

impl PredictionRecord {
    pub fn new(id: impl Into<String>, predicted: Label, gold: Label) -> Self {
        PredictionRecord {
            id: id.into(),
            predicted,
            gold,
            correct: predicted == gold,
            flags: BTreeSet::new(),
            usage: Usage::default(),
            transcript_ref: String::new(),
        }
    }

    pub fn parse_failed(&self) -> bool {
        self.flags.contains(&OutcomeFlag::ParseFailure)
    }

    /// Correctness used for metrics and pairing: a parse failure is always
    /// an error, whatever the fallback label happened to be.
    pub fn counts_as_correct(&self) -> bool {
        self.correct && !self.parse_failed()
    }

    /// Prediction used for metrics: parse failures are scored as the wrong class.
    pub fn effective_prediction(&self) -> Label {
        if self.parse_failed() {
            self.gold.other()
        } else {
            self.predicted
        }
    }
}

/// Transcript path for an item, relative to the run directory.
pub fn transcript_ref(id: &str) -> String {
    let safe: String = id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("transcripts/{safe}.jsonl")
}

#[derive(Debug, Error)]
pub enum RecordsError {
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: {message}")]
    Invalid { row: usize, message: String },
}

#[derive(Serialize, Deserialize)]
struct Row {
    id: String,
    predicted: String,
    gold: String,
    correct: bool,
    flags: String,
    input_tokens: u64,
    output_tokens: u64,
    transcript_ref: String,
}

fn flag_name(flag: OutcomeFlag) -> &'static str {
    match flag {
        OutcomeFlag::ParseRetry => "ParseRetry",
        OutcomeFlag::ParseFailure => "ParseFailure",
        OutcomeFlag::TieBroken => "TieBroken",
    }
}

fn parse_flag(name: &str) -> Option<OutcomeFlag> {
    [
        OutcomeFlag::ParseRetry,
        OutcomeFlag::ParseFailure,
        OutcomeFlag::TieBroken,
    ]
    .into_iter()
    .find(|f| flag_name(*f) == name)
}

/// `id,predicted,gold,correct,flags,input_tokens,output_tokens,transcript_ref`;
/// flags are `|`-separated.
pub fn write_predictions<W: Write>(records: &[PredictionRecord], out: W) -> Result<(), RecordsError> {
    let mut writer = csv::Writer::from_writer(out);
    for r in records {
        writer.serialize(Row {
            id: r.id.clone(),
            predicted: r.predicted.to_string(),
            gold: r.gold.to_string(),
            correct: r.correct,
            flags: r.flags.iter().map(|f| flag_name(*f)).collect::<Vec<_>>().join("|"),
            input_tokens: r.usage.input_tokens,
            output_tokens: r.usage.output_tokens,
            transcript_ref: r.transcript_ref.clone(),
        })?;
    }
    if records.is_empty() {
        writer.write_record([
            "id",
            "predicted",
            "gold",
            "correct",
            "flags",
            "input_tokens",
            "output_tokens",
            "transcript_ref",
        ])?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_predictions<R: Read>(input: R) -> Result<Vec<PredictionRecord>, RecordsError> {
    let mut reader = csv::Reader::from_reader(input);
    let mut records = Vec::new();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let row_no = i + 1;
        let row = row?;
        let invalid = |message: String| RecordsError::Invalid { row: row_no, message };
        let predicted: Label = row.predicted.parse().map_err(invalid)?;
        let gold: Label = row.gold.parse().map_err(invalid)?;
        let flags = row
            .flags
            .split('|')
            .filter(|f| !f.is_empty())
            .map(|f| parse_flag(f).ok_or_else(|| invalid(format!("unknown flag `{f}`"))))
            .collect::<Result<BTreeSet<_>, _>>()?;
        if row.correct != (predicted == gold) {
            return Err(invalid(format!(
                "correct={} but predicted={predicted} gold={gold}",
                row.correct
            )));
        }
        records.push(PredictionRecord {
            id: row.id,
            predicted,
            gold,
            correct: row.correct,
            flags,
            usage: Usage::new(row.input_tokens, row.output_tokens),
            transcript_ref: row.transcript_ref,
        });
    }
    Ok(records)
}
