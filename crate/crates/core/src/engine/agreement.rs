//! Vote-family agreement: majority, confidence-weighted, and averaging.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A debate's answer: a task label, or a number for numeric tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Decision {
    Label(String),
    Number(f64),
}

impl Decision {
    pub fn label(&self) -> Option<&str> {
        match self {
            Decision::Label(l) => Some(l),
            Decision::Number(_) => None,
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::Label(l) => f.write_str(l),
            Decision::Number(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vote {
    pub voter: String,
    pub choice: Decision,
    /// Present iff the exchange format asks for confidence.
    pub confidence: Option<f64>,
}

impl Vote {
    pub fn label(voter: impl Into<String>, label: impl Into<String>) -> Self {
        Vote {
            voter: voter.into(),
            choice: Decision::Label(label.into()),
            confidence: None,
        }
    }

    pub fn weighted(voter: impl Into<String>, label: impl Into<String>, confidence: f64) -> Self {
        Vote {
            confidence: Some(confidence),
            ..Vote::label(voter, label)
        }
    }

    pub fn number(voter: impl Into<String>, value: f64) -> Self {
        Vote {
            voter: voter.into(),
            choice: Decision::Number(value),
            confidence: None,
        }
    }
}

/// Result of a label tally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tally {
    /// Winning label; on a tie, the earliest tied label in declared order.
    pub winner: String,
    /// Every label sharing the top score, in declared order. More than one
    /// entry means the winner came from the tie-break.
    pub tied: Vec<String>,
}

impl Tally {
    pub fn is_tie(&self) -> bool {
        self.tied.len() > 1
    }
}

fn label_counts(votes: &[Vote], labels: &[String]) -> Vec<usize> {
    labels
        .iter()
        .map(|l| votes.iter().filter(|v| v.choice.label() == Some(l)).count())
        .collect()
}

/// Picks the best-scoring labels among those that received a vote.
fn top<T: PartialOrd + Copy>(labels: &[String], counts: &[usize], score: &[T]) -> Option<Tally> {
    let voted: Vec<usize> = (0..labels.len()).filter(|&i| counts[i] > 0).collect();
    let best = voted
        .iter()
        .map(|&i| score[i])
        .fold(None, |acc: Option<T>, s| match acc {
            Some(a) if a >= s => Some(a),
            _ => Some(s),
        })?;
    let tied: Vec<String> = voted
        .into_iter()
        .filter(|&i| score[i] == best)
        .map(|i| labels[i].clone())
        .collect();
    Some(Tally {
        winner: tied[0].clone(),
        tied,
    })
}

/// Modal label. `None` when nobody cast a label vote.
pub fn majority_vote(votes: &[Vote], labels: &[String]) -> Option<Tally> {
    let counts = label_counts(votes, labels);
    top(labels, &counts, &counts)
}

/// Label with the largest summed confidence. Equal sums fall back to the
/// vote count, then to declared order. Missing confidences count as 0.5.
pub fn weighted_vote(votes: &[Vote], labels: &[String]) -> Option<Tally> {
    let counts = label_counts(votes, labels);
    let sums: Vec<f64> = labels
        .iter()
        .map(|l| {
            votes
                .iter()
                .filter(|v| v.choice.label() == Some(l))
                .map(|v| v.confidence.unwrap_or(0.5))
                .sum()
        })
        .collect();
    let by_weight = top(labels, &counts, &sums)?;
    if !by_weight.is_tie() {
        return Some(by_weight);
    }
    let tied_counts: Vec<usize> = labels
        .iter()
        .zip(&counts)
        .map(|(l, &c)| if by_weight.tied.contains(l) { c } else { 0 })
        .collect();
    top(labels, &tied_counts, &tied_counts)
}

/// Arithmetic mean of numeric votes.
pub fn average(votes: &[Vote]) -> Option<f64> {
    let values: Vec<f64> = votes
        .iter()
        .filter_map(|v| match v.choice {
            Decision::Number(n) => Some(n),
            Decision::Label(_) => None,
        })
        .collect();
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}
