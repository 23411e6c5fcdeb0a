use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::classify::PredictionRecord;
use crate::llm::{estimate_cost, PriceTable, Usage};

/// Token and cost totals for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsageReport {
    pub items: usize,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub total_tokens: u64,
    pub cost: f64,
    pub currency: String,
    pub wall_time_secs: Option<f64>,
}

impl UsageReport {
    pub fn from_usage(items: usize, usage: Usage, prices: &PriceTable, wall_time: Option<Duration>) -> Self {
        UsageReport {
            items,
            input_tokens: usage.input_tokens,
            output_tokens: usage.output_tokens,
            total_tokens: usage.total(),
            cost: estimate_cost(usage, prices),
            currency: prices.currency.clone(),
            wall_time_secs: wall_time.map(|d| d.as_secs_f64()),
        }
    }

    pub fn usage(&self) -> Usage {
        Usage::new(self.input_tokens, self.output_tokens)
    }

    /// True when both token counts are exactly twice `other`'s, the pattern
    /// of a total that was extrapolated rather than measured.
    pub fn looks_doubled_from(&self, other: &UsageReport) -> bool {
        other.total_tokens > 0
            && self.input_tokens == 2 * other.input_tokens
            && self.output_tokens == 2 * other.output_tokens
    }
}

/// Integer token sums over the records, priced with `prices`.
pub fn usage_report(records: &[PredictionRecord], prices: &PriceTable, wall_time: Option<Duration>) -> UsageReport {
    let usage: Usage = records.iter().map(|r| r.usage).sum();
    UsageReport::from_usage(records.len(), usage, prices, wall_time)
}
