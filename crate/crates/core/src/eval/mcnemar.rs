use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};
use statrs::function::erf::erfc;

use super::EvalError;
use crate::classify::PredictionRecord;

/// Paired outcomes of a candidate classifier against a baseline.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    /// Both correct.
    pub a: u64,
    /// Candidate correct, baseline wrong.
    pub b: u64,
    /// Baseline correct, candidate wrong.
    pub c: u64,
    /// Both wrong.
    pub d: u64,
}

impl ContingencyTable {
    pub fn discordant(b: u64, c: u64) -> Self {
        ContingencyTable { a: 0, b, c, d: 0 }
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McNemarVariant {
    /// `(|b - c| - 1)^2 / (b + c)` against chi-square(1).
    #[default]
    ContinuityCorrected,
    /// `(b - c)^2 / (b + c)` against chi-square(1).
    Uncorrected,
    /// Two-sided binomial test on the discordant pairs; statistic is `min(b, c)`.
    ExactBinomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemarResult {
    pub variant: McNemarVariant,
    pub statistic: f64,
    pub p_value: f64,
}

/// Upper tail of chi-square with one degree of freedom.
pub fn chi2_1_upper_tail(x: f64) -> f64 {
    erfc((x / 2.0).sqrt())
}

/// Continuity-corrected McNemar test.
pub fn mcnemar(table: &ContingencyTable) -> McNemarResult {
    mcnemar_with(table, McNemarVariant::ContinuityCorrected)
}

pub fn mcnemar_with(table: &ContingencyTable, variant: McNemarVariant) -> McNemarResult {
    let (b, c) = (table.b, table.c);
    let n = b + c;
    if n == 0 {
        return McNemarResult {
            variant,
            statistic: 0.0,
            p_value: 1.0,
        };
    }
    let diff = b.abs_diff(c) as f64;
    let (statistic, p_value) = match variant {
        McNemarVariant::ContinuityCorrected => {
            // not clamped at zero: b = c gives 1 / (b + c)
            let s = (diff - 1.0).powi(2) / n as f64;
            (s, chi2_1_upper_tail(s))
        }
        McNemarVariant::Uncorrected => {
            let s = diff.powi(2) / n as f64;
            (s, chi2_1_upper_tail(s))
        }
        McNemarVariant::ExactBinomial => {
            let k = b.min(c);
            let binom = Binomial::new(0.5, n).expect("valid binomial");
            (k as f64, (2.0 * binom.cdf(k)).min(1.0))
        }
    };
    McNemarResult {
        variant,
        statistic,
        p_value: p_value.clamp(f64::MIN_POSITIVE, 1.0),
    }
}

/// Joins two runs on item id. `candidate` plays the role counted in `b`.
pub fn pair_predictions(
    candidate: &[PredictionRecord],
    baseline: &[PredictionRecord],
) -> Result<ContingencyTable, EvalError> {
    let index = |records: &[PredictionRecord]| -> Result<BTreeMap<String, bool>, EvalError> {
        let mut map = BTreeMap::new();
        for r in records {
            if map.insert(r.id.clone(), r.counts_as_correct()).is_some() {
                return Err(EvalError::DuplicateId(r.id.clone()));
            }
        }
        Ok(map)
    };
    let cand = index(candidate)?;
    let base = index(baseline)?;
    let cand_ids: BTreeSet<&String> = cand.keys().collect();
    let base_ids: BTreeSet<&String> = base.keys().collect();
    if cand_ids != base_ids {
        return Err(EvalError::IdMismatch {
            only_in_a: cand_ids.difference(&base_ids).map(|s| s.to_string()).collect(),
            only_in_b: base_ids.difference(&cand_ids).map(|s| s.to_string()).collect(),
        });
    }
    let mut table = ContingencyTable::default();
    for (id, &cand_ok) in &cand {
        match (cand_ok, base[id]) {
            (true, true) => table.a += 1,
            (true, false) => table.b += 1,
            (false, true) => table.c += 1,
            (false, false) => table.d += 1,
        }
    }
    Ok(table)
}
