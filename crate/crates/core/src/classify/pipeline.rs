use std::collections::{BTreeSet, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use tracing::{info, warn};

use super::prompts::{BASELINE_ANSWER_INSTRUCTION, BASELINE_PROMPT, REQUIREMENT_PROMPT};
use super::records::transcript_ref;
use super::{parse_label, Dataset, Label, LabeledRequirement, PredictionRecord};
use crate::engine::{clarification_turn, Debate, DebateError, Decision, OutcomeFlag, Transcript};
use crate::llm::{BackendError, ChatBackend, ChatRequest, ModelParams, Turn, Usage, DEFAULT_IN_FLIGHT};
use crate::model::DebateConfig;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub model: ModelParams,
    /// Items processed at once.
    pub max_concurrency: usize,
    pub baseline_prompt: String,
    /// Baseline user prompt; `{input}` is the requirement text.
    pub user_prompt: String,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            model: ModelParams::default(),
            max_concurrency: DEFAULT_IN_FLIGHT,
            baseline_prompt: BASELINE_PROMPT.to_string(),
            user_prompt: REQUIREMENT_PROMPT.to_string(),
        }
    }
}

/// An item whose backend calls failed; its record carries the fallback label.
#[derive(Debug)]
pub struct ItemFailure {
    pub id: String,
    pub error: BackendError,
}

#[derive(Debug, Default)]
pub struct RunOutput {
    /// One per dataset item, in dataset order.
    pub records: Vec<PredictionRecord>,
    /// Debate transcripts aligned with `records`; empty for the baseline.
    pub transcripts: Vec<Transcript>,
    pub failures: Vec<ItemFailure>,
}

impl RunOutput {
    pub fn total_usage(&self) -> Usage {
        self.records.iter().map(|r| r.usage).sum()
    }

    /// True when items failed and every failure was a reachability problem.
    pub fn backend_unreachable(&self) -> bool {
        !self.records.is_empty()
            && self.failures.len() == self.records.len()
            && self.failures.iter().all(|f| f.error.is_unreachable())
    }
}

/// Maps `f` over `items` on up to `workers` threads, returning results in
/// input order.
pub fn for_each_ordered<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = workers.clamp(1, items.len().max(1));
    if workers == 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new(items.iter().map(|_| None).collect());
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(item) = items.get(i) else { break };
                let result = f(item);
                slots.lock().unwrap()[i] = Some(result);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every item processed"))
        .collect()
}

fn fallback_record(item: &LabeledRequirement, usage: Usage) -> PredictionRecord {
    let mut record = PredictionRecord::new(&item.id, Label::F, item.gold);
    record.flags.insert(OutcomeFlag::ParseFailure);
    record.usage = usage;
    record
}

fn classify_single(
    item: &LabeledRequirement,
    backend: &dyn ChatBackend,
    options: &RunOptions,
) -> Result<PredictionRecord, (BackendError, Usage)> {
    let mut request = ChatRequest::new(
        options.baseline_prompt.clone(),
        vec![
            Turn::user(options.user_prompt.replace("{input}", &item.text)),
            Turn::user(BASELINE_ANSWER_INSTRUCTION),
        ],
        options.model.clone(),
    )
    .tagged("baseline", 0);
    let first = backend.complete(&request).map_err(|e| (e, Usage::default()))?;
    let mut usage = first.usage;
    let mut flags = BTreeSet::new();
    let parsed = match parse_label(&first.text) {
        Ok(label) => Some(label),
        Err(_) => {
            flags.insert(OutcomeFlag::ParseRetry);
            request.turns.push(Turn::assistant(first.text));
            request.turns.push(clarification_turn(&Label::names()));
            let second = backend.complete(&request).map_err(|e| (e, usage))?;
            usage += second.usage;
            parse_label(&second.text).ok()
        }
    };
    let mut record = match parsed {
        Some(label) => PredictionRecord::new(&item.id, label, item.gold),
        None => fallback_record(item, usage),
    };
    record.flags.extend(flags);
    record.usage = usage;
    Ok(record)
}

/// Single-agent classification, one request per item.
pub fn run_baseline(dataset: &Dataset, backend: &dyn ChatBackend, options: &RunOptions) -> RunOutput {
    info!(dataset = %dataset.name, items = dataset.len(), "baseline run");
    let results = for_each_ordered(&dataset.items, options.max_concurrency, |item| {
        classify_single(item, backend, options)
    });
    let mut out = RunOutput::default();
    for (item, result) in dataset.items.iter().zip(results) {
        match result {
            Ok(record) => out.records.push(record),
            Err((error, usage)) => {
                warn!(id = %item.id, %error, "baseline item failed");
                out.records.push(fallback_record(item, usage));
                out.failures.push(ItemFailure {
                    id: item.id.clone(),
                    error,
                });
            }
        }
    }
    out
}

/// One debate per item; the judge's (or the votes') label is the prediction.
pub fn run_mad(
    dataset: &Dataset,
    config: &DebateConfig,
    backend: &dyn ChatBackend,
    options: &RunOptions,
) -> Result<RunOutput, DebateError> {
    let debate = Debate::new(config, options.model.clone())?;
    info!(dataset = %dataset.name, items = dataset.len(), rounds = config.rounds, "debate run");
    let results = for_each_ordered(&dataset.items, options.max_concurrency, |item| {
        debate.run(&item.id, &item.text, backend)
    });

    let mut refs_taken = HashSet::new();
    let mut out = RunOutput::default();
    for (index, (item, result)) in dataset.items.iter().zip(results).enumerate() {
        let mut reference = transcript_ref(&item.id);
        if !refs_taken.insert(reference.clone()) {
            reference = reference.replace(".jsonl", &format!("-{index}.jsonl"));
            refs_taken.insert(reference.clone());
        }
        let (mut record, transcript) = match result {
            Ok(outcome) => {
                let label = match &outcome.decision {
                    Decision::Label(l) => l.parse::<Label>().ok(),
                    Decision::Number(_) => None,
                };
                let mut record = match label {
                    Some(label) => PredictionRecord::new(&item.id, label, item.gold),
                    None => fallback_record(item, outcome.total_usage),
                };
                record.flags.extend(outcome.flags.iter().copied());
                record.usage = outcome.total_usage;
                (record, outcome.transcript)
            }
            Err(DebateError::Aborted { transcript, source }) => {
                warn!(id = %item.id, error = %source, "debate aborted");
                let record = fallback_record(item, transcript.total_usage());
                out.failures.push(ItemFailure {
                    id: item.id.clone(),
                    error: source,
                });
                (record, *transcript)
            }
            Err(e @ DebateError::InvalidConfig(_)) => return Err(e),
        };
        record.transcript_ref = reference;
        out.records.push(record);
        out.transcripts.push(transcript);
    }
    Ok(out)
}
