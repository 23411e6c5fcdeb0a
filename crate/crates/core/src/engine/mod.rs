//! Runs one debate per item: a fixed round state machine over the schedule
//! the config describes, recording every utterance in a [`Transcript`].
//!
//! Round 0 holds the opening statements; rounds `1..=n` are rebuttals. After
//! the last round the agreement rule turns the transcript into a decision.
//! Message order is fixed by (round, phase, config order), never by which
//! backend call finishes first, so a deterministic backend gives
//! byte-identical transcripts however the calls are scheduled.

mod agreement;
mod context;
pub mod labels;
mod summarize;
mod transcript_io;

use std::collections::BTreeSet;
use std::thread;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::debug;

use crate::llm::{BackendError, ChatBackend, ChatRequest, ChatResponse, ModelParams, Turn, Usage};
use crate::model::{
    recipients, speaking_schedule, validate_config, AgreementRule, DebateConfig, ExchangeFormat, Participant, Role,
    Violation,
};

pub use agreement::{average, majority_vote, weighted_vote, Decision, Tally, Vote};
pub use context::{build_context, speaker_tag, JUDGE_FINAL_INSTRUCTION, VERBATIM_DIGEST_WORDS};
pub use summarize::{summarize, truncate_words, ELLIPSIS};
pub use transcript_io::{read_jsonl, write_jsonl, TranscriptIoError};

use labels::{answer_number, confidence, find_label, marked_label, ANSWER_MARKER, CLASSIFICATION_MARKER};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub seq: u64,
    /// Round the message belongs to; judge and summarizer messages carry the
    /// round they conclude.
    pub round: u32,
    pub sender: String,
    pub role: Role,
    pub recipients: BTreeSet<String>,
    pub content: String,
    pub usage: Usage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub debate_id: String,
    pub messages: Vec<Message>,
    pub config_fingerprint: String,
}

impl Transcript {
    pub fn new(debate_id: impl Into<String>, config_fingerprint: impl Into<String>) -> Self {
        Transcript {
            debate_id: debate_id.into(),
            messages: Vec::new(),
            config_fingerprint: config_fingerprint.into(),
        }
    }

    fn push(&mut self, round: u32, sender: &Participant, recipients: BTreeSet<String>, content: String, usage: Usage) {
        let seq = self.messages.len() as u64;
        self.messages.push(Message {
            seq,
            round,
            sender: sender.name.clone(),
            role: sender.role,
            recipients,
            content,
            usage,
        });
    }

    /// Most recent debater message from `name`.
    pub fn latest_from(&self, name: &str) -> Option<&Message> {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == Role::Debater && m.sender == name)
    }

    pub fn count_role(&self, role: Role) -> usize {
        self.messages.iter().filter(|m| m.role == role).count()
    }

    pub fn total_usage(&self) -> Usage {
        self.messages.iter().map(|m| m.usage).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AgreementPath {
    VoteResolved,
    TieEscalatedToJudge,
    JudgeResolved,
    AveragingResolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OutcomeFlag {
    /// The first reply had no readable label; a clarification turn was sent.
    ParseRetry,
    /// No readable label even after the retry; the fallback label was used.
    ParseFailure,
    /// A vote tie was broken by declared label order.
    TieBroken,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DebateOutcome {
    pub decision: Decision,
    pub transcript: Transcript,
    pub total_usage: Usage,
    pub agreement_path: AgreementPath,
    pub votes: Vec<Vote>,
    pub flags: BTreeSet<OutcomeFlag>,
}

#[derive(Debug, Error)]
pub enum DebateError {
    #[error("config rejected: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidConfig(Vec<Violation>),
    #[error("debate `{}` aborted after {} messages: {source}", .transcript.debate_id, .transcript.messages.len())]
    Aborted {
        /// Everything recorded before the failure.
        transcript: Box<Transcript>,
        #[source]
        source: BackendError,
    },
}

/// Sent when a judge reply carries no readable label.
pub fn clarification_turn(labels: &[String]) -> Turn {
    Turn::user(format!(
        "Your reply did not state a classification. Reply with {CLASSIFICATION_MARKER} <label>, where <label> is one of: {}.",
        labels.join(", ")
    ))
}

/// A validated config bound to model parameters, ready to run items.
#[derive(Debug, Clone)]
pub struct Debate<'a> {
    config: &'a DebateConfig,
    model: ModelParams,
    fingerprint: String,
}

impl<'a> Debate<'a> {
    pub fn new(config: &'a DebateConfig, model: ModelParams) -> Result<Self, DebateError> {
        let violations = validate_config(config);
        if !violations.is_empty() {
            return Err(DebateError::InvalidConfig(violations));
        }
        Ok(Debate {
            config,
            model,
            fingerprint: config.fingerprint(),
        })
    }

    pub fn config(&self) -> &DebateConfig {
        self.config
    }

    /// Label used when no label can be read: the first declared one.
    pub fn fallback_label(&self) -> &str {
        self.config.task.labels.first().map(String::as_str).unwrap_or("")
    }

    pub fn run(
        &self,
        debate_id: &str,
        item_input: &str,
        backend: &dyn ChatBackend,
    ) -> Result<DebateOutcome, DebateError> {
        let mut transcript = Transcript::new(debate_id, &self.fingerprint);
        match self.drive(&mut transcript, item_input, backend) {
            Ok((decision, agreement_path, votes, flags)) => Ok(DebateOutcome {
                decision,
                total_usage: transcript.total_usage(),
                transcript,
                agreement_path,
                votes,
                flags,
            }),
            Err(source) => Err(DebateError::Aborted {
                transcript: Box::new(transcript),
                source,
            }),
        }
    }

    #[allow(clippy::type_complexity)]
    fn drive(
        &self,
        transcript: &mut Transcript,
        item_input: &str,
        backend: &dyn ChatBackend,
    ) -> Result<(Decision, AgreementPath, Vec<Vote>, BTreeSet<OutcomeFlag>), BackendError> {
        let config = self.config;
        for round in 0..=config.rounds {
            let phases = speaking_schedule(config, round).expect("round within schedule");
            for phase in phases {
                let speakers: Vec<&Participant> = phase
                    .iter()
                    .map(|name| config.participant(name).expect("validated participant"))
                    .collect();
                let requests: Vec<ChatRequest> = speakers
                    .iter()
                    .map(|p| build_context(p, transcript, config, round, item_input, &self.model))
                    .collect();
                let mut failure = None;
                for (speaker, result) in speakers.iter().zip(call_all(&requests, backend)) {
                    match result {
                        Ok(response) => {
                            let to = recipients(config, &speaker.name, round).expect("validated debater");
                            transcript.push(round, speaker, to, response.text, response.usage);
                        }
                        Err(e) => {
                            failure.get_or_insert(e);
                        }
                    }
                }
                if let Some(e) = failure {
                    return Err(e);
                }
            }
            if config.summarizes_rounds() {
                self.summarize_round(transcript, round, backend)?;
            }
            debug!(debate = %transcript.debate_id, round, messages = transcript.messages.len(), "round complete");
        }
        self.resolve(transcript, item_input, backend)
    }

    fn summarize_round(
        &self,
        transcript: &mut Transcript,
        round: u32,
        backend: &dyn ChatBackend,
    ) -> Result<(), BackendError> {
        let config = self.config;
        let summarizer = config.summarizer().expect("summarizing configs have a summarizer");
        let max_words = match config.format {
            ExchangeFormat::Summarized { max_words } => max_words,
            _ => VERBATIM_DIGEST_WORDS,
        };
        let all_debaters = config.debaters();
        for group in config.debater_groups() {
            let (digest, usage) = {
                let messages: Vec<&Message> = transcript
                    .messages
                    .iter()
                    .filter(|m| m.role == Role::Debater && m.round == round && group.contains(&m.sender.as_str()))
                    .collect();
                if messages.is_empty() {
                    continue;
                }
                summarize(summarizer, &messages, max_words, round, backend, &self.model)?
            };
            let to: BTreeSet<String> = all_debaters
                .iter()
                .filter(|d| matches!(config.format, ExchangeFormat::Summarized { .. }) || !group.contains(d))
                .map(|d| d.to_string())
                .collect();
            transcript.push(round, summarizer, to, digest, usage);
        }
        Ok(())
    }

    fn final_votes(&self, transcript: &Transcript) -> Vec<Vote> {
        let config = self.config;
        config
            .debaters()
            .into_iter()
            .filter_map(|name| {
                let message = transcript.latest_from(name)?;
                let choice = if config.task.numeric {
                    Decision::Number(answer_number(&message.content)?)
                } else {
                    Decision::Label(marked_label(&message.content, ANSWER_MARKER, &config.task.labels)?.clone())
                };
                let confidence = (config.format == ExchangeFormat::WithConfidence)
                    .then(|| confidence(&message.content).unwrap_or(0.5));
                Some(Vote {
                    voter: name.to_string(),
                    choice,
                    confidence,
                })
            })
            .collect()
    }

    #[allow(clippy::type_complexity)]
    fn resolve(
        &self,
        transcript: &mut Transcript,
        item_input: &str,
        backend: &dyn ChatBackend,
    ) -> Result<(Decision, AgreementPath, Vec<Vote>, BTreeSet<OutcomeFlag>), BackendError> {
        let config = self.config;
        let labels = &config.task.labels;
        let mut flags = BTreeSet::new();
        let votes = if config.agreement.uses_votes() {
            self.final_votes(transcript)
        } else {
            Vec::new()
        };
        let fallback = || Decision::Label(self.fallback_label().to_string());

        let (decision, path) = match config.agreement {
            AgreementRule::Average => match average(&votes) {
                Some(mean) => (Decision::Number(mean), AgreementPath::AveragingResolved),
                None => {
                    flags.insert(OutcomeFlag::ParseFailure);
                    (Decision::Number(0.0), AgreementPath::AveragingResolved)
                }
            },
            AgreementRule::MajorityVote | AgreementRule::WeightedVote => {
                let tally = if config.agreement == AgreementRule::MajorityVote {
                    majority_vote(&votes, labels)
                } else {
                    weighted_vote(&votes, labels)
                };
                match tally {
                    Some(t) => {
                        if t.is_tie() {
                            flags.insert(OutcomeFlag::TieBroken);
                        }
                        (Decision::Label(t.winner), AgreementPath::VoteResolved)
                    }
                    None => {
                        flags.insert(OutcomeFlag::ParseFailure);
                        (fallback(), AgreementPath::VoteResolved)
                    }
                }
            }
            AgreementRule::JudgeDecision => {
                let label = self.ask_judge(transcript, item_input, backend, &mut flags)?;
                (Decision::Label(label), AgreementPath::JudgeResolved)
            }
            AgreementRule::JudgeOnTie => match majority_vote(&votes, labels) {
                Some(t) if !t.is_tie() => (Decision::Label(t.winner), AgreementPath::VoteResolved),
                _ => {
                    let label = self.ask_judge(transcript, item_input, backend, &mut flags)?;
                    (Decision::Label(label), AgreementPath::TieEscalatedToJudge)
                }
            },
        };
        Ok((decision, path, votes, flags))
    }

    /// One judge call over the full transcript, with a single clarification
    /// retry if no label can be read.
    fn ask_judge(
        &self,
        transcript: &mut Transcript,
        item_input: &str,
        backend: &dyn ChatBackend,
        flags: &mut BTreeSet<OutcomeFlag>,
    ) -> Result<String, BackendError> {
        let config = self.config;
        let judge = config.judge().expect("judge rules are validated");
        let labels = &config.task.labels;
        let mut request = build_context(judge, transcript, config, config.rounds, item_input, &self.model);
        let first = backend.complete(&request)?;
        let mut usage = first.usage;
        let mut content = first.text;
        let mut label = find_label(&content, CLASSIFICATION_MARKER, labels).cloned();
        if label.is_none() {
            flags.insert(OutcomeFlag::ParseRetry);
            request.turns.push(Turn::assistant(content.clone()));
            request.turns.push(clarification_turn(labels));
            let second = backend.complete(&request)?;
            usage += second.usage;
            content = second.text;
            label = find_label(&content, CLASSIFICATION_MARKER, labels).cloned();
        }
        transcript.push(config.rounds, judge, BTreeSet::new(), content, usage);
        Ok(label.unwrap_or_else(|| {
            flags.insert(OutcomeFlag::ParseFailure);
            self.fallback_label().to_string()
        }))
    }
}

/// Issues the requests of one phase, concurrently when there is more than
/// one. Results come back in request order.
fn call_all(requests: &[ChatRequest], backend: &dyn ChatBackend) -> Vec<Result<ChatResponse, BackendError>> {
    if requests.len() <= 1 {
        return requests.iter().map(|r| backend.complete(r)).collect();
    }
    thread::scope(|s| {
        let handles: Vec<_> = requests.iter().map(|r| s.spawn(move || backend.complete(r))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("backend call panicked"))
            .collect()
    })
}

/// Runs `config` on one input with default model parameters.
pub fn run_debate(
    config: &DebateConfig,
    item_input: &str,
    backend: &dyn ChatBackend,
) -> Result<DebateOutcome, DebateError> {
    Debate::new(config, ModelParams::default())?.run("debate", item_input, backend)
}
