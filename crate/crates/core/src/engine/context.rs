use crate::llm::{ChatRequest, ModelParams, Turn};
use crate::model::{in_neighbors, DebateConfig, ExchangeFormat, Participant, Role};

use super::labels::{ANSWER_MARKER, CONFIDENCE_MARKER};
use super::summarize::truncate_words;
use super::{Message, Transcript};

/// Judge instruction sent once the debate is over.
pub const JUDGE_FINAL_INSTRUCTION: &str =
    "The debate has ended. Decide the final classification. End your reply with CLASSIFICATION: <label>.";

/// Word limit for inter-group digests built without a summarizer.
pub const VERBATIM_DIGEST_WORDS: usize = 150;

/// Stable tag introducing a message inside another agent's context.
pub fn speaker_tag(message: &Message) -> String {
    match message.role {
        Role::Debater => format!("Debater {}, round {}:", message.sender, message.round),
        Role::Judge => format!("Judge {}, round {}:", message.sender, message.round),
        _ => format!("Summarizer {}, round {}:", message.sender, message.round),
    }
}

pub(crate) fn message_turn(message: &Message) -> Turn {
    Turn::tagged(speaker_tag(message), message.content.clone())
}

fn answer_instruction(config: &DebateConfig) -> Option<String> {
    let mut lines = Vec::new();
    if config.agreement.uses_votes() {
        if config.task.numeric {
            lines.push(format!("End your reply with a line {ANSWER_MARKER} <number>."));
        } else {
            lines.push(format!(
                "End your reply with a line {ANSWER_MARKER} <label>, where <label> is one of: {}.",
                config.task.labels.join(", ")
            ));
        }
    }
    if config.format == ExchangeFormat::WithConfidence {
        lines.push(format!(
            "Also include a line {CONFIDENCE_MARKER} <0.00-1.00> giving your confidence in that answer."
        ));
    }
    (!lines.is_empty()).then(|| lines.join("\n"))
}

/// Assembles the request a participant sends in `round`.
///
/// Debaters get the task prompt, then (from round 1) what their in-neighbors
/// last said: verbatim, or the summarizer's digests of the previous round
/// when the format is summarized. Grouped topologies add the other groups'
/// digests. Judges get the task prompt and the whole transcript.
pub fn build_context(
    participant: &Participant,
    transcript: &Transcript,
    config: &DebateConfig,
    round: u32,
    item_input: &str,
    model: &ModelParams,
) -> ChatRequest {
    let mut turns = vec![Turn::user(config.task.render(item_input))];
    match participant.role {
        Role::Judge => {
            turns.extend(transcript.messages.iter().map(message_turn));
            turns.push(Turn::user(JUDGE_FINAL_INSTRUCTION));
        }
        _ if round == 0 => {}
        _ => {
            let name = participant.name.as_str();
            let previous_digests = || {
                transcript
                    .messages
                    .iter()
                    .filter(move |m| m.role == Role::Summarizer && m.round + 1 == round && m.recipients.contains(name))
                    .map(message_turn)
            };
            if let ExchangeFormat::Summarized { .. } = config.format {
                turns.extend(previous_digests());
            } else {
                for neighbor in in_neighbors(config, name) {
                    if let Some(latest) = transcript.latest_from(&neighbor) {
                        turns.push(message_turn(latest));
                    }
                }
                if config.debater_groups().len() > 1 {
                    if config.summarizer().is_some() {
                        turns.extend(previous_digests());
                    } else {
                        turns.extend(verbatim_group_digests(config, transcript, name, round - 1));
                    }
                }
            }
        }
    }
    if participant.role == Role::Debater {
        if let Some(instruction) = answer_instruction(config) {
            turns.push(Turn::user(instruction));
        }
    }
    ChatRequest::new(participant.rendered_system_prompt(), turns, model.clone()).tagged(&participant.name, round)
}

/// Truncated concatenations of each other group's messages from `round`.
fn verbatim_group_digests(config: &DebateConfig, transcript: &Transcript, receiver: &str, round: u32) -> Vec<Turn> {
    config
        .debater_groups()
        .iter()
        .enumerate()
        .filter(|(_, group)| !group.contains(&receiver))
        .filter_map(|(i, group)| {
            let text = transcript
                .messages
                .iter()
                .filter(|m| m.role == Role::Debater && m.round == round && group.contains(&m.sender.as_str()))
                .map(|m| message_turn(m).rendered())
                .collect::<Vec<_>>()
                .join("\n\n");
            (!text.is_empty()).then(|| {
                Turn::tagged(
                    format!("Group {} digest, round {round}:", i + 1),
                    truncate_words(&text, VERBATIM_DIGEST_WORDS),
                )
            })
        })
        .collect()
}
