use crate::llm::{BackendError, ChatBackend, ChatRequest, ModelParams, Turn, Usage};
use crate::model::Participant;

use super::context::message_turn;
use super::Message;

pub const ELLIPSIS: &str = "…";

/// Keeps the first `max_words` whitespace-separated words, marking the cut
/// with an ellipsis. Text within the limit is returned unchanged.
pub fn truncate_words(text: &str, max_words: usize) -> String {
    let words: Vec<&str> = text.split_whitespace().collect();
    if words.len() <= max_words {
        return text.to_string();
    }
    format!("{} {ELLIPSIS}", words[..max_words].join(" "))
}

/// One summarizer call over `messages`. An empty input yields an empty digest
/// without touching the backend.
pub fn summarize(
    summarizer: &Participant,
    messages: &[&Message],
    max_words: usize,
    round: u32,
    backend: &dyn ChatBackend,
    model: &ModelParams,
) -> Result<(String, Usage), BackendError> {
    if messages.is_empty() {
        return Ok((String::new(), Usage::default()));
    }
    let joined = messages
        .iter()
        .map(|m| message_turn(m).rendered())
        .collect::<Vec<_>>()
        .join("\n\n");
    let request = ChatRequest::new(
        summarizer.rendered_system_prompt(),
        vec![Turn::user(joined)],
        model.clone(),
    )
    .tagged(&summarizer.name, round);
    let response = backend.complete(&request)?;
    Ok((truncate_words(&response.text, max_words), response.usage))
}
