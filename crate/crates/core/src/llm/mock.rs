use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{BackendError, ChatBackend, ChatRequest, ChatResponse, Usage};

/// `ceil(chars / 4)`, the mock's provider-independent token estimate.
pub fn estimate_tokens(text: &str) -> u64 {
    (text.chars().count() as u64).div_ceil(4)
}

/// One canned response. Every condition that is set must hold; unset
/// conditions match anything.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockRule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub participant: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_contains: Option<String>,
    /// Substring of any turn.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contains: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_turn_contains: Option<String>,
    /// Reply text; `{participant}` and `{round}` are filled from the request tag.
    pub response: String,
}

impl MockRule {
    pub fn reply(response: impl Into<String>) -> Self {
        MockRule {
            response: response.into(),
            ..MockRule::default()
        }
    }

    pub fn for_participant(mut self, name: impl Into<String>) -> Self {
        self.participant = Some(name.into());
        self
    }

    pub fn in_round(mut self, round: u32) -> Self {
        self.round = Some(round);
        self
    }

    pub fn when_system_contains(mut self, needle: impl Into<String>) -> Self {
        self.system_contains = Some(needle.into());
        self
    }

    pub fn when_contains(mut self, needle: impl Into<String>) -> Self {
        self.contains = Some(needle.into());
        self
    }

    pub fn when_last_turn_contains(mut self, needle: impl Into<String>) -> Self {
        self.last_turn_contains = Some(needle.into());
        self
    }

    fn matches(&self, request: &ChatRequest) -> bool {
        let tag = &request.tag;
        self.participant
            .as_ref()
            .is_none_or(|p| tag.participant.as_ref() == Some(p))
            && self.round.is_none_or(|r| tag.round == Some(r))
            && self
                .system_contains
                .as_ref()
                .is_none_or(|s| request.system_prompt.contains(s.as_str()))
            && self
                .contains
                .as_ref()
                .is_none_or(|s| request.turns.iter().any(|t| t.text.contains(s.as_str())))
            && self
                .last_turn_contains
                .as_ref()
                .is_none_or(|s| request.turns.last().is_some_and(|t| t.text.contains(s.as_str())))
    }
}

/// Ordered rules, first match wins; `default` answers anything unmatched.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockScript {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<String>,
    #[serde(default)]
    pub rules: Vec<MockRule>,
}

impl MockScript {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("mock scripts always serialize")
    }

    pub fn rule(mut self, rule: MockRule) -> Self {
        self.rules.push(rule);
        self
    }

    pub fn with_default(mut self, response: impl Into<String>) -> Self {
        self.default = Some(response.into());
        self
    }
}

/// Deterministic offline backend: a pure function of (script, request).
#[derive(Debug, Clone)]
pub struct MockBackend {
    script: MockScript,
}

impl MockBackend {
    pub fn new(script: MockScript) -> Self {
        MockBackend { script }
    }

    pub fn script(&self) -> &MockScript {
        &self.script
    }

    fn reply_for(&self, request: &ChatRequest) -> Option<String> {
        let template = self
            .script
            .rules
            .iter()
            .find(|r| r.matches(request))
            .map(|r| r.response.as_str())
            .or(self.script.default.as_deref())?;
        let participant = request.tag.participant.as_deref().unwrap_or("");
        let round = request.tag.round.map(|r| r.to_string()).unwrap_or_default();
        Some(
            template
                .replace("{participant}", participant)
                .replace("{round}", &round),
        )
    }
}

impl ChatBackend for MockBackend {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        request.check()?;
        let text = self
            .reply_for(request)
            .ok_or_else(|| BackendError::ScriptMiss(request.tag.participant.clone()))?;
        let input_tokens = estimate_tokens(&request.system_prompt)
            + request
                .turns
                .iter()
                .map(|t| estimate_tokens(&t.rendered()))
                .sum::<u64>();
        let usage = Usage::new(input_tokens, estimate_tokens(&text));
        Ok(ChatResponse {
            text,
            usage,
            latency: Duration::ZERO,
        })
    }

    fn describe(&self) -> String {
        format!("mock ({} rules)", self.script.rules.len())
    }
}
