//! Chat-completion abstraction: request/response types, exact token usage,
//! cost estimation, and the backends (remote HTTP, scripted mock).

mod limit;
mod mock;
mod remote;
mod retry;

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use limit::{InFlightLimit, Limited, DEFAULT_IN_FLIGHT};
pub use mock::{estimate_tokens, MockBackend, MockRule, MockScript};
pub use remote::{RemoteBackend, RemoteConfig, API_KEY_ENV, DEFAULT_TIMEOUT};
pub use retry::{with_retry, RetryPolicy};

/// Who a turn comes from, as seen by the agent receiving the request.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speaker {
    /// Plain user turn (task prompt, instructions).
    User,
    /// Another agent's output, introduced by a stable tag line.
    Tagged(String),
    /// The receiving agent's own earlier reply.
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: Speaker,
    pub text: String,
}

impl Turn {
    pub fn user(text: impl Into<String>) -> Self {
        Turn {
            speaker: Speaker::User,
            text: text.into(),
        }
    }

    pub fn tagged(tag: impl Into<String>, text: impl Into<String>) -> Self {
        Turn {
            speaker: Speaker::Tagged(tag.into()),
            text: text.into(),
        }
    }

    pub fn assistant(text: impl Into<String>) -> Self {
        Turn {
            speaker: Speaker::Assistant,
            text: text.into(),
        }
    }

    /// Text as sent on the wire.
    pub fn rendered(&self) -> String {
        match &self.speaker {
            Speaker::Tagged(tag) => format!("{tag}\n{}", self.text),
            Speaker::User | Speaker::Assistant => self.text.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub model_id: String,
    #[serde(default)]
    pub temperature: f64,
    /// `None` leaves the limit to the provider.
    #[serde(default)]
    pub max_output_tokens: Option<u32>,
}

impl ModelParams {
    pub fn new(model_id: impl Into<String>) -> Self {
        ModelParams {
            model_id: model_id.into(),
            temperature: 0.0,
            max_output_tokens: None,
        }
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams::new("gpt-4o")
    }
}

/// Who is asking, for logging and mock matching. Never sent on the wire.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RequestTag {
    pub participant: Option<String>,
    pub round: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub system_prompt: String,
    pub turns: Vec<Turn>,
    pub model_params: ModelParams,
    #[serde(default)]
    pub tag: RequestTag,
}

impl ChatRequest {
    pub fn new(system_prompt: impl Into<String>, turns: Vec<Turn>, model_params: ModelParams) -> Self {
        ChatRequest {
            system_prompt: system_prompt.into(),
            turns,
            model_params,
            tag: RequestTag::default(),
        }
    }

    pub fn tagged(mut self, participant: &str, round: u32) -> Self {
        self.tag = RequestTag {
            participant: Some(participant.to_string()),
            round: Some(round),
        };
        self
    }

    pub fn check(&self) -> Result<(), BackendError> {
        if self.turns.is_empty() {
            return Err(BackendError::InvalidRequest("request has no turns".into()));
        }
        let t = self.model_params.temperature;
        if !(0.0..=2.0).contains(&t) {
            return Err(BackendError::InvalidRequest(format!("temperature {t} outside [0, 2]")));
        }
        if self.model_params.max_output_tokens == Some(0) {
            return Err(BackendError::InvalidRequest(
                "max_output_tokens must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Usage {
    pub input_tokens: u64,
    pub output_tokens: u64,
}

impl Usage {
    pub fn new(input_tokens: u64, output_tokens: u64) -> Self {
        Usage {
            input_tokens,
            output_tokens,
        }
    }

    pub fn total(&self) -> u64 {
        self.input_tokens + self.output_tokens
    }
}

impl Add for Usage {
    type Output = Usage;

    fn add(self, rhs: Usage) -> Usage {
        Usage::new(
            self.input_tokens + rhs.input_tokens,
            self.output_tokens + rhs.output_tokens,
        )
    }
}

impl AddAssign for Usage {
    fn add_assign(&mut self, rhs: Usage) {
        *self = *self + rhs;
    }
}

impl Sum for Usage {
    fn sum<I: Iterator<Item = Usage>>(iter: I) -> Usage {
        iter.fold(Usage::default(), Add::add)
    }
}

impl<'a> Sum<&'a Usage> for Usage {
    fn sum<I: Iterator<Item = &'a Usage>>(iter: I) -> Usage {
        iter.copied().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatResponse {
    pub text: String,
    pub usage: Usage,
    pub latency: Duration,
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("transport error: {message}")]
    Transport { message: String, transient: bool },
    #[error("provider error (status {status}): {message}")]
    Provider { status: u16, message: String },
    #[error("mock script has no rule matching the request{}", .0.as_deref().map(|p| format!(" from `{p}`")).unwrap_or_default())]
    ScriptMiss(Option<String>),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("backend configuration: {0}")]
    Config(String),
    #[error("malformed provider response: {0}")]
    MalformedResponse(String),
}

impl BackendError {
    /// Timeouts, connection failures, 5xx and 429 are worth retrying.
    pub fn is_transient(&self) -> bool {
        match self {
            BackendError::Transport { transient, .. } => *transient,
            BackendError::Provider { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }

    /// Errors meaning the backend could not be reached at all.
    pub fn is_unreachable(&self) -> bool {
        matches!(self, BackendError::Transport { .. } | BackendError::Config(_))
    }
}

/// A chat-completion backend. Shared across threads.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError>;

    /// Short description recorded in run manifests.
    fn describe(&self) -> String;
}

impl<B: ChatBackend + ?Sized> ChatBackend for &B {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        (**self).complete(request)
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<B: ChatBackend + ?Sized> ChatBackend for Box<B> {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        (**self).complete(request)
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

/// Token prices per million tokens, plus a conversion to the reporting currency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawPriceTable")]
pub struct PriceTable {
    pub input_price: f64,
    pub output_price: f64,
    pub currency_rate: f64,
    pub currency: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPriceTable {
    input_price: f64,
    output_price: f64,
    #[serde(default = "one")]
    currency_rate: f64,
    #[serde(default)]
    currency: String,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawPriceTable> for PriceTable {
    type Error = String;

    fn try_from(raw: RawPriceTable) -> Result<Self, String> {
        PriceTable::new(raw.input_price, raw.output_price, raw.currency_rate, raw.currency)
    }
}

impl PriceTable {
    pub fn new(
        input_price: f64,
        output_price: f64,
        currency_rate: f64,
        currency: impl Into<String>,
    ) -> Result<Self, String> {
        for (name, value) in [
            ("input_price", input_price),
            ("output_price", output_price),
            ("currency_rate", currency_rate),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(format!("{name} must be strictly positive, got {value}"));
            }
        }
        Ok(PriceTable {
            input_price,
            output_price,
            currency_rate,
            currency: currency.into(),
        })
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}

/// Unrounded cost of `usage` in the reporting currency.
pub fn estimate_cost(usage: Usage, prices: &PriceTable) -> f64 {
    let raw = usage.input_tokens as f64 * prices.input_price + usage.output_tokens as f64 * prices.output_price;
    raw / 1_000_000.0 * prices.currency_rate
}

/// Cost rounded half-up to cents, for display.
pub struct DisplayCost(pub f64);

impl fmt::Display for DisplayCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cents = (self.0 * 100.0).round() / 100.0;
        write!(f, "{cents:.2}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn usd() -> PriceTable {
        PriceTable::new(2.50, 10.00, 1.0, "USD").unwrap()
    }

    #[test]
    fn zero_usage_costs_nothing() {
        assert_eq!(estimate_cost(Usage::default(), &usd()), 0.0);
        assert_eq!(DisplayCost(0.0).to_string(), "0.00");
    }

    #[test]
    fn cost_examples() {
        // (1,068,517 * 2.5 + 453,126 * 10) / 1e6 = 7.2025525
        let mad = estimate_cost(Usage::new(1_068_517, 453_126), &usd());
        assert!((mad - 7.2025525).abs() < 1e-12);
        assert_eq!(DisplayCost(mad).to_string(), "7.20");
        // 0.152145 * 2.5 + 0.008694 * 10 = 0.4673025
        let base = estimate_cost(Usage::new(152_145, 8_694), &usd());
        assert!((base - 0.4673025).abs() < 1e-12);
        assert_eq!(DisplayCost(base).to_string(), "0.47");
    }

    #[test]
    fn display_rounds_half_up() {
        assert_eq!(DisplayCost(0.125).to_string(), "0.13");
        assert_eq!(DisplayCost(0.994).to_string(), "0.99");
    }

    #[test]
    fn prices_must_be_positive() {
        assert!(PriceTable::new(0.0, 1.0, 1.0, "").is_err());
        assert!(PriceTable::new(1.0, -1.0, 1.0, "").is_err());
        assert!(PriceTable::new(1.0, 1.0, f64::NAN, "").is_err());
        assert!(PriceTable::from_toml("input_price = 2.5\noutput_price = 0.0").is_err());
        let t = PriceTable::from_toml("input_price = 2.5\noutput_price = 10.0").unwrap();
        assert_eq!(t.currency_rate, 1.0);
        assert!(PriceTable::from_toml("input_price = 2.5\noutput_price = 10.0\nfoo = 1").is_err());
    }

    #[test]
    fn request_checks() {
        let p = ModelParams::new("m");
        assert!(ChatRequest::new("s", vec![], p.clone()).check().is_err());
        let mut hot = p.clone();
        hot.temperature = 2.5;
        assert!(ChatRequest::new("s", vec![Turn::user("x")], hot).check().is_err());
        assert!(ChatRequest::new("s", vec![Turn::user("x")], p).check().is_ok());
        assert_eq!(ModelParams::default().temperature, 0.0);
    }

    #[test]
    fn transient_classification() {
        let t = |status| {
            BackendError::Provider {
                status,
                message: String::new(),
            }
            .is_transient()
        };
        assert!(t(500) && t(503) && t(429));
        assert!(!t(401) && !t(400));
        assert!(BackendError::Transport {
            message: "timeout".into(),
            transient: true
        }
        .is_transient());
        assert!(!BackendError::ScriptMiss(None).is_transient());
    }

    proptest! {
        #[test]
        fn cost_is_linear(a_in in 0u64..10_000_000, a_out in 0u64..10_000_000,
                          b_in in 0u64..10_000_000, b_out in 0u64..10_000_000,
                          ip in 0.01f64..100.0, op in 0.01f64..100.0, rate in 0.1f64..2.0) {
            let prices = PriceTable::new(ip, op, rate, "").unwrap();
            let a = Usage::new(a_in, a_out);
            let b = Usage::new(b_in, b_out);
            let joint = estimate_cost(a + b, &prices);
            let split = estimate_cost(a, &prices) + estimate_cost(b, &prices);
            prop_assert!((joint - split).abs() <= 1e-12 * joint.max(1.0));
        }
    }
}
