use std::time::{Duration, Instant};

use reqwest::blocking::Client;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tracing::debug;

use super::{with_retry, BackendError, ChatBackend, ChatRequest, ChatResponse, RetryPolicy, Speaker, Usage};

/// Environment variable holding the API key. Nothing else is read from the environment.
pub const API_KEY_ENV: &str = "OPENAI_API_KEY";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteConfig {
    /// Base URL of an OpenAI-compatible API, e.g. `https://api.openai.com/v1`.
    pub base_url: String,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_timeout_secs() -> u64 {
    DEFAULT_TIMEOUT.as_secs()
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            base_url: "https://api.openai.com/v1".to_string(),
            timeout_secs: default_timeout_secs(),
        }
    }
}

/// Chat-completions client for any OpenAI-compatible endpoint.
pub struct RemoteBackend {
    client: Client,
    endpoint: String,
    api_key: String,
    retry: RetryPolicy,
}

impl RemoteBackend {
    pub fn new(config: &RemoteConfig, api_key: impl Into<String>, retry: RetryPolicy) -> Result<Self, BackendError> {
        let client = Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| BackendError::Transport {
                message: e.to_string(),
                transient: false,
            })?;
        Ok(RemoteBackend {
            client,
            endpoint: format!("{}/chat/completions", config.base_url.trim_end_matches('/')),
            api_key: api_key.into(),
            retry,
        })
    }

    /// Reads the key from [`API_KEY_ENV`].
    pub fn from_env(config: &RemoteConfig) -> Result<Self, BackendError> {
        let key = std::env::var(API_KEY_ENV)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| BackendError::Config(format!("{API_KEY_ENV} is not set")))?;
        RemoteBackend::new(config, key, RetryPolicy::default())
    }

    fn attempt(&self, body: &Value) -> Result<ChatResponse, BackendError> {
        let started = Instant::now();
        let response = self
            .client
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(body)
            .send()
            .map_err(|e| BackendError::Transport {
                message: e.to_string(),
                transient: e.is_timeout() || e.is_connect() || e.is_request(),
            })?;
        let status = response.status();
        let text = response.text().map_err(|e| BackendError::Transport {
            message: e.to_string(),
            transient: e.is_timeout(),
        })?;
        if !status.is_success() {
            return Err(BackendError::Provider {
                status: status.as_u16(),
                message: text,
            });
        }
        let mut parsed = parse_completion(&text)?;
        parsed.latency = started.elapsed();
        Ok(parsed)
    }
}

/// Wire body for an OpenAI-compatible chat completion.
pub(crate) fn request_body(request: &ChatRequest) -> Value {
    let mut messages = vec![json!({ "role": "system", "content": request.system_prompt })];
    messages.extend(request.turns.iter().map(|turn| {
        let role = match turn.speaker {
            Speaker::Assistant => "assistant",
            Speaker::User | Speaker::Tagged(_) => "user",
        };
        json!({ "role": role, "content": turn.rendered() })
    }));
    let params = &request.model_params;
    let mut body = json!({
        "model": params.model_id,
        "messages": messages,
        "temperature": params.temperature,
    });
    if let Some(max) = params.max_output_tokens {
        body["max_tokens"] = json!(max);
    }
    body
}

#[derive(Deserialize)]
struct Completion {
    choices: Vec<Choice>,
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct Choice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireMessage {
    content: Option<String>,
}

#[derive(Deserialize)]
struct WireUsage {
    prompt_tokens: u64,
    completion_tokens: u64,
}

pub(crate) fn parse_completion(text: &str) -> Result<ChatResponse, BackendError> {
    let completion: Completion =
        serde_json::from_str(text).map_err(|e| BackendError::MalformedResponse(e.to_string()))?;
    let usage = completion
        .usage
        .ok_or_else(|| BackendError::MalformedResponse("response carries no usage".into()))?;
    let content = completion
        .choices
        .into_iter()
        .next()
        .and_then(|c| c.message.content)
        .ok_or_else(|| BackendError::MalformedResponse("response has no message content".into()))?;
    Ok(ChatResponse {
        text: content,
        usage: Usage::new(usage.prompt_tokens, usage.completion_tokens),
        latency: Duration::ZERO,
    })
}

impl ChatBackend for RemoteBackend {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        request.check()?;
        let body = request_body(request);
        debug!(participant = ?request.tag.participant, round = ?request.tag.round, "chat completion");
        with_retry(&self.retry, || self.attempt(&body))
    }

    fn describe(&self) -> String {
        format!("remote {}", self.endpoint)
    }
}
