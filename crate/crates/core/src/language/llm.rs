//! Client for an OpenAI-compatible `/chat/completions` endpoint.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::planner::Flag;

use super::GameInfoSnapshot;

pub const PARSE_SYSTEM_PROMPT: &str = include_str!("../../assets/prompts/parse_system_v1.txt");
pub const PARSE_USER_PROMPT: &str = include_str!("../../assets/prompts/parse_user_v1.txt");
pub const INQUIRY_SYSTEM_PROMPT: &str = include_str!("../../assets/prompts/inquiry_system_v1.txt");
pub const INQUIRY_USER_PROMPT: &str = include_str!("../../assets/prompts/inquiry_user_v1.txt");
pub const PROMPT_VERSION: &str = "v1";

/// Message/flag pairs shown to the model before the new message.
pub const FEW_SHOT: [(&str, Flag); 6] = [
    ("Right and then down. First move should be right.", Flag::Right),
    ("Can you move left by one step?", Flag::Left),
    ("Can you stay put?", Flag::Noop),
    ("Ok.", Flag::Accept),
    ("I cannot, there is a wall in that direction.", Flag::Reject),
    ("Where exactly is the hidden treasure located?", Flag::Inquiry),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmClientConfig {
    /// Base URL, e.g. `https://api.openai.com/v1`.
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
}

fn default_key_env() -> String {
    "OPENAI_API_KEY".into()
}

fn default_timeout_ms() -> u64 {
    10_000
}

fn default_retries() -> u32 {
    1
}

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("request timed out")]
    Timeout,
    #[error("http status {0}")]
    Status(u16),
    #[error("network error: {0}")]
    Network(String),
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("invalid client config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "system".into(),
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "user".into(),
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f32,
}

/// One request/response round trip returning the first choice's content.
pub trait ChatTransport: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, TransportError>;
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChatMessage,
}

pub struct HttpTransport {
    client: reqwest::blocking::Client,
    url: String,
    api_key: Option<String>,
    max_retries: u32,
}

impl HttpTransport {
    pub fn new(config: &LlmClientConfig) -> Result<Self, TransportError> {
        if config.timeout_ms == 0 {
            return Err(TransportError::Config("timeout must be positive".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| TransportError::Config(e.to_string()))?;
        Ok(HttpTransport {
            client,
            url: format!("{}/chat/completions", config.endpoint.trim_end_matches('/')),
            api_key: std::env::var(&config.api_key_env).ok(),
            max_retries: config.max_retries,
        })
    }

    fn attempt(&self, request: &ChatRequest) -> Result<String, TransportError> {
        let mut builder = self.client.post(&self.url).json(request);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder.send().map_err(|e| {
            if e.is_timeout() {
                TransportError::Timeout
            } else {
                TransportError::Network(e.to_string())
            }
        })?;
        let status = response.status();
        if !status.is_success() {
            return Err(TransportError::Status(status.as_u16()));
        }
        let body: ChatResponse = response.json().map_err(|e| TransportError::Malformed(e.to_string()))?;
        body.choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| TransportError::Malformed("no choices".into()))
    }
}

impl ChatTransport for HttpTransport {
    fn complete(&self, request: &ChatRequest) -> Result<String, TransportError> {
        let mut last = None;
        for _ in 0..=self.max_retries {
            match self.attempt(request) {
                Ok(text) => return Ok(text),
                // Client errors will not improve on retry.
                Err(TransportError::Status(s)) if (400..500).contains(&s) && s != 429 => {
                    return Err(TransportError::Status(s))
                }
                Err(e) => last = Some(e),
            }
        }
        Err(last.unwrap_or(TransportError::Timeout))
    }
}

pub struct LlmClient {
    transport: Box<dyn ChatTransport>,
    model: String,
}

impl LlmClient {
    pub fn new(transport: Box<dyn ChatTransport>, model: impl Into<String>) -> Self {
        LlmClient {
            transport,
            model: model.into(),
        }
    }

    pub fn from_config(config: &LlmClientConfig) -> Result<Self, TransportError> {
        Ok(LlmClient::new(Box::new(HttpTransport::new(config)?), config.model.clone()))
    }

    fn request(&self, system: &str, user: String) -> ChatRequest {
        ChatRequest {
            model: self.model.clone(),
            messages: vec![ChatMessage::system(system.trim_end()), ChatMessage::user(user)],
            temperature: 0.0,
        }
    }

    pub fn classification_request(&self, text: &str) -> ChatRequest {
        self.request(PARSE_SYSTEM_PROMPT, classification_prompt(text))
    }

    pub fn inquiry_request(&self, inquiry: &str, info: &GameInfoSnapshot) -> ChatRequest {
        self.request(INQUIRY_SYSTEM_PROMPT, inquiry_prompt(inquiry, info))
    }

    /// Raw model label for a message.
    pub fn llm_classify(&self, text: &str) -> Result<String, TransportError> {
        self.transport.complete(&self.classification_request(text))
    }

    /// Free-text answer to a partner question.
    pub fn llm_answer(&self, inquiry: &str, info: &GameInfoSnapshot) -> Result<String, TransportError> {
        self.transport.complete(&self.inquiry_request(inquiry, info))
    }
}

pub fn classification_prompt(text: &str) -> String {
    let examples: Vec<String> = FEW_SHOT
        .iter()
        .enumerate()
        .map(|(i, (msg, flag))| format!("({}) Message: \"{}\" Flag: {}", i + 1, msg, flag.label()))
        .collect();
    PARSE_USER_PROMPT
        .replace("{examples}", &examples.join("\n"))
        .replace("{message}", text)
        .trim_end()
        .to_string()
}

pub fn inquiry_prompt(inquiry: &str, info: &GameInfoSnapshot) -> String {
    let treasure_line = match info.treasure {
        Some(t) if info.treasure_visible => format!("Treasure position: {t}"),
        _ => "You cannot see the treasure position.".to_string(),
    };
    INQUIRY_USER_PROMPT
        .replace("{token_pos}", &info.token.to_string())
        .replace("{action}", info.action.as_str())
        .replace("{treasure_line}", &treasure_line)
        .replace("{message}", inquiry)
        .trim_end()
        .to_string()
}

/// Maps a model reply onto a flag: exact label first, then a unique label
/// mentioned as a word. Ambiguous or unknown replies give `None`.
pub fn map_label(reply: &str) -> Option<Flag> {
    let cleaned: String = reply
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() || c.is_whitespace() { c } else { ' ' })
        .collect();
    let cleaned = cleaned.split_whitespace().collect::<Vec<_>>().join(" ");
    if let Some(f) = Flag::from_label(&cleaned) {
        return Some(f);
    }
    let words: Vec<&str> = cleaned.split(' ').collect();
    let mut found: Vec<Flag> = Flag::ALL
        .into_iter()
        .filter(|f| words.iter().any(|w| f.label().eq_ignore_ascii_case(w)))
        .collect();
    found.dedup();
    match found.as_slice() {
        [one] => Some(*one),
        _ => None,
    }
}
