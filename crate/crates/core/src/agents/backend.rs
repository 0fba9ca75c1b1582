//! Chat backends: a chat-completions HTTP client, a scripted replay for
//! offline runs, and a backend that always fails.

use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable holding the API key for the HTTP backend.
pub const API_KEY_ENV: &str = "WINDCOMMIT_API_KEY";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BackendError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("HTTP {code}: {body}")]
    Status { code: u16, body: String },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("backend unavailable: {0}")]
    Unavailable(String),
}

/// A chat model that answers a conversation with one reply.
pub trait ChatBackend {
    fn send(&mut self, messages: &[ChatMessage]) -> Result<String, BackendError>;
}

/// HTTP backend settings. The API key is never part of the configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    /// Base URL; requests go to `{base_url}/chat/completions`.
    pub base_url: String,
    pub model: String,
    pub temperature: f64,
    /// Per-request timeout in seconds.
    pub timeout_secs: f64,
    /// Extra attempts after a transport error, 429 or 5xx.
    pub max_retries: usize,
    /// First backoff delay in milliseconds, doubled after each retry.
    pub retry_backoff_ms: u64,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            base_url: "https://api.openai.com/v1".into(),
            model: "gpt-4".into(),
            temperature: 0.7,
            timeout_secs: 60.0,
            max_retries: 2,
            retry_backoff_ms: 500,
        }
    }
}

/// Chat-completions client. One request in flight at a time.
pub struct HttpChatBackend {
    config: BackendConfig,
    api_key: String,
    seed: Option<u64>,
    agent: ureq::Agent,
}

impl HttpChatBackend {
    /// Reads the key from [`API_KEY_ENV`].
    pub fn from_env(config: BackendConfig, seed: Option<u64>) -> Result<Self> {
        match std::env::var(API_KEY_ENV) {
            Ok(key) if !key.trim().is_empty() => Ok(Self::with_key(config, key.trim().to_string(), seed)),
            _ => Err(Error::Credentials(format!(
                "set {API_KEY_ENV} to use the live chat backend, or pass --mock-script"
            ))),
        }
    }

    pub fn with_key(config: BackendConfig, api_key: String, seed: Option<u64>) -> Self {
        let timeout = Duration::from_secs_f64(config.timeout_secs.max(0.001));
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self { config, api_key, seed, agent }
    }

    fn attempt(&self, body: &serde_json::Value) -> Result<String, BackendError> {
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let mut response = self
            .agent
            .post(&url)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(body)
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let code = response.status().as_u16();
        if !(200..300).contains(&code) {
            let body = response.body_mut().read_to_string().unwrap_or_default();
            return Err(BackendError::Status { code, body });
        }
        let value: serde_json::Value =
            response.body_mut().read_json().map_err(|e| BackendError::Malformed(e.to_string()))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| BackendError::Malformed("no choices[0].message.content".into()))
    }
}

fn retryable(e: &BackendError) -> bool {
    match e {
        BackendError::Transport(_) => true,
        BackendError::Status { code, .. } => *code == 429 || *code >= 500,
        _ => false,
    }
}

impl ChatBackend for HttpChatBackend {
    fn send(&mut self, messages: &[ChatMessage]) -> Result<String, BackendError> {
        let mut body = serde_json::json!({
            "model": self.config.model,
            "messages": messages,
            "temperature": self.config.temperature,
        });
        if let Some(seed) = self.seed {
            body["seed"] = seed.into();
        }
        let mut delay = Duration::from_millis(self.config.retry_backoff_ms);
        let mut tries = 0;
        loop {
            match self.attempt(&body) {
                Err(e) if retryable(&e) && tries < self.config.max_retries => {
                    tries += 1;
                    std::thread::sleep(delay);
                    delay *= 2;
                }
                other => return other,
            }
        }
    }
}

/// Replays fixed replies in order and repeats the last one once exhausted.
#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    replies: Vec<String>,
    next: usize,
}

impl ScriptedBackend {
    pub fn new(replies: Vec<String>) -> Result<Self> {
        if replies.is_empty() {
            return Err(Error::config("mock_script", "script contains no replies"));
        }
        Ok(Self { replies, next: 0 })
    }

    /// Replies separated by lines consisting of `---`.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut replies = Vec::new();
        let mut current = String::new();
        for line in text.lines() {
            if line.trim() == "---" {
                replies.push(std::mem::take(&mut current));
            } else {
                current.push_str(line);
                current.push('\n');
            }
        }
        replies.push(current);
        let replies = replies
            .into_iter()
            .map(|r| r.trim().to_string())
            .filter(|r| !r.is_empty())
            .collect();
        Self::new(replies)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    pub fn replies(&self) -> &[String] {
        &self.replies
    }

    /// Number of replies served so far.
    pub fn calls(&self) -> usize {
        self.next
    }
}

impl ChatBackend for ScriptedBackend {
    fn send(&mut self, _messages: &[ChatMessage]) -> Result<String, BackendError> {
        let reply = self.replies[self.next.min(self.replies.len() - 1)].clone();
        self.next += 1;
        Ok(reply)
    }
}

/// Fails every request.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullBackend;

impl ChatBackend for NullBackend {
    fn send(&mut self, _messages: &[ChatMessage]) -> Result<String, BackendError> {
        Err(BackendError::Unavailable("no chat backend configured".into()))
    }
}
