//! Model client contract: one HTTP implementation for chat-completion style
//! endpoints and one deterministic stub driven by a fixture map.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("transport failure: {0}")]
    Transport(String),
}

/// One completion request: model name, system text, user text, temperature.
/// `tag` is a correlation id consumed by the stub and ignored over HTTP.
#[derive(Debug, Clone)]
pub struct LlmRequest<'a> {
    pub model: &'a str,
    pub system: &'a str,
    pub user: &'a str,
    pub temperature: f64,
    pub tag: Option<&'a str>,
}

/// Transport retry schedule: `retries` re-attempts with exponential backoff.
#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub retries: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            retries: 3,
            base_delay: Duration::from_millis(250),
        }
    }
}

impl RetryPolicy {
    /// No waiting; used by tests.
    pub fn immediate(retries: u32) -> Self {
        RetryPolicy {
            retries,
            base_delay: Duration::ZERO,
        }
    }
}

pub trait LlmClient {
    fn complete(&self, req: &LlmRequest) -> Result<String, TransportError>;

    fn complete_with_retries(
        &self,
        req: &LlmRequest,
        policy: &RetryPolicy,
    ) -> Result<String, TransportError> {
        let mut attempt = 0u32;
        loop {
            match self.complete(req) {
                Ok(reply) => return Ok(reply),
                Err(e) if attempt >= policy.retries => return Err(e),
                Err(_) => {
                    if !policy.base_delay.is_zero() {
                        std::thread::sleep(policy.base_delay * 2u32.pow(attempt));
                    }
                    attempt += 1;
                }
            }
        }
    }
}

/// Deterministic stub reading replies from a fixture map keyed by request
/// tag. A `"*"` entry serves as the fallback reply; with no fallback, unknown
/// tags are transport failures.
#[derive(Debug, Default, Serialize, Deserialize)]
pub struct StubClient {
    pub replies: BTreeMap<String, String>,
}

impl StubClient {
    pub fn new(replies: BTreeMap<String, String>) -> Self {
        StubClient { replies }
    }

    pub fn from_file(path: &Path) -> Result<Self, TransportError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TransportError::Transport(format!("{}: {e}", path.display())))?;
        let replies = serde_json::from_str(&text)
            .map_err(|e| TransportError::Transport(format!("{}: {e}", path.display())))?;
        Ok(StubClient { replies })
    }
}

impl LlmClient for StubClient {
    fn complete(&self, req: &LlmRequest) -> Result<String, TransportError> {
        let tag = req.tag.unwrap_or_default();
        self.replies
            .get(tag)
            .or_else(|| self.replies.get("*"))
            .cloned()
            .ok_or_else(|| TransportError::Transport(format!("no scripted reply for {tag:?}")))
    }
}

/// Environment variable holding the API key for the HTTP client.
pub const API_KEY_ENV: &str = "VULNCURATE_API_KEY";

/// Chat-completions HTTP client. The key is read from [`API_KEY_ENV`]; the
/// endpoint is the API base, e.g. `https://api.openai.com/v1`.
pub struct HttpClient {
    api_base: String,
    agent: reqwest::blocking::Client,
}

impl HttpClient {
    pub fn new(api_base: impl Into<String>) -> Self {
        HttpClient {
            api_base: api_base.into(),
            agent: reqwest::blocking::Client::new(),
        }
    }
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    temperature: f64,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatReplyMessage,
}

#[derive(Deserialize)]
struct ChatReplyMessage {
    content: String,
}

impl LlmClient for HttpClient {
    fn complete(&self, req: &LlmRequest) -> Result<String, TransportError> {
        let key = std::env::var(API_KEY_ENV)
            .map_err(|_| TransportError::Transport(format!("{API_KEY_ENV} is not set")))?;
        let body = ChatRequest {
            model: req.model,
            messages: vec![
                ChatMessage {
                    role: "system",
                    content: req.system,
                },
                ChatMessage {
                    role: "user",
                    content: req.user,
                },
            ],
            temperature: req.temperature,
        };
        let url = format!("{}/chat/completions", self.api_base.trim_end_matches('/'));
        let response = self
            .agent
            .post(&url)
            .bearer_auth(key)
            .json(&body)
            .send()
            .map_err(|e| TransportError::Transport(e.to_string()))?;
        if !response.status().is_success() {
            return Err(TransportError::Transport(format!(
                "{url} returned {}",
                response.status()
            )));
        }
        let parsed: ChatResponse = response
            .json()
            .map_err(|e| TransportError::Transport(e.to_string()))?;
        parsed
            .choices
            .first()
            .map(|c| c.message.content.clone())
            .ok_or_else(|| TransportError::Transport("empty choices".to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    #[test]
    fn stub_replies_by_tag_with_fallback() {
        let mut replies = BTreeMap::new();
        replies.insert("p1".to_string(), "ANSWER: 1".to_string());
        replies.insert("*".to_string(), "ANSWER: 4".to_string());
        let stub = StubClient::new(replies);
        let req = |tag| LlmRequest {
            model: "m",
            system: "s",
            user: "u",
            temperature: 0.0,
            tag: Some(tag),
        };
        assert_eq!(stub.complete(&req("p1")).unwrap(), "ANSWER: 1");
        assert_eq!(stub.complete(&req("p2")).unwrap(), "ANSWER: 4");
    }

    #[test]
    fn retries_exhaust_then_fail() {
        struct Flaky {
            calls: Cell<u32>,
            succeed_on: u32,
        }
        impl LlmClient for Flaky {
            fn complete(&self, _: &LlmRequest) -> Result<String, TransportError> {
                let n = self.calls.get() + 1;
                self.calls.set(n);
                if n >= self.succeed_on {
                    Ok("ok".to_string())
                } else {
                    Err(TransportError::Transport("down".to_string()))
                }
            }
        }
        let req = LlmRequest {
            model: "m",
            system: "s",
            user: "u",
            temperature: 0.0,
            tag: None,
        };
        let flaky = Flaky {
            calls: Cell::new(0),
            succeed_on: 3,
        };
        assert!(flaky
            .complete_with_retries(&req, &RetryPolicy::immediate(3))
            .is_ok());
        assert_eq!(flaky.calls.get(), 3);

        let hopeless = Flaky {
            calls: Cell::new(0),
            succeed_on: 10,
        };
        assert!(hopeless
            .complete_with_retries(&req, &RetryPolicy::immediate(3))
            .is_err());
        assert_eq!(hopeless.calls.get(), 4);
    }
}
