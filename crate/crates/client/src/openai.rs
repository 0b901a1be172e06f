//! Chat backend for any service speaking the OpenAI chat-completions protocol.

use std::time::Duration;

use maps_core::agents::react::{ChatBackend, ChatMessage, Completion};
use maps_core::agents::{PolicyError, Usage};
use reqwest::blocking::Client;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct OpenAiConfig {
    /// Base URL up to and including the version segment, e.g. `https://host/v1`.
    pub base_url: String,
    pub model: String,
    pub api_key: Option<String>,
    pub temperature: f64,
    pub max_tokens: Option<u32>,
    pub timeout: Duration,
}

impl OpenAiConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> OpenAiConfig {
        OpenAiConfig {
            base_url: base_url.into(),
            model: model.into(),
            api_key: None,
            temperature: 0.0,
            max_tokens: None,
            timeout: Duration::from_secs(300),
        }
    }
}

#[derive(Serialize)]
struct Request<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_tokens: Option<u32>,
}

#[derive(Deserialize)]
struct Response {
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<ResponseUsage>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct ResponseUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

#[derive(Clone)]
pub struct OpenAiBackend {
    config: OpenAiConfig,
    http: Client,
}

impl OpenAiBackend {
    pub fn new(config: OpenAiConfig) -> Result<OpenAiBackend, PolicyError> {
        let http = Client::builder().timeout(config.timeout).build().map_err(|e| PolicyError::Transport(e.to_string()))?;
        Ok(OpenAiBackend { config, http })
    }
}

impl ChatBackend for OpenAiBackend {
    fn complete(&mut self, messages: &[ChatMessage]) -> Result<Completion, PolicyError> {
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let body = Request {
            model: &self.config.model,
            messages,
            temperature: self.config.temperature,
            max_tokens: self.config.max_tokens,
        };
        let mut req = self.http.post(url).json(&body);
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let res = req.send().map_err(|e| PolicyError::Transport(e.to_string()))?;
        let status = res.status();
        let text = res.text().map_err(|e| PolicyError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(PolicyError::Transport(format!("chat service returned {status}: {text}")));
        }
        let parsed: Response =
            serde_json::from_str(&text).map_err(|e| PolicyError::Transport(format!("unreadable completion: {e}")))?;
        let content = parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| PolicyError::Transport("completion has no message content".into()))?;
        let usage = parsed.usage.map_or(Usage::default(), |u| Usage {
            calls: 0,
            prompt_tokens: u.prompt_tokens,
            completion_tokens: u.completion_tokens,
        });
        Ok(Completion { text: content, usage })
    }

    fn clone_box(&self) -> Box<dyn ChatBackend> {
        Box::new(self.clone())
    }
}
