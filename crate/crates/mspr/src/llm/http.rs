//! Live backend speaking the OpenAI-compatible chat completion contract.

use super::{ChatRequest, LlmBackend, Role};
use crate::error::{Error, Result};
use serde::Deserialize;
use serde_json::json;
use std::time::Duration;

pub const ENV_API_KEY: &str = "LLM_API_KEY";
pub const ENV_BASE_URL: &str = "LLM_BASE_URL";
const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";

pub struct OpenAiCompatBackend {
    http: reqwest::blocking::Client,
    base_url: String,
    api_key: Option<String>,
    model: String,
}

#[derive(Deserialize)]
struct ChatCompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: Option<String>,
}

impl OpenAiCompatBackend {
    pub fn new(
        base_url: impl Into<String>,
        api_key: Option<String>,
        model: impl Into<String>,
    ) -> Self {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .expect("reqwest client");
        OpenAiCompatBackend {
            http,
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key,
            model: model.into(),
        }
    }

    /// Endpoint and key from `LLM_BASE_URL` / `LLM_API_KEY`.
    pub fn from_env(model: impl Into<String>) -> Self {
        let base_url = std::env::var(ENV_BASE_URL).unwrap_or_else(|_| DEFAULT_BASE_URL.to_string());
        let api_key = std::env::var(ENV_API_KEY).ok();
        Self::new(base_url, api_key, model)
    }

    fn role_name(role: &Role) -> &'static str {
        match role {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

impl LlmBackend for OpenAiCompatBackend {
    fn complete(&self, request: &ChatRequest) -> Result<String> {
        request.validate()?;
        let messages: Vec<_> = request
            .messages
            .iter()
            .map(|m| json!({"role": Self::role_name(&m.role), "content": m.content}))
            .collect();
        let body = json!({
            "model": self.model,
            "messages": messages,
            "temperature": request.temperature,
            "max_tokens": request.max_output,
        });

        let mut builder = self
            .http
            .post(format!("{}/chat/completions", self.base_url))
            .json(&body);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }

        let response = builder.send().map_err(|e| Error::LlmTransport {
            stage: request.stage,
            message: e.to_string(),
        })?;
        let status = response.status();
        if !status.is_success() {
            let detail = response.text().unwrap_or_default();
            return Err(Error::LlmTransport {
                stage: request.stage,
                message: format!("{status}: {}", detail.chars().take(300).collect::<String>()),
            });
        }
        let parsed: ChatCompletionResponse = response.json().map_err(|e| Error::LlmTransport {
            stage: request.stage,
            message: format!("unreadable response body: {e}"),
        })?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| Error::LlmTransport {
                stage: request.stage,
                message: "response carried no content".into(),
            })
    }
}
