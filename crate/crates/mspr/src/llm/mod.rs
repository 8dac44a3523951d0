//! Uniform model-call contract: one request shape, one backend trait, and
//! deterministic scripted/cached backends alongside the live HTTP client.

mod cache;
mod http;
mod parse;
pub mod prompt;
mod script;

pub use cache::CachedBackend;
pub use http::{OpenAiCompatBackend, ENV_API_KEY, ENV_BASE_URL};
pub use parse::{parse_agent_output, parse_binary_label, ParsedAgentOutput};
pub use script::{Script, ScriptEntry, ScriptedBackend};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Which engine stage a request belongs to. Keys scripted responses and
/// labels transport errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageTag {
    ReasonAct,
    Refine,
    PrsLabel,
    CarReview,
    FinalAnswer,
    Vanilla,
    Nor,
}

impl StageTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            StageTag::ReasonAct => "reason_act",
            StageTag::Refine => "refine",
            StageTag::PrsLabel => "prs_label",
            StageTag::CarReview => "car_review",
            StageTag::FinalAnswer => "final_answer",
            StageTag::Vanilla => "vanilla",
            StageTag::Nor => "nor",
        }
    }
}

impl fmt::Display for StageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

/// One model call. `query_id` ties the call to the run that issued it so the
/// scripted backend can serve per-query scripts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub query_id: String,
    pub stage: StageTag,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_output: u32,
}

impl ChatRequest {
    /// System + user pair at temperature zero, the shape every stage uses.
    pub fn new(
        query_id: impl Into<String>,
        stage: StageTag,
        system: impl Into<String>,
        user: impl Into<String>,
    ) -> Self {
        ChatRequest {
            query_id: query_id.into(),
            stage,
            messages: vec![ChatMessage::system(system), ChatMessage::user(user)],
            temperature: 0.0,
            max_output: 1024,
        }
    }

    /// The same request with a failed reply echoed back and a corrective
    /// reminder appended.
    pub fn with_reminder(&self, previous_reply: &str, reminder: &str) -> Self {
        let mut retry = self.clone();
        retry.messages.push(ChatMessage::assistant(previous_reply));
        retry.messages.push(ChatMessage::user(reminder));
        retry
    }

    pub fn validate(&self) -> Result<()> {
        if self.messages.is_empty() {
            return Err(Error::Contract("chat request has no messages".into()));
        }
        if self.messages[0].role != Role::System {
            return Err(Error::Contract(
                "chat request must start with a system message".into(),
            ));
        }
        if self.temperature < 0.0 {
            return Err(Error::Contract("temperature must be non-negative".into()));
        }
        Ok(())
    }
}

/// A completion provider. Implementations must be shareable across workers.
pub trait LlmBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String>;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_shape_is_validated() {
        let req = ChatRequest::new("q1", StageTag::Nor, "sys", "user");
        assert!(req.validate().is_ok());

        let mut no_system = req.clone();
        no_system.messages[0].role = Role::User;
        assert!(no_system.validate().is_err());

        let mut negative = req.clone();
        negative.temperature = -1.0;
        assert!(negative.validate().is_err());
    }

    #[test]
    fn reminder_appends_assistant_then_user() {
        let req = ChatRequest::new("q1", StageTag::ReasonAct, "sys", "user");
        let retry = req.with_reminder("bad output", "please follow the format");
        assert_eq!(retry.messages.len(), 4);
        assert_eq!(retry.messages[2].role, Role::Assistant);
        assert_eq!(retry.messages[3].role, Role::User);
        assert!(retry.validate().is_ok());
    }
}
