//! Parsers for structured model output: the Thought/Action block grammar and
//! bare True/False labels. Both are total over arbitrary input.

use crate::error::{Error, Result};
use crate::model::RetrievalAction;
use regex::Regex;
use std::sync::OnceLock;

/// The model's proposal for one step: either a retrieval with its query, or
/// the None action with a final answer.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedAgentOutput {
    pub thought: String,
    pub action: RetrievalAction,
    pub action_input: Option<String>,
    pub final_answer: Option<String>,
}

impl ParsedAgentOutput {
    pub fn retrieval(
        thought: impl Into<String>,
        action: RetrievalAction,
        input: impl Into<String>,
    ) -> Self {
        ParsedAgentOutput {
            thought: thought.into(),
            action,
            action_input: Some(input.into()),
            final_answer: None,
        }
    }

    pub fn answer(thought: impl Into<String>, final_answer: impl Into<String>) -> Self {
        ParsedAgentOutput {
            thought: thought.into(),
            action: RetrievalAction::NoneAction,
            action_input: None,
            final_answer: Some(final_answer.into()),
        }
    }
}

fn action_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?mi)^[ \t]*action[ \t]*:(.*)$").expect("static regex"))
}

fn thought_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?mi)^[ \t]*thought[ \t]*:").expect("static regex"))
}

fn input_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?mi)^[ \t]*action[ \t]+input[ \t]*:(.*)$").expect("static regex")
    })
}

fn answer_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?mi)^[ \t]*final[ \t]+answer[ \t]*:").expect("static regex"))
}

/// Extract the last well-formed Thought/Action block from model output.
///
/// Action names match the three canonical forms case-insensitively after
/// bracket trimming; anything else is a loud parse error.
pub fn parse_agent_output(text: &str) -> Result<ParsedAgentOutput> {
    let action_match = action_re()
        .captures_iter(text)
        .last()
        .ok_or_else(|| Error::AgentOutputFormat("no Action line found".into()))?;
    let action_line = action_match.get(0).expect("whole match");
    let action_name = action_match.get(1).expect("capture").as_str();
    let action = RetrievalAction::parse_surface(action_name)?;

    let thought = thought_re()
        .find_iter(&text[..action_line.start()])
        .last()
        .map(|m| text[m.end()..action_line.start()].trim().to_string())
        .unwrap_or_default();

    let tail = &text[action_line.end()..];
    match action {
        RetrievalAction::NoneAction => {
            let answer_label = answer_re().find(tail).ok_or_else(|| {
                Error::AgentOutputFormat("None action without a Final Answer line".into())
            })?;
            let answer = tail[answer_label.end()..].trim();
            if answer.is_empty() {
                return Err(Error::AgentOutputFormat("empty final answer".into()));
            }
            Ok(ParsedAgentOutput::answer(thought, answer))
        }
        retrieval => {
            let input_match = input_re().captures(tail).ok_or_else(|| {
                Error::AgentOutputFormat("retrieval action without an Action Input line".into())
            })?;
            let input = input_match.get(1).expect("capture").as_str().trim();
            if input.is_empty() {
                return Err(Error::AgentOutputFormat("empty action input".into()));
            }
            Ok(ParsedAgentOutput::retrieval(thought, retrieval, input))
        }
    }
}

/// First standalone, case-insensitive `true`/`false` token wins.
pub fn parse_binary_label(text: &str) -> Result<bool> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"(?i)\b(true|false)\b").expect("static regex"));
    match re.find(text) {
        Some(m) => Ok(m.as_str().eq_ignore_ascii_case("true")),
        None => Err(Error::LabelFormat(truncate_for_error(text))),
    }
}

fn truncate_for_error(text: &str) -> String {
    let mut s: String = text.chars().take(80).collect();
    if s.len() < text.len() {
        s.push_str("...");
    }
    s
}
