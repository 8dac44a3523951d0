//! Shared domain types for the whole engine.
//!
//! Everything here is an immutable value after construction and safe to
//! clone across evaluation workers.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A question to answer, with a dataset-unique id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub id: String,
    pub text: String,
}

impl Query {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Result<Self> {
        let query = Query {
            id: id.into(),
            text: text.into(),
        };
        query.validate()?;
        Ok(query)
    }

    pub fn validate(&self) -> Result<()> {
        if self.text.trim().is_empty() {
            return Err(Error::InvalidQuery(format!(
                "question text for id {:?} is empty",
                self.id
            )));
        }
        Ok(())
    }
}

/// The closed action space of the agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetrievalAction {
    SearchLocal,
    SearchWeb,
    #[serde(rename = "none")]
    NoneAction,
}

impl RetrievalAction {
    /// Parse a surface form emitted by the model. Bracket wrapping, case and
    /// internal whitespace are ignored; anything else is rejected.
    pub fn parse_surface(raw: &str) -> Result<Self> {
        let trimmed = raw.trim().trim_start_matches('[').trim_end_matches(']');
        let canon = trimmed
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ")
            .to_lowercase();
        match canon.as_str() {
            "search local" => Ok(RetrievalAction::SearchLocal),
            "search web" => Ok(RetrievalAction::SearchWeb),
            "none" => Ok(RetrievalAction::NoneAction),
            _ => Err(Error::AgentOutputFormat(format!(
                "unknown action name: {raw:?}"
            ))),
        }
    }

    pub fn is_retrieval(&self) -> bool {
        !matches!(self, RetrievalAction::NoneAction)
    }
}

impl fmt::Display for RetrievalAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            RetrievalAction::SearchLocal => "Search Local",
            RetrievalAction::SearchWeb => "Search Web",
            RetrievalAction::NoneAction => "None",
        };
        f.write_str(name)
    }
}

/// Which knowledge source a passage came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Local,
    Web,
}

/// One retrieved unit of text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Passage {
    pub doc_id: String,
    pub title: String,
    pub text: String,
    pub source: Source,
    pub score: f64,
    pub rank: usize,
}

/// Check that a retrieval result list is well formed: ranks run 1..=m and
/// scores never increase with rank.
pub fn check_result_list(passages: &[Passage]) -> Result<()> {
    for (i, p) in passages.iter().enumerate() {
        if p.rank != i + 1 {
            return Err(Error::Contract(format!(
                "passage at position {} has rank {}",
                i, p.rank
            )));
        }
        if !p.score.is_finite() {
            return Err(Error::Contract(format!(
                "passage {} has non-finite score",
                p.doc_id
            )));
        }
        if i > 0 && passages[i - 1].score < p.score {
            return Err(Error::Contract(format!(
                "scores increase between ranks {} and {}",
                i,
                i + 1
            )));
        }
    }
    Ok(())
}

/// What the agent observed after one retrieval action.
///
/// `refined_text`, when set, replaces the passages for context rendering;
/// the passages themselves always stay in the record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub passages: Vec<Passage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refined_text: Option<String>,
    pub char_len: usize,
}

impl Observation {
    pub fn from_passages(passages: Vec<Passage>) -> Self {
        let mut obs = Observation {
            passages,
            refined_text: None,
            char_len: 0,
        };
        obs.char_len = obs.rendered().chars().count();
        obs
    }

    /// The text that represents this observation in prompts: the refined
    /// digest when present, otherwise the passages themselves.
    pub fn rendered(&self) -> String {
        if let Some(refined) = &self.refined_text {
            return refined.clone();
        }
        render_passages(&self.passages)
    }

    /// Install a refined digest and update the active length.
    pub fn set_refined(&mut self, text: String) {
        self.refined_text = Some(text);
        self.char_len = self.rendered().chars().count();
    }
}

/// Deterministic text form of a passage list, shared by prompts and length
/// accounting.
pub fn render_passages(passages: &[Passage]) -> String {
    if passages.is_empty() {
        return "(no results)".to_string();
    }
    passages
        .iter()
        .map(|p| format!("[{}] {}: {}", p.rank, p.title, p.text))
        .collect::<Vec<_>>()
        .join("\n")
}

/// How a step's recorded action came to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StepOrigin {
    /// Taken exactly as the model proposed it.
    #[default]
    Model,
    /// Step-one proposal rewritten from web to local by the source preference.
    ForcedLocalFirst,
    /// Proposal rewritten from local to web by the adjustment-label rule.
    ForcedWebBySelector,
    /// Appended by the answer reviewer's supplemental retrieval.
    Supplemental,
}

/// One iteration of the agent loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentStep {
    pub t: usize,
    pub thought: String,
    pub action: RetrievalAction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_input: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observation: Option<Observation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjustment_label: Option<bool>,
    #[serde(default)]
    pub origin: StepOrigin,
}

impl AgentStep {
    /// A retrieval step. `action` must be one of the two search actions.
    pub fn retrieval(
        t: usize,
        thought: impl Into<String>,
        action: RetrievalAction,
        action_input: impl Into<String>,
        observation: Observation,
        adjustment_label: Option<bool>,
        origin: StepOrigin,
    ) -> Result<Self> {
        if !action.is_retrieval() {
            return Err(Error::Contract(
                "retrieval step constructed with the None action".into(),
            ));
        }
        Ok(AgentStep {
            t,
            thought: thought.into(),
            action,
            action_input: Some(action_input.into()),
            observation: Some(observation),
            adjustment_label,
            origin,
        })
    }

    /// The terminal step where the agent chose to answer.
    pub fn answer(t: usize, thought: impl Into<String>) -> Self {
        AgentStep {
            t,
            thought: thought.into(),
            action: RetrievalAction::NoneAction,
            action_input: None,
            observation: None,
            adjustment_label: None,
            origin: StepOrigin::Model,
        }
    }

    /// Structural invariants. `labels_required` asserts that every
    /// observation carries an adjustment label, which holds whenever the
    /// strategy selector is enabled.
    pub fn validate(&self, labels_required: bool) -> Result<()> {
        if self.t == 0 {
            return Err(Error::Contract("step index must be 1-based".into()));
        }
        let is_none = !self.action.is_retrieval();
        if is_none != self.action_input.is_none() || is_none != self.observation.is_none() {
            return Err(Error::Contract(format!(
                "step {}: action, input and observation presence disagree",
                self.t
            )));
        }
        if self.adjustment_label.is_some() && self.observation.is_none() {
            return Err(Error::Contract(format!(
                "step {}: adjustment label without observation",
                self.t
            )));
        }
        if labels_required && self.observation.is_some() && self.adjustment_label.is_none() {
            return Err(Error::Contract(format!(
                "step {}: observation without adjustment label",
                self.t
            )));
        }
        Ok(())
    }
}

/// The three-dimension answer quality verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerReview {
    pub effectiveness: bool,
    pub completeness: bool,
    pub correctness: bool,
    pub quality_label: bool,
    pub rationale: String,
}

impl AnswerReview {
    pub fn new(
        effectiveness: bool,
        completeness: bool,
        correctness: bool,
        rationale: impl Into<String>,
    ) -> Self {
        AnswerReview {
            effectiveness,
            completeness,
            correctness,
            quality_label: effectiveness && completeness && correctness,
            rationale: rationale.into(),
        }
    }
}

/// A recorded review of a candidate answer, kept in the run trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewEvent {
    /// Number of steps that existed when the review ran.
    pub at_step: usize,
    pub answer: String,
    pub review: AnswerReview,
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    /// The agent chose to answer and no reviewer was active.
    AgentNone,
    AwiExhausted,
    SrtExhausted,
    ReviewPassed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalAnswer {
    pub text: String,
    pub terminated_by: TerminationReason,
}

impl FinalAnswer {
    pub fn new(text: impl Into<String>, terminated_by: TerminationReason) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::InvalidAnswer("final answer text is empty".into()));
        }
        Ok(FinalAnswer {
            text,
            terminated_by,
        })
    }
}

/// The evolving state of one run: the question plus the ordered step history,
/// the supplemental-retrieval count and every recorded answer review.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentContext {
    pub query: Query,
    pub steps: Vec<AgentStep>,
    pub srt_used: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reviews: Vec<ReviewEvent>,
}

impl AgentContext {
    pub fn new(query: Query) -> Self {
        AgentContext {
            query,
            steps: Vec::new(),
            srt_used: 0,
            reviews: Vec::new(),
        }
    }

    /// Index the next pushed step will get.
    pub fn next_t(&self) -> usize {
        self.steps.len() + 1
    }

    pub fn push_step(&mut self, step: AgentStep) {
        debug_assert_eq!(step.t, self.next_t());
        self.steps.push(step);
    }

    pub fn record_review(&mut self, answer: impl Into<String>, review: AnswerReview) {
        self.reviews.push(ReviewEvent {
            at_step: self.steps.len(),
            answer: answer.into(),
            review,
        });
    }

    /// Text rendering of the step history for prompts. Refined observations
    /// render as their digest, everything else verbatim.
    pub fn rendered_history(&self) -> String {
        let mut out = String::new();
        for step in &self.steps {
            out.push_str(&format!("Thought: {}\n", step.thought));
            out.push_str(&format!("Action: [{}]\n", step.action));
            if let Some(input) = &step.action_input {
                out.push_str(&format!("Action Input: {input}\n"));
            }
            if let Some(obs) = &step.observation {
                out.push_str(&format!("Observation: {}\n", obs.rendered()));
            }
        }
        out
    }

    /// Check every structural invariant against the given budgets.
    pub fn validate(&self, awi: usize, srt: usize, labels_required: bool) -> Result<()> {
        self.query.validate()?;
        if self.steps.len() > awi {
            return Err(Error::Contract(format!(
                "{} steps exceed the workflow budget of {awi}",
                self.steps.len()
            )));
        }
        if self.srt_used > srt {
            return Err(Error::Contract(format!(
                "{} supplemental retrievals exceed the budget of {srt}",
                self.srt_used
            )));
        }
        for (i, step) in self.steps.iter().enumerate() {
            if step.t != i + 1 {
                return Err(Error::Contract(format!(
                    "step at position {} carries index {}",
                    i, step.t
                )));
            }
            step.validate(labels_required)?;
        }
        for event in &self.reviews {
            if event.at_step > self.steps.len() {
                return Err(Error::Contract(format!(
                    "review recorded at step {} but only {} steps exist",
                    event.at_step,
                    self.steps.len()
                )));
            }
        }
        Ok(())
    }
}
