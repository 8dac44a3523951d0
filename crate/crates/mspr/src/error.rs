//! Crate-wide error type.

use crate::llm::StageTag;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("duplicate document id: {0}")]
    DuplicateDocId(String),

    #[error("corpus ingestion failed: {0}")]
    Ingest(String),

    #[error("query tokenized to nothing")]
    EmptyQuery,

    #[error("snapshot format mismatch: {0}")]
    SnapshotFormat(String),

    #[error("web search failed{}: {message}", status.map(|s| format!(" (status {s})")).unwrap_or_default())]
    WebTransport {
        status: Option<u16>,
        message: String,
    },

    #[error("web replay miss for query {query:?} (top_k {top_k})")]
    ReplayMiss { query: String, top_k: usize },

    #[error("model call failed during {stage}: {message}")]
    LlmTransport { stage: StageTag, message: String },

    #[error("model call budget of {limit} exhausted")]
    BudgetExceeded { limit: u64 },

    #[error("no scripted response for query {query_id:?}, stage {stage}, occurrence {occurrence}")]
    ScriptMiss {
        query_id: String,
        stage: StageTag,
        occurrence: u32,
    },

    #[error("unparseable agent output: {0}")]
    AgentOutputFormat(String),

    #[error("no True/False label in model output: {0:?}")]
    LabelFormat(String),

    #[error("invalid answer: {0}")]
    InvalidAnswer(String),

    #[error("malformed trace record: {0}")]
    TraceFormat(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("prediction id not in dataset: {0}")]
    UnknownPredictionId(String),

    #[error("nothing to aggregate: no results")]
    EmptyResults,

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("step {t}: {source}")]
    Step {
        t: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wrap an error with the agent step index it occurred at.
    pub fn at_step(self, t: usize) -> Error {
        Error::Step {
            t,
            source: Box::new(self),
        }
    }

    /// True for the parse failures that trigger a single re-ask of the model.
    pub fn is_format_error(&self) -> bool {
        matches!(self, Error::AgentOutputFormat(_) | Error::LabelFormat(_))
    }
}
