//! MSPR: a multi-source adaptive retrieval-augmented generation engine.
//!
//! The engine answers questions by iterating reasoning, retrieval-action
//! selection and observation over two knowledge sources: a curated local
//! corpus served by an in-process BM25 index, and a web search client. A
//! preference-driven strategy selector keeps exploration anchored on the
//! local source and switches to the web when local retrieval stops adding
//! information; a corrective answer reviewer gates candidate answers and can
//! trigger one round of supplemental web retrieval. Oversized observations
//! are condensed one step later so the newest evidence is never summarized
//! away.
//!
//! Scripted model and replayed web backends make entire runs deterministic
//! and network-free, which is how the test suite exercises the engine end to
//! end. Baselines (no retrieval, one-shot retrieval, the unconstrained
//! two-tool agent) and an EM/F1 evaluation harness round out the crate.

pub mod agent;
pub mod baselines;
pub mod config;
pub mod error;
pub mod eval;
pub mod index;
pub mod llm;
pub mod model;
pub mod services;
pub mod trace;
pub mod web;

pub use config::{LlmBackendKind, Method, RunConfig, WebBackendKind};
pub use error::{Error, Result};
pub use model::{
    AgentContext, AgentStep, AnswerReview, FinalAnswer, Observation, Passage, Query,
    RetrievalAction, ReviewEvent, Source, StepOrigin, TerminationReason,
};
pub use services::{CallStats, RunSession, Services};
