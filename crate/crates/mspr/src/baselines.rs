//! Reference systems for controlled comparison: direct answering with no
//! retrieval, one-shot retrieve-and-read over either or both sources, and the
//! unconstrained two-tool agent loop.

use crate::agent::{run_loop, LoopFeatures, RunOutcome};
use crate::config::RunConfig;
use crate::error::Result;
use crate::llm::prompt::{nor_request, vanilla_request};
use crate::model::{FinalAnswer, Passage, Query, TerminationReason};
use crate::services::RunSession;

/// Which sources a one-shot retrieval run consults.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VanillaSources {
    Local,
    Web,
    LocalAndWeb,
}

impl VanillaSources {
    fn uses_local(&self) -> bool {
        matches!(self, VanillaSources::Local | VanillaSources::LocalAndWeb)
    }

    fn uses_web(&self) -> bool {
        matches!(self, VanillaSources::Web | VanillaSources::LocalAndWeb)
    }
}

/// Feed the question straight to the model: no retrieval, one call.
pub fn run_nor(query: &Query, session: &RunSession) -> Result<FinalAnswer> {
    query.validate()?;
    let reply = session.complete(&nor_request(query))?;
    FinalAnswer::new(reply.trim(), TerminationReason::AgentNone)
}

/// One-shot retrieval per listed source (local before web), then one
/// generation call over the concatenated passages.
pub fn run_vanilla(
    query: &Query,
    sources: VanillaSources,
    session: &RunSession,
) -> Result<FinalAnswer> {
    query.validate()?;
    let local: Option<Vec<Passage>> = if sources.uses_local() {
        Some(session.search_local(&query.text)?)
    } else {
        None
    };
    let web: Option<Vec<Passage>> = if sources.uses_web() {
        Some(session.search_web(&query.text)?)
    } else {
        None
    };
    let request = vanilla_request(query, local.as_deref(), web.as_deref());
    let reply = session.complete(&request)?;
    FinalAnswer::new(reply.trim(), TerminationReason::AgentNone)
}

/// The plain two-tool agent loop: no source preference, no adjustment
/// labels, no answer review. Stops when the model answers or the step budget
/// runs out.
pub fn run_react_ms(query: &Query, config: &RunConfig, session: &RunSession) -> Result<RunOutcome> {
    run_loop(query, config, session, LoopFeatures::unconstrained())
}
