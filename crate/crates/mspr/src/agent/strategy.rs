//! Preference-driven retrieval strategy selector.
//!
//! After every retrieval the selector judges whether the newest passages add
//! question-advancing information (the adjustment label). A `false` label on
//! a local search constrains the next retrieval to the web source; nothing
//! ever forces a switch back to local.

use crate::error::{Error, Result};
use crate::llm::prompt::{label_reminder, prs_label_request};
use crate::llm::{parse_binary_label, ParsedAgentOutput};
use crate::model::{AgentContext, Passage, RetrievalAction};
use crate::services::RunSession;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NextActionConstraint {
    /// The next retrieval, if any, must use the web source.
    MustBeWeb,
    #[default]
    Unconstrained,
}

/// Ask the model for the adjustment label. A malformed reply is re-asked
/// once; if it is still unreadable the label defaults to `true`, which keeps
/// the agent on its current source instead of forcing a switch.
pub fn judge_increment(
    new_passages: &[Passage],
    context: &AgentContext,
    session: &RunSession,
) -> Result<bool> {
    let request = prs_label_request(context, new_passages);
    let reply = session.complete(&request)?;
    match parse_binary_label(&reply) {
        Ok(label) => Ok(label),
        Err(_) => {
            let retry = request.with_reminder(&reply, label_reminder());
            let second = session.complete(&retry)?;
            match parse_binary_label(&second) {
                Ok(label) => Ok(label),
                Err(e) => {
                    log::warn!(
                        "query {}: adjustment label unreadable twice ({e}); defaulting to true",
                        session.query_id()
                    );
                    Ok(true)
                }
            }
        }
    }
}

/// The switching rule: a local search that added nothing forces the next
/// retrieval to the web. Every other combination leaves the agent free.
pub fn next_constraint(current: RetrievalAction, label: bool) -> Result<NextActionConstraint> {
    match current {
        RetrievalAction::NoneAction => Err(Error::Contract(
            "the switching rule applies only after a retrieval action".into(),
        )),
        RetrievalAction::SearchLocal if !label => Ok(NextActionConstraint::MustBeWeb),
        _ => Ok(NextActionConstraint::Unconstrained),
    }
}

/// Enforce a constraint on the model's next proposal. Only a local-search
/// proposal under `MustBeWeb` is rewritten; answering is always permitted.
/// Returns the (possibly rewritten) proposal and whether a rewrite happened.
pub fn apply_constraint(
    constraint: NextActionConstraint,
    mut parsed: ParsedAgentOutput,
) -> (ParsedAgentOutput, bool) {
    if constraint == NextActionConstraint::MustBeWeb
        && parsed.action == RetrievalAction::SearchLocal
    {
        parsed.action = RetrievalAction::SearchWeb;
        return (parsed, true);
    }
    (parsed, false)
}
