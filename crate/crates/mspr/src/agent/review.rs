//! Corrective answer reviewer.
//!
//! Reviews a candidate answer on effectiveness, completeness and correctness;
//! a failed review may trigger one supplemental web retrieval of the original
//! question, bounded by the supplemental-retrieval budget.

use super::strategy::judge_increment;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::llm::parse_binary_label;
use crate::llm::prompt::{car_review_request, review_reminder};
use crate::model::{
    AgentContext, AgentStep, AnswerReview, FinalAnswer, Observation, RetrievalAction, StepOrigin,
    TerminationReason,
};
use crate::services::RunSession;
use regex::Regex;
use std::sync::OnceLock;

fn dimension_re(name: &str) -> Regex {
    Regex::new(&format!(r"(?mi)^[ \t]*{name}[ \t]*:(.*)$")).expect("static regex")
}

fn rationale_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?si)rationale[ \t]*:(.*)$").expect("static regex"))
}

/// Parse the three labelled dimensions out of a review reply.
pub fn parse_review(text: &str) -> Result<AnswerReview> {
    let mut values = [false; 3];
    for (i, name) in ["effectiveness", "completeness", "correctness"]
        .iter()
        .enumerate()
    {
        let re = dimension_re(name);
        let captures = re.captures(text).ok_or_else(|| {
            Error::AgentOutputFormat(format!("review reply missing the {name} line"))
        })?;
        values[i] = parse_binary_label(captures.get(1).expect("capture").as_str())?;
    }
    let rationale = rationale_re()
        .captures(text)
        .map(|c| c.get(1).expect("capture").as_str().trim().to_string())
        .unwrap_or_default();
    Ok(AnswerReview::new(
        values[0], values[1], values[2], rationale,
    ))
}

/// Run the quality review. Unreadable replies are re-asked once and then
/// default to acceptance: rejecting on ambiguity would spend the irreversible
/// supplemental budget.
pub fn review_answer(
    answer: &str,
    context: &AgentContext,
    session: &RunSession,
) -> Result<AnswerReview> {
    let request = car_review_request(context, answer);
    let reply = session.complete(&request)?;
    match parse_review(&reply) {
        Ok(review) => Ok(review),
        Err(e) if e.is_format_error() => {
            let retry = request.with_reminder(&reply, review_reminder());
            let second = session.complete(&retry)?;
            match parse_review(&second) {
                Ok(review) => Ok(review),
                Err(e) if e.is_format_error() => {
                    log::warn!(
                        "query {}: review unreadable twice ({e}); accepting the answer",
                        session.query_id()
                    );
                    Ok(AnswerReview::new(
                        true,
                        true,
                        true,
                        "review reply was unreadable; accepted by default",
                    ))
                }
                Err(e) => Err(e),
            }
        }
        Err(e) => Err(e),
    }
}

/// Append one supplemental web step searching the original question verbatim.
///
/// The budget is spent even when the web call fails: the trigger was the
/// model's rejected answer, and retrying later would make budgets
/// load-dependent. A failed call adds no step, so the run continues with
/// unchanged knowledge.
pub fn supplemental_retrieval(
    context: &mut AgentContext,
    config: &RunConfig,
    session: &RunSession,
) -> Result<()> {
    debug_assert!(context.srt_used < config.srt);
    debug_assert!(context.steps.len() < config.awi);
    context.srt_used += 1;

    let question = context.query.text.clone();
    let passages = match session.search_web(&question) {
        Ok(passages) => passages,
        Err(e) => {
            log::warn!(
                "query {}: supplemental web retrieval failed ({e}); continuing without it",
                session.query_id()
            );
            return Ok(());
        }
    };
    let observation = Observation::from_passages(passages);
    let label = if config.prs_enabled {
        Some(judge_increment(&observation.passages, context, session)?)
    } else {
        None
    };
    let step = AgentStep::retrieval(
        context.next_t(),
        "answer review failed; supplementing from the web",
        RetrievalAction::SearchWeb,
        question,
        observation,
        label,
        StepOrigin::Supplemental,
    )?;
    context.push_step(step);
    Ok(())
}

/// Turn a reviewed answer into the final answer with its stop reason.
///
/// An answer forced by the exhausted step budget keeps that reason no matter
/// what the review said; otherwise a passing review stops the run cleanly and
/// a failing one reports whichever budget blocked further correction.
pub fn finalize(
    answer: String,
    review: &AnswerReview,
    context: &AgentContext,
    config: &RunConfig,
) -> Result<FinalAnswer> {
    let forced_by_awi = context
        .steps
        .last()
        .map(|s| s.action.is_retrieval())
        .unwrap_or(false)
        && context.steps.len() >= config.awi;
    let reason = if forced_by_awi {
        TerminationReason::AwiExhausted
    } else if review.quality_label {
        TerminationReason::ReviewPassed
    } else if context.srt_used >= config.srt {
        TerminationReason::SrtExhausted
    } else {
        TerminationReason::AwiExhausted
    };
    FinalAnswer::new(answer, reason)
}
