//! The adaptive reasoning-and-retrieval loop.
//!
//! Each iteration reasons over the accumulated context, picks an action,
//! executes the retrieval and records the observation. The strategy selector
//! labels every observation and can force the next retrieval to the web; the
//! answer reviewer gates every candidate answer and may spend the
//! supplemental-retrieval budget. Oversized observations from the previous
//! step are condensed before the next proposal, never the current one.

mod review;
mod strategy;

pub use review::{finalize, parse_review, review_answer, supplemental_retrieval};
pub use strategy::{apply_constraint, judge_increment, next_constraint, NextActionConstraint};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::llm::prompt::{
    empty_query_reminder, final_answer_request, format_reminder, reason_act_request, refine_request,
};
use crate::llm::{parse_agent_output, ChatMessage, ParsedAgentOutput};
use crate::model::{
    AgentContext, AgentStep, FinalAnswer, Observation, Query, RetrievalAction, StepOrigin,
    TerminationReason,
};
use crate::services::RunSession;

/// Which engine components are active. The full engine enables everything;
/// the unconstrained variant is the plain two-tool loop used as a baseline
/// and by ablations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoopFeatures {
    /// Source preference: prompt text plus the hard step-one local rewrite.
    pub local_first: bool,
    /// Adjustment labels and the local-to-web switching rule.
    pub prs: bool,
    /// Answer review and supplemental retrieval.
    pub car: bool,
}

impl LoopFeatures {
    pub fn from_config(config: &RunConfig) -> Self {
        LoopFeatures {
            local_first: config.prs_enabled,
            prs: config.prs_enabled,
            car: config.car_enabled,
        }
    }

    /// Everything off: plain reason/act/observe with both tools.
    pub fn unconstrained() -> Self {
        LoopFeatures {
            local_first: false,
            prs: false,
            car: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub answer: FinalAnswer,
    pub context: AgentContext,
}

/// Run the full engine on one query.
pub fn run_agent(query: &Query, config: &RunConfig, session: &RunSession) -> Result<RunOutcome> {
    run_loop(query, config, session, LoopFeatures::from_config(config))
}

pub(crate) fn run_loop(
    query: &Query,
    config: &RunConfig,
    session: &RunSession,
    features: LoopFeatures,
) -> Result<RunOutcome> {
    query.validate()?;
    config.validate()?;
    let mut ctx = AgentContext::new(query.clone());
    let mut constraint = NextActionConstraint::Unconstrained;

    loop {
        if ctx.steps.len() >= config.awi {
            return forced_finish(ctx, session, features);
        }
        let t = ctx.next_t();
        if t >= 2 {
            refine_history(&mut ctx, config, session);
        }

        let mut reminder: Option<&str> = None;
        let (parsed, origin, observation) = loop {
            let raw =
                propose_action(&ctx, session, &features, reminder).map_err(|e| e.at_step(t))?;
            let (mut parsed, constrained) = apply_constraint(constraint, raw);
            let mut origin = if constrained {
                StepOrigin::ForcedWebBySelector
            } else {
                StepOrigin::Model
            };
            if features.local_first && t == 1 && parsed.action == RetrievalAction::SearchWeb {
                parsed.action = RetrievalAction::SearchLocal;
                origin = StepOrigin::ForcedLocalFirst;
            }
            if !parsed.action.is_retrieval() {
                break (parsed, origin, None);
            }
            let input = parsed
                .action_input
                .clone()
                .expect("retrieval carries input");
            match execute_action(parsed.action, &input, session) {
                Ok(obs) => break (parsed, origin, Some(obs)),
                Err(Error::EmptyQuery) if reminder.is_none() => {
                    reminder = Some(empty_query_reminder());
                }
                Err(e) => return Err(e.at_step(t)),
            }
        };

        match observation {
            None => {
                let candidate = parsed
                    .final_answer
                    .expect("the None action carries an answer");
                ctx.push_step(AgentStep::answer(t, parsed.thought));
                if !features.car {
                    let answer = FinalAnswer::new(candidate, TerminationReason::AgentNone)
                        .map_err(|e| e.at_step(t))?;
                    return Ok(RunOutcome {
                        answer,
                        context: ctx,
                    });
                }
                let review = review_answer(&candidate, &ctx, session).map_err(|e| e.at_step(t))?;
                ctx.record_review(&candidate, review.clone());
                let can_supplement = !review.quality_label
                    && ctx.srt_used < config.srt
                    && ctx.steps.len() < config.awi;
                if !can_supplement {
                    let answer =
                        finalize(candidate, &review, &ctx, config).map_err(|e| e.at_step(t))?;
                    return Ok(RunOutcome {
                        answer,
                        context: ctx,
                    });
                }
                supplemental_retrieval(&mut ctx, config, session).map_err(|e| e.at_step(t))?;
                constraint = NextActionConstraint::Unconstrained;
            }
            Some(obs) => {
                let label = if features.prs {
                    Some(judge_increment(&obs.passages, &ctx, session).map_err(|e| e.at_step(t))?)
                } else {
                    None
                };
                let input = parsed.action_input.expect("retrieval carries input");
                let step = AgentStep::retrieval(
                    t,
                    parsed.thought,
                    parsed.action,
                    input,
                    obs,
                    label,
                    origin,
                )
                .map_err(|e| e.at_step(t))?;
                let action = step.action;
                ctx.push_step(step);
                constraint = if features.prs {
                    next_constraint(action, label.expect("selector ran"))
                        .map_err(|e| e.at_step(t))?
                } else {
                    NextActionConstraint::Unconstrained
                };
            }
        }
    }
}

/// The step budget is spent: generate an answer from whatever was gathered.
/// The reviewer still records its verdict, but the stop reason stays
/// AwiExhausted either way since no further iteration is possible.
fn forced_finish(
    mut ctx: AgentContext,
    session: &RunSession,
    features: LoopFeatures,
) -> Result<RunOutcome> {
    let boundary = ctx.steps.len();
    let request = final_answer_request(&ctx);
    let reply = session
        .complete(&request)
        .map_err(|e| e.at_step(boundary))?;
    let text = reply.trim().to_string();
    if features.car {
        let review = review_answer(&text, &ctx, session).map_err(|e| e.at_step(boundary))?;
        ctx.record_review(&text, review);
    }
    let answer =
        FinalAnswer::new(text, TerminationReason::AwiExhausted).map_err(|e| e.at_step(boundary))?;
    Ok(RunOutcome {
        answer,
        context: ctx,
    })
}

/// Run one retrieval action against its source and wrap the result.
pub fn execute_action(
    action: RetrievalAction,
    action_input: &str,
    session: &RunSession,
) -> Result<Observation> {
    if !action.is_retrieval() {
        return Err(Error::Contract(
            "execute_action requires a retrieval action".into(),
        ));
    }
    if action_input.trim().is_empty() {
        return Err(Error::EmptyQuery);
    }
    let passages = match action {
        RetrievalAction::SearchLocal => session.search_local(action_input)?,
        RetrievalAction::SearchWeb => session.search_web(action_input)?,
        RetrievalAction::NoneAction => unreachable!("rejected above"),
    };
    Ok(Observation::from_passages(passages))
}

/// Condense the previous step's observation when it exceeds the length
/// threshold. Only the immediately previous observation is a candidate, each
/// observation is refined at most once, and a failed summarizer degrades to
/// keeping the original text.
pub fn refine_history(ctx: &mut AgentContext, config: &RunConfig, session: &RunSession) {
    if !config.ors_enabled {
        return;
    }
    let Some(last) = ctx.steps.last() else {
        return;
    };
    let Some(obs) = &last.observation else {
        return;
    };
    if obs.refined_text.is_some() || obs.char_len <= config.ors_threshold_chars {
        return;
    }
    let retrieval_query = last.action_input.clone().unwrap_or_default();
    let passages_text = obs.rendered();
    let request = refine_request(ctx, &retrieval_query, &passages_text);
    match session.complete(&request) {
        Ok(reply) if !reply.trim().is_empty() => {
            let last = ctx.steps.last_mut().expect("checked above");
            let obs = last.observation.as_mut().expect("checked above");
            obs.set_refined(reply.trim().to_string());
        }
        Ok(_) => log::warn!(
            "query {}: summarizer returned an empty digest; keeping the original",
            session.query_id()
        ),
        Err(e) => log::warn!(
            "query {}: summarizer failed ({e}); keeping the original",
            session.query_id()
        ),
    }
}

/// One reasoning call plus parsing, with a single format-reminder retry. A
/// second malformed reply becomes an answer candidate so the run stays total.
fn propose_action(
    ctx: &AgentContext,
    session: &RunSession,
    features: &LoopFeatures,
    extra_reminder: Option<&str>,
) -> Result<ParsedAgentOutput> {
    let mut request = reason_act_request(ctx, features.local_first);
    if let Some(reminder) = extra_reminder {
        request.messages.push(ChatMessage::user(reminder));
    }
    let reply = session.complete(&request)?;
    match parse_agent_output(&reply) {
        Ok(parsed) => Ok(parsed),
        Err(e) if e.is_format_error() => {
            let retry = request.with_reminder(&reply, format_reminder());
            let second = session.complete(&retry)?;
            match parse_agent_output(&second) {
                Ok(parsed) => Ok(parsed),
                Err(e2) if e2.is_format_error() => {
                    let candidate = if second.trim().is_empty() {
                        reply.trim()
                    } else {
                        second.trim()
                    };
                    if candidate.is_empty() {
                        return Err(e2);
                    }
                    log::warn!(
                        "query {}: agent output unreadable twice; treating the raw reply as an answer candidate",
                        session.query_id()
                    );
                    Ok(ParsedAgentOutput::answer("", candidate))
                }
                Err(e2) => Err(e2),
            }
        }
        Err(e) => Err(e),
    }
}
