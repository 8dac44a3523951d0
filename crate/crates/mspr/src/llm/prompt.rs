//! Prompt construction for every stage. The wordings live as versioned files
//! under `prompts/`; rendering is a pure function of its arguments and uses
//! no few-shot exemplars.

use super::{ChatRequest, StageTag};
use crate::model::{AgentContext, Passage, Query};

const REASON_ACT: &str = include_str!("../../prompts/reason_act.txt");
const PREFERENCE_LOCAL_FIRST: &str = include_str!("../../prompts/preference_local_first.txt");
const REFINE: &str = include_str!("../../prompts/refine.txt");
const PRS_LABEL: &str = include_str!("../../prompts/prs_label.txt");
const CAR_REVIEW: &str = include_str!("../../prompts/car_review.txt");
const FINAL_ANSWER: &str = include_str!("../../prompts/final_answer.txt");
const VANILLA: &str = include_str!("../../prompts/vanilla.txt");
const NOR: &str = include_str!("../../prompts/nor.txt");
const FORMAT_REMINDER: &str = include_str!("../../prompts/format_reminder.txt");
const EMPTY_QUERY_REMINDER: &str = include_str!("../../prompts/empty_query_reminder.txt");
const LABEL_REMINDER: &str = include_str!("../../prompts/label_reminder.txt");
const REVIEW_REMINDER: &str = include_str!("../../prompts/review_reminder.txt");

pub fn format_reminder() -> &'static str {
    FORMAT_REMINDER
}

pub fn empty_query_reminder() -> &'static str {
    EMPTY_QUERY_REMINDER
}

pub fn label_reminder() -> &'static str {
    LABEL_REMINDER
}

pub fn review_reminder() -> &'static str {
    REVIEW_REMINDER
}

fn history_block(context: &AgentContext) -> String {
    let history = context.rendered_history();
    if history.is_empty() {
        String::new()
    } else {
        format!("\n{history}")
    }
}

/// The reasoning/action prompt. `local_first` injects the source preference
/// used by the full engine; the unconstrained variant omits it.
pub fn reason_act_request(context: &AgentContext, local_first: bool) -> ChatRequest {
    let preference = if local_first {
        PREFERENCE_LOCAL_FIRST
    } else {
        ""
    };
    let system = REASON_ACT.replace("{preference}", preference);
    let user = format!(
        "Question: {}\n{}\nThought:",
        context.query.text,
        history_block(context)
    );
    ChatRequest::new(&context.query.id, StageTag::ReasonAct, system, user)
}

/// Summarize one observation's passages into a digest.
pub fn refine_request(
    context: &AgentContext,
    retrieval_query: &str,
    passages_text: &str,
) -> ChatRequest {
    let user = format!(
        "Question: {}\nRetrieval query: {}\n\nPassages:\n{}",
        context.query.text, retrieval_query, passages_text
    );
    ChatRequest::new(&context.query.id, StageTag::Refine, REFINE, user)
}

/// Judge whether the newest passages add question-advancing information.
/// The context rendering excludes those passages; they appear separately.
pub fn prs_label_request(context: &AgentContext, newest: &[Passage]) -> ChatRequest {
    let user = format!(
        "Question: {}\n\nEarlier context:\n{}\n\nNewest passages:\n{}",
        context.query.text,
        if context.steps.is_empty() {
            "(none)".to_string()
        } else {
            context.rendered_history()
        },
        crate::model::render_passages(newest),
    );
    ChatRequest::new(&context.query.id, StageTag::PrsLabel, PRS_LABEL, user)
}

/// Review a candidate answer on the three quality dimensions.
pub fn car_review_request(context: &AgentContext, answer: &str) -> ChatRequest {
    let user = format!(
        "Question: {}\n\nContext:\n{}\nCandidate answer: {}",
        context.query.text,
        history_block(context),
        answer
    );
    ChatRequest::new(&context.query.id, StageTag::CarReview, CAR_REVIEW, user)
}

/// Generate an answer from the accumulated context once the step budget is
/// spent.
pub fn final_answer_request(context: &AgentContext) -> ChatRequest {
    let user = format!(
        "Question: {}\n{}\nAnswer:",
        context.query.text,
        history_block(context)
    );
    ChatRequest::new(&context.query.id, StageTag::FinalAnswer, FINAL_ANSWER, user)
}

/// One-shot generation over retrieved passages. A block appears for every
/// source that was searched, local before web, even when it came back empty.
pub fn vanilla_request(
    query: &Query,
    local: Option<&[Passage]>,
    web: Option<&[Passage]>,
) -> ChatRequest {
    let mut context_block = String::new();
    if let Some(local) = local {
        context_block.push_str(&format!(
            "Local passages:\n{}\n",
            crate::model::render_passages(local)
        ));
    }
    if let Some(web) = web {
        context_block.push_str(&format!(
            "Web passages:\n{}\n",
            crate::model::render_passages(web)
        ));
    }
    let user = format!(
        "Context:\n{}\nQuestion: {}\nAnswer:",
        context_block, query.text
    );
    ChatRequest::new(&query.id, StageTag::Vanilla, VANILLA, user)
}

/// Direct answering without retrieval.
pub fn nor_request(query: &Query) -> ChatRequest {
    let user = format!("Question: {}\nAnswer:", query.text);
    ChatRequest::new(&query.id, StageTag::Nor, NOR, user)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AgentStep, Observation, Query, RetrievalAction, Source, StepOrigin};

    fn query() -> Query {
        Query::new("q1", "who founded the observatory?").unwrap()
    }

    fn passage(doc_id: &str, text: &str) -> Passage {
        Passage {
            doc_id: doc_id.into(),
            title: format!("T-{doc_id}"),
            text: text.into(),
            source: Source::Local,
            score: 1.0,
            rank: 1,
        }
    }

    #[test]
    fn empty_history_prompt_has_question_and_tool_descriptions_only() {
        let ctx = AgentContext::new(query());
        let req = reason_act_request(&ctx, true);
        let system = &req.messages[0].content;
        let user = &req.messages[1].content;

        assert!(system.contains("[Search Local]"));
        assert!(system.contains("[Search Web]"));
        assert!(system.contains("[None]"));
        // the labelled sections of the output grammar
        for label in ["Thought:", "Action:", "Action Input:", "Final Answer:"] {
            assert!(system.contains(label), "missing {label}");
        }
        assert!(system.contains("Observation"));
        // local preference text present
        assert!(system.contains("Prefer [Search Local]"));

        assert!(user.contains("who founded the observatory?"));
        assert!(!user.contains("Observation:"));
        assert!(!user.contains("Action Input:"));
    }

    #[test]
    fn preference_text_is_absent_when_disabled() {
        let ctx = AgentContext::new(query());
        let req = reason_act_request(&ctx, false);
        assert!(!req.messages[0].content.contains("Prefer [Search Local]"));
        assert!(!req.messages[0].content.contains("{preference}"));
    }

    #[test]
    fn refined_observations_render_as_their_digest() {
        let mut ctx = AgentContext::new(query());
        let mut obs = Observation::from_passages(vec![passage("d1", "the original long text")]);
        obs.set_refined("the digest".into());
        ctx.push_step(
            AgentStep::retrieval(
                1,
                "look",
                RetrievalAction::SearchLocal,
                "observatory founder",
                obs,
                Some(true),
                StepOrigin::Model,
            )
            .unwrap(),
        );
        let req = reason_act_request(&ctx, true);
        let user = &req.messages[1].content;
        assert!(user.contains("the digest"));
        assert!(!user.contains("the original long text"));
    }

    #[test]
    fn label_prompt_contains_prior_context_and_newest_passages() {
        let mut ctx = AgentContext::new(query());
        ctx.push_step(
            AgentStep::retrieval(
                1,
                "start local",
                RetrievalAction::SearchLocal,
                "founder",
                Observation::from_passages(vec![passage("d1", "earlier passage text")]),
                Some(true),
                StepOrigin::Model,
            )
            .unwrap(),
        );
        let newest = vec![passage("d2", "brand new passage text")];
        let req = prs_label_request(&ctx, &newest);
        let user = &req.messages[1].content;
        assert!(user.contains("Earlier context:"));
        assert!(user.contains("earlier passage text"));
        assert!(user.contains("Newest passages:"));
        assert!(user.contains("brand new passage text"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let ctx = AgentContext::new(query());
        assert_eq!(
            reason_act_request(&ctx, true),
            reason_act_request(&ctx, true)
        );
        assert_eq!(nor_request(&query()), nor_request(&query()));
    }

    #[test]
    fn vanilla_prompt_puts_the_local_block_first() {
        let local = vec![passage("l1", "local fact")];
        let web = vec![Passage {
            source: Source::Web,
            ..passage("w1", "web fact")
        }];
        let req = vanilla_request(&query(), Some(&local), Some(&web));
        let user = &req.messages[1].content;
        let local_pos = user.find("Local passages:").unwrap();
        let web_pos = user.find("Web passages:").unwrap();
        assert!(local_pos < web_pos);
        assert!(user.find("local fact").unwrap() < user.find("web fact").unwrap());
    }

    #[test]
    fn vanilla_prompt_with_no_results_still_has_a_context_block() {
        let req = vanilla_request(&query(), None, Some(&[]));
        let user = &req.messages[1].content;
        assert!(user.contains("Web passages:"));
        assert!(user.contains("(no results)"));
        assert!(!user.contains("Local passages:"));
        assert!(user.contains("Question:"));
    }
}
