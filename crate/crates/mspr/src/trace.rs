//! Run trace persistence: one self-contained JSON record per line.
//!
//! Lines are appendable, diff-able and replayable; a whole experiment is a
//! single UTF-8 text file with one run per line.

use crate::error::{Error, Result};
use crate::model::{AgentContext, FinalAnswer};
use serde::{Deserialize, Serialize};

pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TraceRecord {
    version: u32,
    context: AgentContext,
    answer: FinalAnswer,
}

/// Serialize one finished run to a single line (no trailing newline).
pub fn serialize_trace(context: &AgentContext, answer: &FinalAnswer) -> String {
    let record = TraceRecord {
        version: TRACE_VERSION,
        context: context.clone(),
        answer: answer.clone(),
    };
    serde_json::to_string(&record).expect("trace records always serialize")
}

/// Parse one trace line back into its run.
pub fn deserialize_trace(line: &str) -> Result<(AgentContext, FinalAnswer)> {
    let record: TraceRecord =
        serde_json::from_str(line).map_err(|e| Error::TraceFormat(e.to_string()))?;
    if record.version != TRACE_VERSION {
        return Err(Error::TraceFormat(format!(
            "unsupported trace version {} (expected {})",
            record.version, TRACE_VERSION
        )));
    }
    Ok((record.context, record.answer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        AgentStep, AnswerReview, Observation, Passage, Query, RetrievalAction, Source, StepOrigin,
        TerminationReason,
    };

    fn passage(doc_id: &str, source: Source, rank: usize, score: f64) -> Passage {
        Passage {
            doc_id: doc_id.into(),
            title: format!("T {doc_id}"),
            text: format!("body of {doc_id}"),
            source,
            score,
            rank,
        }
    }

    #[test]
    fn minimal_run_round_trips_and_carries_the_query_id() {
        let ctx = AgentContext::new(Query::new("q-nor-1", "capital of France?").unwrap());
        let answer = FinalAnswer::new("Paris", TerminationReason::AgentNone).unwrap();
        let line = serialize_trace(&ctx, &answer);
        assert!(line.contains("q-nor-1"));
        assert!(line.contains("\"steps\":[]"));
        let (ctx2, answer2) = deserialize_trace(&line).unwrap();
        assert_eq!(ctx, ctx2);
        assert_eq!(answer, answer2);
    }

    #[test]
    fn two_step_run_round_trips_exactly() {
        let mut ctx = AgentContext::new(Query::new("q2", "who wrote X?").unwrap());
        let obs = Observation::from_passages(vec![
            passage("d1", Source::Local, 1, 2.5),
            passage("d2", Source::Local, 2, 1.25),
        ]);
        ctx.push_step(
            AgentStep::retrieval(
                1,
                "try the local corpus",
                RetrievalAction::SearchLocal,
                "author of X",
                obs,
                Some(true),
                StepOrigin::Model,
            )
            .unwrap(),
        );
        ctx.push_step(AgentStep::answer(2, "the context is enough"));
        ctx.record_review("Jane Doe", AnswerReview::new(true, true, true, "complete"));
        let answer = FinalAnswer::new("Jane Doe", TerminationReason::ReviewPassed).unwrap();

        let line = serialize_trace(&ctx, &answer);
        let (ctx2, answer2) = deserialize_trace(&line).unwrap();
        assert_eq!(ctx, ctx2);
        assert_eq!(answer, answer2);
    }

    #[test]
    fn refined_observation_keeps_both_representations_in_the_record() {
        let mut ctx = AgentContext::new(Query::new("q3", "long one?").unwrap());
        let mut obs = Observation::from_passages(vec![passage("d9", Source::Web, 1, 1.0)]);
        obs.set_refined("digest of d9".into());
        ctx.push_step(
            AgentStep::retrieval(
                1,
                "web had it",
                RetrievalAction::SearchWeb,
                "long one",
                obs,
                Some(true),
                StepOrigin::Model,
            )
            .unwrap(),
        );
        let answer = FinalAnswer::new("42", TerminationReason::AgentNone).unwrap();

        let line = serialize_trace(&ctx, &answer);
        assert!(line.contains("digest of d9"));
        assert!(line.contains("body of d9"));
        let (ctx2, _) = deserialize_trace(&line).unwrap();
        assert_eq!(ctx, ctx2);
    }

    #[test]
    fn version_mismatch_fails_loudly() {
        let ctx = AgentContext::new(Query::new("q", "x?").unwrap());
        let answer = FinalAnswer::new("y", TerminationReason::AgentNone).unwrap();
        let line = serialize_trace(&ctx, &answer).replace("\"version\":1", "\"version\":9");
        let err = deserialize_trace(&line).unwrap_err();
        assert!(err.to_string().contains("version"));
    }

    #[test]
    fn garbage_lines_are_rejected() {
        assert!(deserialize_trace("not json").is_err());
        assert!(deserialize_trace("{}").is_err());
    }
}
