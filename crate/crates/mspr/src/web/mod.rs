//! Web retrieval: a provider-agnostic search client plus the conversion from
//! raw provider results into ranked passages.

mod duckduckgo;
mod rate_limit;
mod replay;

pub use duckduckgo::DuckDuckGoClient;
pub use rate_limit::{Clock, FakeClock, RateLimiter, SystemClock};
pub use replay::{normalize_cache_key, ReplayMode, ReplayStore};

use crate::error::{Error, Result};
use crate::model::{Passage, Source};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// One raw result from a search provider.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WebResult {
    pub url: String,
    pub title: String,
    pub snippet: String,
}

/// Pluggable search client. Implementations are shareable across workers.
pub trait WebSearch: Send + Sync {
    fn search(&self, query: &str, top_k: usize) -> Result<Vec<WebResult>>;
}

/// Convert provider results to passages: duplicate urls collapse to their
/// first occurrence, order is preserved, and since providers expose no
/// scores each passage gets 1/rank.
pub fn to_passages(results: &[WebResult], top_k: usize) -> Vec<Passage> {
    let mut seen: HashSet<&str> = HashSet::new();
    let mut passages = Vec::new();
    for result in results {
        if !seen.insert(result.url.as_str()) {
            continue;
        }
        let rank = passages.len() + 1;
        let text = if result.snippet.is_empty() {
            result.title.clone()
        } else {
            format!("{} | {}", result.title, result.snippet)
        };
        passages.push(Passage {
            doc_id: result.url.clone(),
            title: result.title.clone(),
            text,
            source: Source::Web,
            score: 1.0 / rank as f64,
            rank,
        });
        if passages.len() == top_k {
            break;
        }
    }
    passages
}

/// Top-k web retrieval as ranked passages.
pub fn search_web(client: &dyn WebSearch, query: &str, top_k: usize) -> Result<Vec<Passage>> {
    if query.trim().is_empty() {
        return Err(Error::EmptyQuery);
    }
    if top_k < 1 {
        return Err(Error::Config("top_k must be at least 1".into()));
    }
    let results = client.search(query, top_k)?;
    Ok(to_passages(&results, top_k))
}

/// Run `call` up to `attempts` times, sleeping with doubling backoff between
/// attempts. The last error is returned when every attempt fails.
pub(crate) fn with_retries<T>(
    clock: &dyn Clock,
    attempts: u32,
    initial_backoff: std::time::Duration,
    mut call: impl FnMut() -> Result<T>,
) -> Result<T> {
    let mut backoff = initial_backoff;
    let mut last_err = None;
    for attempt in 0..attempts {
        if attempt > 0 {
            clock.sleep(backoff);
            backoff *= 2;
        }
        match call() {
            Ok(value) => return Ok(value),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one attempt ran"))
}

#[cfg(test)]
pub(crate) fn result(url: &str, title: &str, snippet: &str) -> WebResult {
    WebResult {
        url: url.into(),
        title: title.into(),
        snippet: snippet.into(),
    }
}
