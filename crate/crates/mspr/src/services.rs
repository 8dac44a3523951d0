//! Service wiring: the shared backends plus a per-run session that counts
//! calls and enforces the model-call budget.

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::index::Bm25Index;
use crate::llm::{ChatRequest, LlmBackend};
use crate::model::Passage;
use crate::web::{search_web, WebSearch};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// The long-lived backends a batch of runs shares. The index is immutable
/// and the clients synchronize internally, so clones are cheap handles.
#[derive(Clone)]
pub struct Services {
    pub llm: Arc<dyn LlmBackend>,
    pub web: Arc<dyn WebSearch>,
    pub index: Option<Arc<Bm25Index>>,
}

impl Services {
    pub fn new(
        llm: Arc<dyn LlmBackend>,
        web: Arc<dyn WebSearch>,
        index: Option<Arc<Bm25Index>>,
    ) -> Self {
        Services { llm, web, index }
    }

    /// Start a session for one query's run.
    pub fn session(&self, query_id: impl Into<String>, config: &RunConfig) -> RunSession {
        RunSession {
            llm: self.llm.clone(),
            web: self.web.clone(),
            index: self.index.clone(),
            query_id: query_id.into(),
            top_k: config.top_k,
            max_llm_calls: config.max_llm_calls,
            llm_calls: AtomicU64::new(0),
            local_retrievals: AtomicU64::new(0),
            web_retrievals: AtomicU64::new(0),
        }
    }
}

/// Call counts observed during one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CallStats {
    pub llm_calls: u64,
    pub local_retrievals: u64,
    pub web_retrievals: u64,
}

impl CallStats {
    pub fn retrievals(&self) -> u64 {
        self.local_retrievals + self.web_retrievals
    }
}

/// One query's view of the services: same backends, plus counters and the
/// per-run model-call budget.
pub struct RunSession {
    llm: Arc<dyn LlmBackend>,
    web: Arc<dyn WebSearch>,
    index: Option<Arc<Bm25Index>>,
    query_id: String,
    top_k: usize,
    max_llm_calls: Option<u64>,
    llm_calls: AtomicU64,
    local_retrievals: AtomicU64,
    web_retrievals: AtomicU64,
}

impl RunSession {
    pub fn query_id(&self) -> &str {
        &self.query_id
    }

    pub fn top_k(&self) -> usize {
        self.top_k
    }

    pub fn complete(&self, request: &ChatRequest) -> Result<String> {
        let made = self.llm_calls.fetch_add(1, Ordering::SeqCst);
        if let Some(limit) = self.max_llm_calls {
            if made >= limit {
                return Err(Error::BudgetExceeded { limit });
            }
        }
        self.llm.complete(request)
    }

    pub fn search_local(&self, query: &str) -> Result<Vec<Passage>> {
        let index = self.index.as_ref().ok_or_else(|| {
            Error::Config("this run needs a local corpus index but none is loaded".into())
        })?;
        self.local_retrievals.fetch_add(1, Ordering::SeqCst);
        index.search(query, self.top_k)
    }

    pub fn search_web(&self, query: &str) -> Result<Vec<Passage>> {
        self.web_retrievals.fetch_add(1, Ordering::SeqCst);
        search_web(self.web.as_ref(), query, self.top_k)
    }

    pub fn stats(&self) -> CallStats {
        CallStats {
            llm_calls: self.llm_calls.load(Ordering::SeqCst),
            local_retrievals: self.local_retrievals.load(Ordering::SeqCst),
            web_retrievals: self.web_retrievals.load(Ordering::SeqCst),
        }
    }
}
