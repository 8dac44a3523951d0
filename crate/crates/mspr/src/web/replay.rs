//! Record/replay store for web search: record mode captures live results to a
//! line-delimited file, replay mode serves only from that file so whole runs
//! are network-free and reproducible.

use super::{WebResult, WebSearch};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;

/// Cache key normalization: queries differing only in case or whitespace hit
/// the same entry.
pub fn normalize_cache_key(query: &str) -> String {
    query
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ReplayRecord {
    query: String,
    top_k: usize,
    results: Vec<WebResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplayMode {
    Record,
    Replay,
}

/// Wraps an optional live client with an append-only result store.
pub struct ReplayStore {
    mode: ReplayMode,
    inner: Option<Box<dyn WebSearch>>,
    state: Mutex<StoreState>,
}

struct StoreState {
    entries: HashMap<(String, usize), Vec<WebResult>>,
    appender: Option<File>,
}

impl ReplayStore {
    /// Replay-only store; every miss is an error.
    pub fn replay(path: &Path) -> Result<Self> {
        let entries = load_entries(path)?;
        Ok(ReplayStore {
            mode: ReplayMode::Replay,
            inner: None,
            state: Mutex::new(StoreState {
                entries,
                appender: None,
            }),
        })
    }

    /// Record store: misses go to `inner` and are appended to the file;
    /// repeated queries are served from the store without a second call.
    pub fn record(path: &Path, inner: Box<dyn WebSearch>) -> Result<Self> {
        let entries = if path.exists() {
            load_entries(path)?
        } else {
            HashMap::new()
        };
        let appender = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(ReplayStore {
            mode: ReplayMode::Record,
            inner: Some(inner),
            state: Mutex::new(StoreState {
                entries,
                appender: Some(appender),
            }),
        })
    }

    pub fn mode(&self) -> ReplayMode {
        self.mode
    }
}

fn load_entries(path: &Path) -> Result<HashMap<(String, usize), Vec<WebResult>>> {
    let file = File::open(path)?;
    let mut entries = HashMap::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ReplayRecord = serde_json::from_str(&line)?;
        entries.insert(
            (normalize_cache_key(&record.query), record.top_k),
            record.results,
        );
    }
    Ok(entries)
}

impl WebSearch for ReplayStore {
    fn search(&self, query: &str, top_k: usize) -> Result<Vec<WebResult>> {
        let key = (normalize_cache_key(query), top_k);
        let mut state = self.state.lock().expect("replay store lock");
        if let Some(results) = state.entries.get(&key) {
            return Ok(results.clone());
        }
        match self.mode {
            ReplayMode::Replay => Err(Error::ReplayMiss {
                query: query.to_string(),
                top_k,
            }),
            ReplayMode::Record => {
                let inner = self
                    .inner
                    .as_ref()
                    .expect("record mode always has an inner client");
                let results = inner.search(query, top_k)?;
                let record = ReplayRecord {
                    query: key.0.clone(),
                    top_k,
                    results: results.clone(),
                };
                if let Some(file) = state.appender.as_mut() {
                    writeln!(file, "{}", serde_json::to_string(&record)?)?;
                }
                state.entries.insert(key, results.clone());
                Ok(results)
            }
        }
    }
}
