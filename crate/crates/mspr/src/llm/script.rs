//! Deterministic scripted backend for hermetic runs and tests.
//!
//! Responses are keyed by (query id, stage, occurrence index): the n-th call
//! a given query's run makes at a given stage receives the n-th scripted
//! response for that pair, so one run's call order is fully reproducible.

use super::{ChatRequest, LlmBackend, StageTag};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub query_id: String,
    pub stage_tag: StageTag,
    pub occurrence: u32,
    pub response: String,
}

/// Builder for script tables. `add` appends with the next free occurrence
/// index for its (query, stage) pair.
#[derive(Debug, Clone, Default)]
pub struct Script {
    entries: Vec<ScriptEntry>,
}

impl Script {
    pub fn new() -> Self {
        Script::default()
    }

    pub fn add(
        &mut self,
        query_id: impl Into<String>,
        stage: StageTag,
        response: impl Into<String>,
    ) -> &mut Self {
        let query_id = query_id.into();
        let occurrence = self
            .entries
            .iter()
            .filter(|e| e.query_id == query_id && e.stage_tag == stage)
            .count() as u32;
        self.entries.push(ScriptEntry {
            query_id,
            stage_tag: stage,
            occurrence,
            response: response.into(),
        });
        self
    }

    pub fn entries(&self) -> &[ScriptEntry] {
        &self.entries
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut file = fs::File::create(path)?;
        for entry in &self.entries {
            writeln!(file, "{}", serde_json::to_string(entry)?)?;
        }
        Ok(())
    }

    pub fn backend(&self) -> ScriptedBackend {
        ScriptedBackend::from_entries(self.entries.clone())
    }
}

pub struct ScriptedBackend {
    responses: HashMap<(String, StageTag, u32), String>,
    cursors: Mutex<HashMap<(String, StageTag), u32>>,
}

impl ScriptedBackend {
    pub fn from_entries(entries: Vec<ScriptEntry>) -> Self {
        let responses = entries
            .into_iter()
            .map(|e| ((e.query_id, e.stage_tag, e.occurrence), e.response))
            .collect();
        ScriptedBackend {
            responses,
            cursors: Mutex::new(HashMap::new()),
        }
    }

    /// Load a line-delimited script file.
    pub fn load(path: &Path) -> Result<Self> {
        let content = fs::read_to_string(path)?;
        let mut entries = Vec::new();
        for (i, line) in content.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: ScriptEntry = serde_json::from_str(line)
                .map_err(|e| Error::Config(format!("script line {}: {e}", i + 1)))?;
            entries.push(entry);
        }
        Ok(Self::from_entries(entries))
    }
}

impl LlmBackend for ScriptedBackend {
    fn complete(&self, request: &ChatRequest) -> Result<String> {
        let key = (request.query_id.clone(), request.stage);
        let occurrence = {
            let mut cursors = self.cursors.lock().expect("script cursor lock");
            let counter = cursors.entry(key).or_insert(0);
            let current = *counter;
            *counter += 1;
            current
        };
        self.responses
            .get(&(request.query_id.clone(), request.stage, occurrence))
            .cloned()
            .ok_or(Error::ScriptMiss {
                query_id: request.query_id.clone(),
                stage: request.stage,
                occurrence,
            })
    }
}
