//! Content-addressed response cache wrapping any backend. The key hashes the
//! semantic request content (messages and sampling parameters), so identical
//! requests from different runs share entries.

use super::{ChatRequest, LlmBackend};
use crate::error::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::PathBuf;

pub struct CachedBackend {
    inner: Box<dyn LlmBackend>,
    dir: PathBuf,
}

#[derive(Serialize)]
struct CacheKeyView<'a> {
    messages: &'a [super::ChatMessage],
    temperature: f64,
    max_output: u32,
}

fn request_key(request: &ChatRequest) -> String {
    let view = CacheKeyView {
        messages: &request.messages,
        temperature: request.temperature,
        max_output: request.max_output,
    };
    let bytes = serde_json::to_vec(&view).expect("cache key serializes");
    hex::encode(Sha256::digest(bytes))
}

impl CachedBackend {
    pub fn new(inner: Box<dyn LlmBackend>, dir: PathBuf) -> Self {
        CachedBackend { inner, dir }
    }
}

impl LlmBackend for CachedBackend {
    fn complete(&self, request: &ChatRequest) -> Result<String> {
        let path = self.dir.join(format!("{}.txt", request_key(request)));
        if let Ok(cached) = fs::read_to_string(&path) {
            return Ok(cached);
        }
        let response = self.inner.complete(request)?;
        fs::create_dir_all(&self.dir)?;
        fs::write(&path, &response)?;
        Ok(response)
    }
}
