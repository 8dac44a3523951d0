//! In-memory BM25 retrieval over the local corpus.
//!
//! The index is immutable after build; concurrent read-only searches need no
//! coordination. Scoring uses the non-negative idf variant
//! `ln(1 + (N - n + 0.5) / (n + 0.5))` with `k1`/`b` length normalization.

mod snapshot;
mod tokenize;

pub use snapshot::{load_snapshot, save_snapshot};
pub use tokenize::tokenize;

use crate::error::{Error, Result};
use crate::model::{Passage, Source};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};

pub const DEFAULT_K1: f64 = 1.2;
pub const DEFAULT_B: f64 = 0.75;

/// One document of the local corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusDocument {
    pub doc_id: String,
    pub title: String,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
struct Posting {
    doc: u32,
    tf: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bm25Index {
    k1: f64,
    b: f64,
    avgdl: f64,
    doc_len: Vec<usize>,
    docs: Vec<CorpusDocument>,
    postings: BTreeMap<String, Vec<Posting>>,
}

impl Bm25Index {
    /// Build an index over the given documents. Deterministic for identical
    /// input order.
    pub fn build(docs: impl IntoIterator<Item = CorpusDocument>, k1: f64, b: f64) -> Result<Self> {
        if k1.is_nan() || k1 <= 0.0 {
            return Err(Error::Config(format!("k1 must be positive, got {k1}")));
        }
        if !(0.0..=1.0).contains(&b) {
            return Err(Error::Config(format!("b must be in [0, 1], got {b}")));
        }

        let mut seen: HashSet<String> = HashSet::new();
        let mut stored: Vec<CorpusDocument> = Vec::new();
        let mut doc_len: Vec<usize> = Vec::new();
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();

        for doc in docs {
            if doc.text.trim().is_empty() {
                return Err(Error::Ingest(format!(
                    "document {:?} has empty text",
                    doc.doc_id
                )));
            }
            if !seen.insert(doc.doc_id.clone()) {
                return Err(Error::DuplicateDocId(doc.doc_id));
            }
            let ordinal = stored.len() as u32;
            // Only the body is indexed; the title is carried as metadata.
            let tokens = tokenize(&doc.text);
            doc_len.push(tokens.len());

            let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
            for token in &tokens {
                *counts.entry(token.as_str()).or_insert(0) += 1;
            }
            for (term, tf) in counts {
                postings
                    .entry(term.to_string())
                    .or_default()
                    .push(Posting { doc: ordinal, tf });
            }
            stored.push(doc);
        }

        if stored.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let avgdl = doc_len.iter().sum::<usize>() as f64 / doc_len.len() as f64;

        Ok(Bm25Index {
            k1,
            b,
            avgdl,
            doc_len,
            docs: stored,
            postings,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn avgdl(&self) -> f64 {
        self.avgdl
    }

    pub(crate) fn mean_doc_len(&self) -> f64 {
        self.doc_len.iter().sum::<usize>() as f64 / self.doc_len.len().max(1) as f64
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    fn idf(&self, df: usize) -> f64 {
        let n = self.n_docs() as f64;
        let df = df as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    /// Top-k search. Returns the matching documents as ranked passages with
    /// source `Local`; ties break by ascending doc id.
    pub fn search(&self, query: &str, top_k: usize) -> Result<Vec<Passage>> {
        if top_k < 1 {
            return Err(Error::Config("top_k must be at least 1".into()));
        }
        let terms = tokenize(query);
        if terms.is_empty() {
            return Err(Error::EmptyQuery);
        }

        // Query terms contribute once per occurrence, duplicates included.
        let mut scores: HashMap<u32, f64> = HashMap::new();
        for term in &terms {
            let Some(postings) = self.postings.get(term) else {
                continue;
            };
            let idf = self.idf(postings.len());
            for posting in postings {
                let tf = posting.tf as f64;
                let dl = self.doc_len[posting.doc as usize] as f64;
                let norm = tf * (self.k1 + 1.0)
                    / (tf + self.k1 * (1.0 - self.b + self.b * dl / self.avgdl));
                *scores.entry(posting.doc).or_insert(0.0) += idf * norm;
            }
        }

        let mut ranked: Vec<(u32, f64)> = scores.into_iter().collect();
        ranked.sort_by(|(da, sa), (db, sb)| {
            sb.partial_cmp(sa)
                .expect("bm25 scores are finite")
                .then_with(|| {
                    self.docs[*da as usize]
                        .doc_id
                        .cmp(&self.docs[*db as usize].doc_id)
                })
        });
        ranked.truncate(top_k);

        Ok(ranked
            .into_iter()
            .enumerate()
            .map(|(i, (ordinal, score))| {
                let doc = &self.docs[ordinal as usize];
                Passage {
                    doc_id: doc.doc_id.clone(),
                    title: doc.title.clone(),
                    text: doc.text.clone(),
                    source: Source::Local,
                    score,
                    rank: i + 1,
                }
            })
            .collect())
    }
}
