//! Index snapshot files: a self-describing header line followed by the
//! serialized index. Loading a mismatched magic or version fails loudly.

use super::Bm25Index;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::Path;

const MAGIC: &str = "mspr-bm25-snapshot";
const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct SnapshotHeader {
    magic: String,
    version: u32,
    n_docs: usize,
    avgdl: f64,
    k1: f64,
    b: f64,
}

pub fn save_snapshot(index: &Bm25Index, path: &Path) -> Result<()> {
    let header = SnapshotHeader {
        magic: MAGIC.to_string(),
        version: VERSION,
        n_docs: index.n_docs(),
        avgdl: index.avgdl(),
        k1: index.k1(),
        b: index.b(),
    };
    let mut file = fs::File::create(path)?;
    writeln!(file, "{}", serde_json::to_string(&header)?)?;
    writeln!(file, "{}", serde_json::to_string(index)?)?;
    Ok(())
}

pub fn load_snapshot(path: &Path) -> Result<Bm25Index> {
    let content = fs::read_to_string(path)?;
    let mut lines = content.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::SnapshotFormat("empty snapshot file".into()))?;
    let header: SnapshotHeader = serde_json::from_str(header_line)
        .map_err(|e| Error::SnapshotFormat(format!("unreadable header: {e}")))?;
    if header.magic != MAGIC {
        return Err(Error::SnapshotFormat(format!(
            "not an index snapshot (magic {:?})",
            header.magic
        )));
    }
    if header.version != VERSION {
        return Err(Error::SnapshotFormat(format!(
            "snapshot version {} unsupported (expected {VERSION})",
            header.version
        )));
    }
    let body = lines
        .next()
        .ok_or_else(|| Error::SnapshotFormat("missing snapshot body".into()))?;
    let index: Bm25Index = serde_json::from_str(body)
        .map_err(|e| Error::SnapshotFormat(format!("unreadable body: {e}")))?;
    if index.n_docs() != header.n_docs {
        return Err(Error::SnapshotFormat(format!(
            "header claims {} docs, body has {}",
            header.n_docs,
            index.n_docs()
        )));
    }
    let mean = index.mean_doc_len();
    if (index.avgdl() - mean).abs() > 1e-9 {
        return Err(Error::SnapshotFormat(format!(
            "stored avgdl {} disagrees with document lengths (mean {mean})",
            index.avgdl()
        )));
    }
    Ok(index)
}
