use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Result, StorageError};
use crate::index::Posting;

pub const INDEX_FORMAT_VERSION: u32 = 1;

/// Per-ontology row of the document table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocEntry {
    pub ordinal: u32,
    pub blob_id: String,
    pub url: String,
    pub size_bytes: u64,
    pub classes: u32,
    pub properties: u32,
    pub relations: u32,
}

/// Persisted form of the inverted index. `version` is serialized first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSnapshot {
    pub version: u32,
    pub doc_count: u32,
    pub doc_table: Vec<DocEntry>,
    pub postings: BTreeMap<String, Vec<Posting>>,
}

impl IndexSnapshot {
    pub fn empty() -> Self {
        IndexSnapshot {
            version: INDEX_FORMAT_VERSION,
            doc_count: 0,
            doc_table: Vec::new(),
            postings: BTreeMap::new(),
        }
    }

    /// Checks the structural invariants; returns a description of the first
    /// violation.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.doc_table.len() != self.doc_count as usize {
            return Err(format!(
                "doc_count is {} but doc_table has {} rows",
                self.doc_count,
                self.doc_table.len()
            ));
        }
        for (i, doc) in self.doc_table.iter().enumerate() {
            if doc.ordinal as usize != i {
                return Err(format!("doc_table row {i} has ordinal {}", doc.ordinal));
            }
        }
        for (term, list) in &self.postings {
            if term.is_empty() {
                return Err("empty term key".into());
            }
            if list.is_empty() {
                return Err(format!("term {term:?} has no postings"));
            }
            for p in list {
                if p.doc >= self.doc_count {
                    return Err(format!("term {term:?} refers to unknown doc {}", p.doc));
                }
                if p.tf == 0 {
                    return Err(format!("term {term:?} has a zero tf posting"));
                }
            }
            if list.windows(2).any(|w| (w[0].doc, w[0].field) >= (w[1].doc, w[1].field)) {
                return Err(format!("postings of {term:?} are not strictly sorted"));
            }
        }
        Ok(())
    }
}

/// Writes the snapshot as pretty-printed JSON. Term keys come out sorted
/// (`BTreeMap`), so equal snapshots produce identical bytes.
pub fn save_index(snapshot: &IndexSnapshot, path: &Path) -> Result<()> {
    snapshot.validate().map_err(|reason| StorageError::CorruptIndex {
        path: path.to_path_buf(),
        reason,
    })?;
    let mut text = serde_json::to_string_pretty(snapshot).expect("snapshot serializes");
    text.push('\n');
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, text)
        .and_then(|_| fs::rename(&tmp, path))
        .map_err(|e| StorageError::io(path, e))
}

pub fn load_index(path: &Path) -> Result<IndexSnapshot> {
    let text = fs::read_to_string(path).map_err(|e| StorageError::io(path, e))?;
    let corrupt = |reason: String| StorageError::CorruptIndex {
        path: path.to_path_buf(),
        reason,
    };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
    let version = value
        .get("version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| corrupt("missing version".into()))?;
    if version != u64::from(INDEX_FORMAT_VERSION) {
        return Err(StorageError::VersionMismatch {
            found: version,
            expected: INDEX_FORMAT_VERSION,
        });
    }
    let snapshot: IndexSnapshot = serde_json::from_value(value).map_err(|e| corrupt(e.to_string()))?;
    snapshot.validate().map_err(corrupt)?;
    Ok(snapshot)
}
