//! File-based stores shared by the pipeline phases.
//!
//! Layout under a data directory:
//!
//! ```text
//! <data-dir>/urls.jsonl                         URL journal
//! <data-dir>/ontologies/objects/<sha256>.rdf    ontology bytes
//! <data-dir>/ontologies/manifest.jsonl          one line per put
//! <data-dir>/index.json                         inverted index snapshot
//! ```

mod blob_repo;
mod index_store;
mod url_repo;

use std::io;
use std::path::{Path, PathBuf};

pub use blob_repo::{sha256_hex, ManifestEntry, OntologyBlob, OntologyRepository};
pub use index_store::{load_index, save_index, DocEntry, IndexSnapshot, INDEX_FORMAT_VERSION};
pub use url_repo::{scan_journal, JournalIssue, JournalScan, RecordKind, UrlRecord, UrlRepository};

#[derive(Debug, thiserror::Error)]
pub enum StorageError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("refusing to store an empty document")]
    EmptyDocument,
    #[error("object {0} not found")]
    NotFound(String),
    #[error("object {id} is corrupt: digest on disk is {actual}")]
    CorruptObject { id: String, actual: String },
    #[error("unsupported index format version {found} (expected {expected})")]
    VersionMismatch { found: u64, expected: u32 },
    #[error("corrupt index {path}: {reason}")]
    CorruptIndex { path: PathBuf, reason: String },
}

impl StorageError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        StorageError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, StorageError>;

/// Paths of the three stores inside one data directory.
#[derive(Debug, Clone)]
pub struct DataDir {
    root: PathBuf,
}

impl DataDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DataDir { root: root.into() }
    }

    /// Creates the directory (and parents) if it does not exist yet.
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let dir = DataDir::new(root);
        std::fs::create_dir_all(&dir.root).map_err(|e| StorageError::io(&dir.root, e))?;
        Ok(dir)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn url_journal(&self) -> PathBuf {
        self.root.join("urls.jsonl")
    }

    pub fn ontology_dir(&self) -> PathBuf {
        self.root.join("ontologies")
    }

    pub fn index_file(&self) -> PathBuf {
        self.root.join("index.json")
    }
}
