use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Result, StorageError};

/// An ontology document as fetched, named by the SHA-256 of its bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntologyBlob {
    pub id: String,
    pub bytes: Vec<u8>,
    pub source_url: String,
    pub fetched_at: DateTime<Utc>,
    pub size_bytes: u64,
}

/// One line of `manifest.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub source_url: String,
    pub fetched_at: String,
    pub size_bytes: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn is_digest(id: &str) -> bool {
    id.len() == 64 && id.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

/// Content-addressed store of ontology documents.
#[derive(Debug, Clone)]
pub struct OntologyRepository {
    root: PathBuf,
}

impl OntologyRepository {
    pub fn open(root: &Path) -> Result<Self> {
        let objects = root.join("objects");
        fs::create_dir_all(&objects).map_err(|e| StorageError::io(&objects, e))?;
        Ok(OntologyRepository {
            root: root.to_path_buf(),
        })
    }

    fn object_path(&self, id: &str) -> PathBuf {
        self.root.join("objects").join(format!("{id}.rdf"))
    }

    fn manifest_path(&self) -> PathBuf {
        self.root.join("manifest.jsonl")
    }

    /// Stores `bytes` and appends a manifest line.
    ///
    /// Storing identical bytes again reuses the existing object file; the
    /// manifest gains another line with the same id.
    pub fn put(&self, bytes: &[u8], source_url: &str, fetched_at: DateTime<Utc>) -> Result<OntologyBlob> {
        if bytes.is_empty() {
            return Err(StorageError::EmptyDocument);
        }
        let id = sha256_hex(bytes);
        let path = self.object_path(&id);
        let intact = match fs::read(&path) {
            Ok(existing) => sha256_hex(&existing) == id,
            Err(e) if e.kind() == ErrorKind::NotFound => false,
            Err(e) => return Err(StorageError::io(&path, e)),
        };
        if !intact {
            let tmp = path.with_extension("rdf.tmp");
            fs::write(&tmp, bytes)
                .and_then(|_| fs::rename(&tmp, &path))
                .map_err(|e| StorageError::io(&path, e))?;
        }

        let entry = ManifestEntry {
            id: id.clone(),
            source_url: source_url.to_string(),
            fetched_at: fetched_at.to_rfc3339_opts(SecondsFormat::Secs, true),
            size_bytes: bytes.len() as u64,
        };
        let mut line = serde_json::to_string(&entry).expect("manifest entry serializes");
        line.push('\n');
        let manifest = self.manifest_path();
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&manifest)
            .map_err(|e| StorageError::io(&manifest, e))?;
        file.write_all(line.as_bytes())
            .and_then(|_| file.sync_data())
            .map_err(|e| StorageError::io(&manifest, e))?;

        Ok(OntologyBlob {
            id,
            bytes: bytes.to_vec(),
            source_url: source_url.to_string(),
            fetched_at,
            size_bytes: bytes.len() as u64,
        })
    }

    /// Returns the stored bytes after re-checking their digest.
    pub fn get(&self, id: &str) -> Result<Vec<u8>> {
        if !is_digest(id) {
            return Err(StorageError::NotFound(id.to_string()));
        }
        let path = self.object_path(id);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == ErrorKind::NotFound => {
                return Err(StorageError::NotFound(id.to_string()))
            }
            Err(e) => return Err(StorageError::io(&path, e)),
        };
        let actual = sha256_hex(&bytes);
        if actual != id {
            return Err(StorageError::CorruptObject {
                id: id.to_string(),
                actual,
            });
        }
        Ok(bytes)
    }

    /// All manifest lines in append order. Unparseable lines are skipped.
    pub fn manifest(&self) -> Result<Vec<ManifestEntry>> {
        let path = self.manifest_path();
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(StorageError::io(&path, e)),
        };
        Ok(text
            .lines()
            .filter_map(|line| match serde_json::from_str(line) {
                Ok(entry) => Some(entry),
                Err(e) => {
                    if !line.trim().is_empty() {
                        log::warn!("{}: skipping manifest line: {e}", path.display());
                    }
                    None
                }
            })
            .collect())
    }

    /// Most recent manifest entry stored for `source_url`.
    pub fn lookup(&self, source_url: &str) -> Result<Option<ManifestEntry>> {
        Ok(self
            .manifest()?
            .into_iter()
            .rev()
            .find(|e| e.source_url == source_url))
    }

    /// Number of distinct object files.
    pub fn object_count(&self) -> Result<usize> {
        let dir = self.root.join("objects");
        let entries = fs::read_dir(&dir).map_err(|e| StorageError::io(&dir, e))?;
        let mut n = 0;
        for entry in entries {
            let entry = entry.map_err(|e| StorageError::io(&dir, e))?;
            let name = entry.file_name();
            let name = name.to_string_lossy();
            if name.strip_suffix(".rdf").is_some_and(is_digest) {
                n += 1;
            }
        }
        Ok(n)
    }
}
