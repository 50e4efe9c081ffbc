use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, SubsecRound, Utc};
use serde::{Deserialize, Serialize};

use super::{Result, StorageError};
use crate::crawler::normalize_url;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Ontology,
}

/// One discovered ontology URL, as journaled in `urls.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrlRecord {
    pub url: String,
    /// Page the URL was found on; empty for seeds.
    pub referrer: String,
    pub depth: u32,
    #[serde(with = "rfc3339_seconds")]
    pub discovered_at: DateTime<Utc>,
    pub kind: RecordKind,
}

impl UrlRecord {
    pub fn ontology(url: impl Into<String>, referrer: impl Into<String>, depth: u32) -> Self {
        UrlRecord {
            url: url.into(),
            referrer: referrer.into(),
            depth,
            discovered_at: Utc::now().trunc_subsecs(0),
            kind: RecordKind::Ontology,
        }
    }
}

mod rfc3339_seconds {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::Secs, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&raw)
            .map(|t| t.with_timezone(&Utc))
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JournalIssue {
    /// Final line without a newline terminator, left behind by an interrupted append.
    TornTail { line: usize },
    Malformed { line: usize, message: String },
}

#[derive(Debug, Clone, Default)]
pub struct JournalScan {
    pub records: Vec<UrlRecord>,
    pub issues: Vec<JournalIssue>,
}

/// Append-only, duplicate-free journal of ontology URLs.
///
/// Single writer per process. Each record is written with one `write_all`
/// of a newline-terminated JSON line on an `O_APPEND` handle followed by
/// `sync_data`, so readers only ever see whole lines plus at most one torn
/// tail after a crash.
#[derive(Debug)]
pub struct UrlRepository {
    path: PathBuf,
    seen: HashSet<String>,
    len: usize,
}

impl UrlRepository {
    /// Opens (creating if needed) the journal at `<dir>/urls.jsonl`.
    ///
    /// A torn trailing line is cut off so that the next append starts on a
    /// fresh line.
    pub fn open(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| StorageError::io(dir, e))?;
        let path = dir.join("urls.jsonl");
        let (scan, complete_len) = scan_file(&path)?;
        if let Some(complete_len) = complete_len {
            let file = OpenOptions::new()
                .write(true)
                .open(&path)
                .map_err(|e| StorageError::io(&path, e))?;
            file.set_len(complete_len).map_err(|e| StorageError::io(&path, e))?;
            log::warn!("{}: dropped torn trailing record", path.display());
        }
        let seen: HashSet<String> = scan.records.iter().map(|r| canonical_key(&r.url)).collect();
        Ok(UrlRepository {
            path,
            len: scan.records.len(),
            seen,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Number of records in the journal.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, url: &str) -> bool {
        self.seen.contains(&canonical_key(url))
    }

    /// Appends `record` unless its canonical URL is already journaled.
    ///
    /// The stored `url` is the canonical form.
    pub fn append(&mut self, record: &UrlRecord) -> Result<bool> {
        let canonical = normalize_url(&record.url, None)
            .map_err(|e| StorageError::InvalidRecord(format!("{}: {e}", record.url)))?;
        if !record.referrer.is_empty() && normalize_url(&record.referrer, None).is_err() {
            return Err(StorageError::InvalidRecord(format!(
                "referrer {} is not an absolute http(s) URL",
                record.referrer
            )));
        }
        let key = canonical.to_string();
        if self.seen.contains(&key) {
            return Ok(false);
        }
        let stored = UrlRecord {
            url: key.clone(),
            ..record.clone()
        };
        let mut line = serde_json::to_string(&stored)
            .map_err(|e| StorageError::InvalidRecord(e.to_string()))?;
        line.push('\n');

        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| StorageError::io(&self.path, e))?;
        file.write_all(line.as_bytes())
            .and_then(|_| file.sync_data())
            .map_err(|e| StorageError::io(&self.path, e))?;
        self.seen.insert(key);
        self.len += 1;
        Ok(true)
    }

    /// Reads every record in append order. See [`scan_journal`].
    pub fn scan(&self) -> Result<JournalScan> {
        scan_journal(&self.path)
    }
}

/// Reads a journal file in append order.
///
/// A missing file is an empty journal. A trailing line without a newline is
/// reported as [`JournalIssue::TornTail`] and skipped; any other line that
/// fails to parse is reported with its 1-based line number and skipped.
pub fn scan_journal(path: &Path) -> Result<JournalScan> {
    scan_file(path).map(|(scan, _)| scan)
}

fn canonical_key(url: &str) -> String {
    normalize_url(url, None)
        .map(|u| u.to_string())
        .unwrap_or_else(|_| url.to_string())
}

/// Returns the scan plus, if the file ends in a torn line, the byte length
/// of its complete prefix.
fn scan_file(path: &Path) -> Result<(JournalScan, Option<u64>)> {
    let mut raw = Vec::new();
    match File::open(path) {
        Ok(mut f) => {
            f.read_to_end(&mut raw).map_err(|e| StorageError::io(path, e))?;
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Ok((JournalScan::default(), None));
        }
        Err(e) => return Err(StorageError::io(path, e)),
    }

    let mut scan = JournalScan::default();
    let mut torn = None;
    let mut offset = 0usize;
    let mut line_no = 0usize;
    while offset < raw.len() {
        line_no += 1;
        let rest = &raw[offset..];
        let Some(nl) = rest.iter().position(|&b| b == b'\n') else {
            log::warn!("{}: skipping torn line {line_no}", path.display());
            scan.issues.push(JournalIssue::TornTail { line: line_no });
            torn = Some(offset as u64);
            break;
        };
        let line = String::from_utf8_lossy(&rest[..nl]);
        offset += nl + 1;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<UrlRecord>(&line) {
            Ok(record) => scan.records.push(record),
            Err(e) => {
                log::warn!("{}:{line_no}: malformed record: {e}", path.display());
                scan.issues.push(JournalIssue::Malformed {
                    line: line_no,
                    message: e.to_string(),
                });
            }
        }
    }
    Ok((scan, torn))
}
