use chrono::Utc;
use url::Url;

use super::build_index;
use crate::crawler::Transport;
use crate::rdf::{parse_rdfxml, summarize_ontology, OntologySummary};
use crate::storage::{
    save_index, scan_journal, sha256_hex, DataDir, JournalIssue, OntologyRepository, Result, StorageError, UrlRecord,
};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IndexReport {
    pub indexed: usize,
    pub skipped: usize,
    pub terms: usize,
    pub warnings: Vec<String>,
}

/// Rebuilds `index.json` from the URL journal.
///
/// Records are processed in journal order. Bytes come from the ontology
/// repository when the crawler stored them, otherwise from `transport`.
/// Documents that cannot be fetched or parsed are skipped with a warning.
pub fn run_indexer(data_dir: &DataDir, transport: &dyn Transport) -> Result<IndexReport> {
    let ontologies = OntologyRepository::open(&data_dir.ontology_dir())?;
    let journal = scan_journal(&data_dir.url_journal())?;
    let mut report = IndexReport::default();
    for issue in &journal.issues {
        report.warnings.push(match issue {
            JournalIssue::TornTail { line } => format!("journal line {line}: torn record ignored"),
            JournalIssue::Malformed { line, message } => format!("journal line {line}: {message}"),
        });
    }

    let mut summaries = Vec::new();
    for record in &journal.records {
        match summarize_record(record, &ontologies, transport) {
            Ok(summary) => summaries.push(summary),
            Err(Skip::Storage(e)) => return Err(e),
            Err(Skip::Document(reason)) => {
                log::warn!("skipping {}: {reason}", record.url);
                report.skipped += 1;
                report.warnings.push(format!("{}: {reason}", record.url));
            }
        }
    }

    let index = build_index(&summaries);
    std::fs::create_dir_all(data_dir.root()).map_err(|e| StorageError::io(data_dir.root(), e))?;
    save_index(&index.to_snapshot(), &data_dir.index_file())?;
    report.indexed = summaries.len();
    report.terms = index.postings.len();
    Ok(report)
}

enum Skip {
    Document(String),
    Storage(StorageError),
}

fn summarize_record(
    record: &UrlRecord,
    ontologies: &OntologyRepository,
    transport: &dyn Transport,
) -> std::result::Result<OntologySummary, Skip> {
    let url = Url::parse(&record.url).map_err(|e| Skip::Document(format!("bad url: {e}")))?;
    let stored = ontologies.lookup(&record.url).map_err(Skip::Storage)?;
    let (bytes, fetched) = match stored.map(|entry| ontologies.get(&entry.id)) {
        Some(Ok(bytes)) => (bytes, false),
        Some(Err(StorageError::CorruptObject { id, .. })) => {
            log::warn!("stored object {id} is corrupt; refetching {url}");
            (fetch(transport, &url)?, true)
        }
        Some(Err(e)) => return Err(Skip::Storage(e)),
        None => (fetch(transport, &url)?, true),
    };
    if bytes.is_empty() {
        return Err(Skip::Document("empty document".into()));
    }
    let triples = parse_rdfxml(&bytes, &url).map_err(|e| Skip::Document(e.to_string()))?;
    let blob_id = if fetched {
        ontologies
            .put(&bytes, &record.url, Utc::now())
            .map_err(Skip::Storage)?
            .id
    } else {
        sha256_hex(&bytes)
    };
    Ok(summarize_ontology(&triples, &record.url, &blob_id, bytes.len() as u64))
}

fn fetch(transport: &dyn Transport, url: &Url) -> std::result::Result<Vec<u8>, Skip> {
    let response = transport
        .get(url)
        .map_err(|e| Skip::Document(format!("fetch failed: {e}")))?;
    if !response.is_success() {
        return Err(Skip::Document(format!("HTTP status {}", response.status)));
    }
    if response.truncated {
        return Err(Skip::Document("document exceeds the size cap".into()));
    }
    Ok(response.body)
}
