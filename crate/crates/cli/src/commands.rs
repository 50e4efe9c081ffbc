use std::io::{self, Write};
use std::path::Path;
use std::time::Duration;

use owse_core::crawler::HttpTransport;
use owse_core::index::InvertedIndex;
use owse_core::storage::{load_index, scan_journal, StorageError};
use owse_core::{crawl, run_indexer, search, CrawlConfig, DataDir, OntologyRepository, UrlRepository};

use crate::{EXIT_EMPTY, EXIT_FAILURE, EXIT_USAGE};

const FETCH_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Storage(#[from] StorageError),
    #[error("index not found at {0}; run `owse index` first")]
    IndexNotFound(String),
    #[error("no matching ontologies")]
    Empty,
    #[error("cannot write output: {0}")]
    Output(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Empty => EXIT_EMPTY,
            CliError::Storage(_) | CliError::IndexNotFound(_) | CliError::Output(_) => EXIT_FAILURE,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CrawlArgs {
    pub seeds: Vec<String>,
    pub max_pages: u32,
    pub max_ontologies: u32,
    pub max_depth: u32,
    pub politeness_ms: u64,
    pub follow_ontology_links: bool,
    pub workers: usize,
}

impl CrawlArgs {
    fn config(&self) -> CrawlConfig {
        CrawlConfig {
            seeds: self.seeds.clone(),
            max_pages: self.max_pages,
            max_ontologies: self.max_ontologies,
            max_depth: self.max_depth,
            politeness: Duration::from_millis(self.politeness_ms),
            follow_ontology_links: self.follow_ontology_links,
            workers: self.workers,
        }
    }
}

pub fn cmd_crawl(data_dir: &Path, args: &CrawlArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let config = args.config();
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let data = DataDir::create(data_dir)?;
    let mut urls = UrlRepository::open(data.root())?;
    let ontologies = OntologyRepository::open(&data.ontology_dir())?;
    let transport = HttpTransport::new(FETCH_TIMEOUT);
    let report = crawl(&config, &transport, &mut urls, &ontologies).map_err(|e| match e {
        owse_core::crawler::CrawlError::Config(msg) => CliError::Usage(msg),
        owse_core::crawler::CrawlError::Storage(e) => CliError::Storage(e),
    })?;

    writeln!(out, "pages_fetched: {}", report.pages_fetched)?;
    writeln!(out, "ontologies_found: {}", report.ontologies_found)?;
    writeln!(out, "errors: {}", report.errors.len())?;
    for failure in &report.errors {
        writeln!(out, "  {} {}", failure.url, failure.kind)?;
    }
    writeln!(out, "disallowed: {}", report.disallowed.len())?;
    writeln!(out, "stop_reason: {}", report.stop_reason)?;
    writeln!(out, "elapsed_ms: {}", report.elapsed_ms)?;
    Ok(())
}

pub fn cmd_index(data_dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let data = DataDir::create(data_dir)?;
    let transport = HttpTransport::new(FETCH_TIMEOUT);
    let report = run_indexer(&data, &transport)?;
    for warning in &report.warnings {
        writeln!(out, "warning: {warning}")?;
    }
    writeln!(out, "indexed: {} skipped: {}", report.indexed, report.skipped)?;
    writeln!(out, "terms: {}", report.terms)?;
    Ok(())
}

fn open_index(data: &DataDir) -> Result<InvertedIndex, CliError> {
    let path = data.index_file();
    match load_index(&path) {
        Ok(snapshot) => Ok(InvertedIndex::from_snapshot(snapshot)),
        Err(StorageError::Io { source, .. }) if source.kind() == io::ErrorKind::NotFound => {
            Err(CliError::IndexNotFound(path.display().to_string()))
        }
        Err(e @ StorageError::VersionMismatch { .. }) => Err(CliError::Storage(StorageError::CorruptIndex {
            path,
            reason: e.to_string(),
        })),
        Err(e) => Err(e.into()),
    }
}

/// Prints one line per hit: rank, score, URL and the matched terms.
pub fn cmd_query(data_dir: &Path, keywords: &str, top_k: usize, out: &mut dyn Write) -> Result<(), CliError> {
    if top_k == 0 {
        return Err(CliError::Usage("--top-k must be at least 1".into()));
    }
    let index = open_index(&DataDir::new(data_dir))?;
    let results = search(keywords, &index, top_k);
    if results.hits.is_empty() {
        return Err(CliError::Empty);
    }
    for (rank, hit) in results.hits.iter().enumerate() {
        let mut terms: Vec<&str> = Vec::new();
        for m in &hit.matched {
            if !terms.contains(&m.term.as_str()) {
                terms.push(&m.term);
            }
        }
        writeln!(out, "{}\t{:.4}\t{}\t{}", rank + 1, hit.score, hit.url, terms.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub urls: usize,
    pub blobs: usize,
    pub docs: u32,
    pub terms: usize,
    pub postings: usize,
}

pub fn cmd_stats(data_dir: &Path, out: &mut dyn Write) -> Result<Stats, CliError> {
    let data = DataDir::create(data_dir)?;
    let urls = scan_journal(&data.url_journal())?.records.len();
    let blobs = OntologyRepository::open(&data.ontology_dir())?.object_count()?;
    let index = match open_index(&data) {
        Ok(index) => index,
        Err(CliError::IndexNotFound(_)) => InvertedIndex::default(),
        Err(e) => return Err(e),
    };
    let stats = Stats {
        urls,
        blobs,
        docs: index.doc_count(),
        terms: index.postings.len(),
        postings: index.total_postings(),
    };
    writeln!(out, "urls: {}", stats.urls)?;
    writeln!(out, "blobs: {}", stats.blobs)?;
    writeln!(out, "docs: {}", stats.docs)?;
    writeln!(out, "terms: {}", stats.terms)?;
    writeln!(out, "postings: {}", stats.postings)?;
    Ok(stats)
}
