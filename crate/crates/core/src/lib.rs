//! Ontology web search: discover OWL ontologies by crawling HTML pages,
//! store them in a content-addressed repository, index their classes,
//! properties and relations, and answer keyword queries with ranked
//! ontology URLs.
//!
//! The pipeline runs in three phases that communicate only through the
//! data directory:
//!
//! 1. [`crawler::crawl`] fills the URL journal (`urls.jsonl`) and the
//!    ontology repository (`ontologies/`).
//! 2. [`index::run_indexer`] drains the journal in order and writes
//!    `index.json`.
//! 3. [`query::search`] ranks ontologies against a loaded index.

pub mod crawler;
pub mod index;
pub mod query;
pub mod rdf;
pub mod storage;

pub use crawler::{
    crawl, CrawlConfig, CrawlReport, FetchError, FetchResponse, HttpTransport, ResourceKind,
    StaticTransport, StopReason, Transport,
};
pub use index::{build_index, run_indexer, tokenize, FieldKind, IndexReport, InvertedIndex, Posting};
pub use query::{search, ScoredHit, SearchResults};
pub use rdf::{parse_rdfxml, summarize_ontology, OntologySummary, TripleSet};
pub use storage::{DataDir, IndexSnapshot, OntologyRepository, UrlRecord, UrlRepository};
