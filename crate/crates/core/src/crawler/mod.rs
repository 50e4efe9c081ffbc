//! Breadth-first, polite crawler that discovers ontology URLs by browsing
//! HTML pages and, optionally, by following `owl:imports`/`rdfs:seeAlso`
//! references inside the ontologies it finds.

mod classify;
mod links;
mod robots;
mod transport;
mod url;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::{Condvar, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use ::url::Url;
use chrono::Utc;
use serde::Serialize;

use crate::rdf::{parse_rdfxml, vocab, Term, TripleSet};
use crate::storage::{OntologyRepository, StorageError, UrlRecord, UrlRepository};

pub use self::url::{host_key, normalize_url, UrlError};
pub use classify::{classify_resource, ResourceKind, SNIFF_WINDOW};
pub use links::extract_html_links;
pub use robots::RobotsRules;
pub use transport::{
    content_type_for_path, FetchError, FetchResponse, HttpTransport, RecordingTransport, RequestLogEntry,
    StaticTransport, Transport, DEFAULT_BODY_CAP, MAX_REDIRECTS, USER_AGENT,
};

#[derive(Debug, Clone)]
pub struct CrawlConfig {
    pub seeds: Vec<String>,
    /// Budget for non-ontology fetches, failed fetches included.
    pub max_pages: u32,
    pub max_ontologies: u32,
    /// Link hops from a seed; seeds are depth 0.
    pub max_depth: u32,
    /// Minimum gap between requests to the same host.
    pub politeness: Duration,
    pub follow_ontology_links: bool,
    pub workers: usize,
}

impl Default for CrawlConfig {
    fn default() -> Self {
        CrawlConfig {
            seeds: Vec::new(),
            max_pages: 100,
            max_ontologies: 100,
            max_depth: 3,
            politeness: Duration::from_millis(1000),
            follow_ontology_links: false,
            workers: 1,
        }
    }
}

impl CrawlConfig {
    /// Checks the configuration and returns the canonical seed URLs.
    pub fn validate(&self) -> Result<Vec<Url>, CrawlError> {
        if self.seeds.is_empty() {
            return Err(CrawlError::Config("at least one seed is required".into()));
        }
        if self.max_pages == 0 {
            return Err(CrawlError::Config("max_pages must be at least 1".into()));
        }
        if self.max_ontologies == 0 {
            return Err(CrawlError::Config("max_ontologies must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(CrawlError::Config("workers must be at least 1".into()));
        }
        self.seeds
            .iter()
            .map(|s| normalize_url(s, None).map_err(|e| CrawlError::Config(format!("seed {s}: {e}"))))
            .collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CrawlError {
    #[error("invalid crawl configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Storage(#[from] StorageError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    PageBudget,
    OntologyBudget,
    FrontierExhausted,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::PageBudget => "page_budget",
            StopReason::OntologyBudget => "ontology_budget",
            StopReason::FrontierExhausted => "frontier_exhausted",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailureKind {
    Status(u16),
    Fetch(FetchError),
    /// Ontology larger than the body cap; not stored.
    Oversize,
    EmptyDocument,
}

impl std::fmt::Display for FailureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FailureKind::Status(code) => write!(f, "http status {code}"),
            FailureKind::Fetch(e) => write!(f, "{e}"),
            FailureKind::Oversize => f.write_str("oversize document"),
            FailureKind::EmptyDocument => f.write_str("empty document"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrawlFailure {
    pub url: String,
    pub kind: FailureKind,
}

#[derive(Debug, Clone)]
pub struct CrawlReport {
    pub pages_fetched: u32,
    pub ontologies_found: u32,
    pub errors: Vec<CrawlFailure>,
    /// URLs skipped because robots.txt disallows them.
    pub disallowed: Vec<String>,
    pub stop_reason: StopReason,
    pub elapsed_ms: u64,
}

/// Objects of `owl:imports` and `rdfs:seeAlso` that are absolute http(s)
/// IRIs, deduplicated in first-occurrence order.
pub fn extract_ontology_refs(triples: &TripleSet) -> Vec<Url> {
    let mut seen = HashSet::new();
    triples
        .triples
        .iter()
        .filter(|t| t.predicate == vocab::OWL_IMPORTS || t.predicate == vocab::RDFS_SEE_ALSO)
        .filter_map(|t| match &t.object {
            Term::Iri(iri) => normalize_url(iri, None).ok(),
            _ => None,
        })
        .filter(|u| seen.insert(u.to_string()))
        .collect()
}

#[derive(Debug, Clone)]
struct Item {
    url: Url,
    depth: u32,
    referrer: String,
}

#[derive(Debug, Clone, Default)]
struct HostState {
    robots: Option<RobotsRules>,
    next_allowed: Option<Instant>,
}

enum Outcome {
    Disallowed,
    Failed(FailureKind),
    Page { final_url: Url, links: Vec<Url> },
    Ontology { final_url: Url, body: Vec<u8>, refs: Vec<Url> },
}

struct Shared<'r> {
    /// Pending fetches keyed by (depth, enqueue sequence).
    frontier: BTreeMap<(u32, u64), Item>,
    seq: u64,
    seen: HashSet<String>,
    fetched: HashSet<String>,
    found: HashSet<String>,
    busy_hosts: HashSet<String>,
    hosts: HashMap<String, HostState>,
    in_flight: u32,
    pages: u32,
    ontologies: u32,
    errors: Vec<CrawlFailure>,
    disallowed: Vec<String>,
    stop: Option<StopReason>,
    fatal: Option<StorageError>,
    urls: &'r mut UrlRepository,
}

impl Shared<'_> {
    fn enqueue(&mut self, url: Url, depth: u32, referrer: &str) {
        if self.seen.insert(url.to_string()) {
            self.seq += 1;
            self.frontier.insert(
                (depth, self.seq),
                Item {
                    url,
                    depth,
                    referrer: referrer.to_string(),
                },
            );
        }
    }
}

struct Crawl<'a, 'r> {
    config: &'a CrawlConfig,
    transport: &'a dyn Transport,
    ontologies: &'a OntologyRepository,
    state: Mutex<Shared<'r>>,
    wake: Condvar,
}

/// Runs one crawl.
///
/// The frontier is served in (depth, enqueue order); with `workers == 1`
/// that is exactly breadth-first order. With more workers at most one
/// request per host is in flight, and a worker only claims an item while
/// both budgets have room for every in-flight fetch, so neither budget can
/// be overshot. Politeness is measured from the end of the previous
/// request to a host, which bounds request starts by at least as much.
pub fn crawl(
    config: &CrawlConfig,
    transport: &dyn Transport,
    urls: &mut UrlRepository,
    ontologies: &OntologyRepository,
) -> Result<CrawlReport, CrawlError> {
    let seeds = config.validate()?;
    let started = Instant::now();

    let mut shared = Shared {
        frontier: BTreeMap::new(),
        seq: 0,
        seen: HashSet::new(),
        fetched: HashSet::new(),
        found: HashSet::new(),
        busy_hosts: HashSet::new(),
        hosts: HashMap::new(),
        in_flight: 0,
        pages: 0,
        ontologies: 0,
        errors: Vec::new(),
        disallowed: Vec::new(),
        stop: None,
        fatal: None,
        urls,
    };
    for seed in seeds {
        shared.enqueue(seed, 0, "");
    }

    let run = Crawl {
        config,
        transport,
        ontologies,
        state: Mutex::new(shared),
        wake: Condvar::new(),
    };
    if config.workers == 1 {
        run.worker();
    } else {
        std::thread::scope(|s| {
            for _ in 0..config.workers {
                s.spawn(|| run.worker());
            }
        });
    }

    let shared = run.state.into_inner().expect("crawl state lock");
    if let Some(e) = shared.fatal {
        return Err(e.into());
    }
    Ok(CrawlReport {
        pages_fetched: shared.pages,
        ontologies_found: shared.ontologies,
        errors: shared.errors,
        disallowed: shared.disallowed,
        stop_reason: shared.stop.unwrap_or(StopReason::FrontierExhausted),
        elapsed_ms: started.elapsed().as_millis() as u64,
    })
}

fn sleep_until(deadline: Option<Instant>) {
    if let Some(deadline) = deadline {
        let now = Instant::now();
        if deadline > now {
            std::thread::sleep(deadline - now);
        }
    }
}

impl<'r> Crawl<'_, 'r> {
    fn lock(&self) -> MutexGuard<'_, Shared<'r>> {
        self.state.lock().expect("crawl state lock")
    }

    fn worker(&self) {
        while let Some((item, host, mut host_state)) = self.claim() {
            let outcome = self.visit(&item, &mut host_state);
            self.complete(item, host, host_state, outcome);
        }
    }

    /// Blocks until an item can be dispatched; `None` when the crawl is over.
    fn claim(&self) -> Option<(Item, String, HostState)> {
        let mut st = self.lock();
        loop {
            if st.stop.is_some() || st.fatal.is_some() {
                return None;
            }
            if st.frontier.is_empty() && st.in_flight == 0 {
                st.stop = Some(StopReason::FrontierExhausted);
                self.wake.notify_all();
                return None;
            }
            let room = st.pages + st.in_flight < self.config.max_pages
                && st.ontologies + st.in_flight < self.config.max_ontologies;
            if room {
                let key = st
                    .frontier
                    .iter()
                    .find(|(_, item)| !st.busy_hosts.contains(&host_key(&item.url)))
                    .map(|(k, _)| *k);
                if let Some(key) = key {
                    let item = st.frontier.remove(&key).expect("key from frontier");
                    let host = host_key(&item.url);
                    st.busy_hosts.insert(host.clone());
                    st.in_flight += 1;
                    let host_state = st.hosts.get(&host).cloned().unwrap_or_default();
                    return Some((item, host, host_state));
                }
            }
            st = self.wake.wait(st).expect("crawl state lock");
        }
    }

    /// Network part of a visit; runs without holding the state lock.
    fn visit(&self, item: &Item, host: &mut HostState) -> Outcome {
        let politeness = self.config.politeness;
        if host.robots.is_none() {
            sleep_until(host.next_allowed);
            let robots_url = item.url.join("/robots.txt").expect("http URL joins");
            let rules = match self.transport.get(&robots_url) {
                Ok(r) if r.is_success() => RobotsRules::parse(&String::from_utf8_lossy(&r.body)),
                Ok(_) => RobotsRules::allow_all(),
                Err(e) => {
                    log::debug!("{robots_url}: {e}; assuming no restrictions");
                    RobotsRules::allow_all()
                }
            };
            host.next_allowed = Some(Instant::now() + politeness);
            host.robots = Some(rules);
        }
        let path = match item.url.query() {
            Some(q) => format!("{}?{q}", item.url.path()),
            None => item.url.path().to_string(),
        };
        if !host.robots.as_ref().is_some_and(|r| r.allows(&path)) {
            log::info!("robots.txt disallows {}", item.url);
            return Outcome::Disallowed;
        }

        sleep_until(host.next_allowed);
        log::debug!("GET {} (depth {})", item.url, item.depth);
        let fetched = self.transport.get(&item.url);
        host.next_allowed = Some(Instant::now() + politeness);
        let response = match fetched {
            Ok(r) => r,
            Err(e) => return Outcome::Failed(FailureKind::Fetch(e)),
        };
        if !response.is_success() {
            return Outcome::Failed(FailureKind::Status(response.status));
        }
        let final_url = normalize_url(response.url.as_str(), None).unwrap_or_else(|_| item.url.clone());
        let expand = item.depth < self.config.max_depth;
        match classify_resource(&final_url, &response.content_type, &response.body) {
            ResourceKind::Ontology => {
                if response.truncated {
                    return Outcome::Failed(FailureKind::Oversize);
                }
                let refs = if self.config.follow_ontology_links && expand {
                    match parse_rdfxml(&response.body, &final_url) {
                        Ok(triples) => extract_ontology_refs(&triples),
                        Err(e) => {
                            log::debug!("{final_url}: not followed: {e}");
                            Vec::new()
                        }
                    }
                } else {
                    Vec::new()
                };
                Outcome::Ontology {
                    final_url,
                    body: response.body,
                    refs,
                }
            }
            ResourceKind::Html => {
                let links = if expand {
                    extract_html_links(&response.body, &final_url)
                } else {
                    Vec::new()
                };
                Outcome::Page { final_url, links }
            }
            ResourceKind::Other => Outcome::Page {
                final_url,
                links: Vec::new(),
            },
        }
    }

    fn complete(&self, item: Item, host: String, host_state: HostState, outcome: Outcome) {
        let mut st = self.lock();
        st.hosts.insert(host.clone(), host_state);
        st.busy_hosts.remove(&host);
        st.in_flight -= 1;

        let requested = item.url.to_string();
        match outcome {
            Outcome::Disallowed => st.disallowed.push(requested),
            Outcome::Failed(kind) => {
                log::warn!("{}: {kind}", item.url);
                st.pages += 1;
                st.errors.push(CrawlFailure { url: requested, kind });
            }
            Outcome::Page { final_url, links } => {
                st.pages += 1;
                if st.fetched.insert(final_url.to_string()) {
                    st.seen.insert(final_url.to_string());
                    for link in links {
                        st.enqueue(link, item.depth + 1, final_url.as_str());
                    }
                }
            }
            Outcome::Ontology { final_url, body, refs } => {
                let key = final_url.to_string();
                if !st.fetched.insert(key.clone()) {
                    // Redirected onto something already visited.
                    st.pages += 1;
                } else {
                    st.seen.insert(key.clone());
                    match self.store_ontology(&mut st, &item, &final_url, &body) {
                        Ok(()) => {
                            if st.found.insert(key) {
                                st.ontologies += 1;
                                log::info!("ontology {final_url} (depth {})", item.depth);
                            }
                            for target in refs {
                                st.enqueue(target, item.depth + 1, final_url.as_str());
                            }
                        }
                        Err(StorageError::EmptyDocument) => {
                            st.pages += 1;
                            st.errors.push(CrawlFailure {
                                url: key,
                                kind: FailureKind::EmptyDocument,
                            });
                        }
                        Err(e) => st.fatal = Some(e),
                    }
                }
            }
        }

        if st.stop.is_none() {
            if st.ontologies >= self.config.max_ontologies {
                st.stop = Some(StopReason::OntologyBudget);
            } else if st.pages >= self.config.max_pages {
                st.stop = Some(StopReason::PageBudget);
            }
        }
        self.wake.notify_all();
    }

    fn store_ontology(
        &self,
        st: &mut Shared<'_>,
        item: &Item,
        final_url: &Url,
        body: &[u8],
    ) -> Result<(), StorageError> {
        let now = Utc::now();
        self.ontologies.put(body, final_url.as_str(), now)?;
        let record = UrlRecord::ontology(final_url.as_str(), item.referrer.as_str(), item.depth);
        st.urls.append(&record)?;
        Ok(())
    }
}
