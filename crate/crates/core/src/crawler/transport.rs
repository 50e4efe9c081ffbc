//! Fetch capability used by the crawler and the indexer.
//!
//! [`HttpTransport`] talks to the network. [`StaticTransport`] serves an
//! in-memory or on-disk site and [`RecordingTransport`] wraps any transport
//! and logs request starts, so tests can check ordering and politeness.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use ureq::ResponseExt;
use url::Url;

use super::url::host_key;

pub const USER_AGENT: &str = "owse-crawler/1.0";
pub const DEFAULT_BODY_CAP: usize = 8 * 1024 * 1024;
pub const MAX_REDIRECTS: u32 = 5;

#[derive(Debug, Clone)]
pub struct FetchResponse {
    /// Final URL after redirects.
    pub url: Url,
    pub status: u16,
    pub content_type: String,
    /// At most the transport's body cap.
    pub body: Vec<u8>,
    /// Set when the body was cut at the cap.
    pub truncated: bool,
    pub started_at: Instant,
}

impl FetchResponse {
    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FetchError {
    #[error("timed out")]
    Timeout,
    #[error("more than {MAX_REDIRECTS} redirects")]
    TooManyRedirects,
    #[error("connection failed: {0}")]
    Connect(String),
    #[error("{0}")]
    Other(String),
}

pub trait Transport: Send + Sync {
    fn get(&self, url: &Url) -> Result<FetchResponse, FetchError>;
}

impl<T: Transport + ?Sized> Transport for &T {
    fn get(&self, url: &Url) -> Result<FetchResponse, FetchError> {
        (**self).get(url)
    }
}

/// Content type served for a file path by the fixture server and
/// [`StaticTransport::from_dir`].
pub fn content_type_for_path(path: &str) -> &'static str {
    let lower = path.to_ascii_lowercase();
    if lower.ends_with(".html") || lower.ends_with(".htm") {
        "text/html; charset=utf-8"
    } else if lower.ends_with(".owl") || lower.ends_with(".rdf") {
        "application/rdf+xml"
    } else if lower.ends_with(".txt") {
        "text/plain; charset=utf-8"
    } else {
        "application/octet-stream"
    }
}

/// Blocking HTTP(S) transport: follows up to five redirects, reads at most
/// `body_cap` bytes of each body.
#[derive(Debug)]
pub struct HttpTransport {
    agent: ureq::Agent,
    body_cap: usize,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .max_redirects(MAX_REDIRECTS)
            .http_status_as_error(false)
            .user_agent(USER_AGENT)
            .build()
            .into();
        HttpTransport {
            agent,
            body_cap: DEFAULT_BODY_CAP,
        }
    }

    pub fn with_body_cap(mut self, cap: usize) -> Self {
        self.body_cap = cap;
        self
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        HttpTransport::new(Duration::from_secs(30))
    }
}

fn map_ureq_error(e: ureq::Error) -> FetchError {
    match e {
        ureq::Error::Timeout(_) => FetchError::Timeout,
        ureq::Error::TooManyRedirects => FetchError::TooManyRedirects,
        ureq::Error::ConnectionFailed | ureq::Error::HostNotFound => FetchError::Connect(e.to_string()),
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => FetchError::Timeout,
        ureq::Error::Io(io) => FetchError::Connect(io.to_string()),
        other => FetchError::Other(other.to_string()),
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &Url) -> Result<FetchResponse, FetchError> {
        let started_at = Instant::now();
        let mut response = self.agent.get(url.as_str()).call().map_err(map_ureq_error)?;
        let status = response.status().as_u16();
        let content_type = response
            .headers()
            .get("content-type")
            .and_then(|v| v.to_str().ok())
            .unwrap_or_default()
            .to_string();
        let final_url = Url::parse(&response.get_uri().to_string()).unwrap_or_else(|_| url.clone());

        let mut body = Vec::new();
        response
            .body_mut()
            .as_reader()
            .take(self.body_cap as u64 + 1)
            .read_to_end(&mut body)
            .map_err(|e| {
                if e.kind() == std::io::ErrorKind::TimedOut {
                    FetchError::Timeout
                } else {
                    FetchError::Other(e.to_string())
                }
            })?;
        let truncated = body.len() > self.body_cap;
        body.truncate(self.body_cap);
        Ok(FetchResponse {
            url: final_url,
            status,
            content_type,
            body,
            truncated,
            started_at,
        })
    }
}

#[derive(Debug, Clone)]
struct StaticEntry {
    status: u16,
    content_type: String,
    body: Vec<u8>,
}

/// Serves a fixed set of URLs from memory. Unknown URLs answer 404; a URL
/// whose path ends in `/` falls back to `<path>index.html`.
#[derive(Debug, Default)]
pub struct StaticTransport {
    entries: HashMap<String, StaticEntry>,
    redirects: HashMap<String, String>,
}

impl StaticTransport {
    pub fn new() -> Self {
        StaticTransport::default()
    }

    pub fn insert(&mut self, url: &str, status: u16, content_type: &str, body: impl Into<Vec<u8>>) {
        let key = Url::parse(url).expect("static transport URL").to_string();
        self.entries.insert(
            key,
            StaticEntry {
                status,
                content_type: content_type.to_string(),
                body: body.into(),
            },
        );
    }

    /// Makes `from` answer with the content of `to` and `to` as final URL.
    pub fn redirect(&mut self, from: &str, to: &str) {
        let from = Url::parse(from).expect("redirect source").to_string();
        let to = Url::parse(to).expect("redirect target").to_string();
        self.redirects.insert(from, to);
    }

    /// Serves every file under `root` at `base` joined with its relative
    /// path, using [`content_type_for_path`].
    pub fn from_dir(base: &Url, root: &Path) -> std::io::Result<Self> {
        let mut transport = StaticTransport::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(dir) = stack.pop() {
            for entry in std::fs::read_dir(&dir)? {
                let path = entry?.path();
                if path.is_dir() {
                    stack.push(path);
                    continue;
                }
                let rel = path
                    .strip_prefix(root)
                    .expect("walked path is under root")
                    .components()
                    .map(|c| c.as_os_str().to_string_lossy().into_owned())
                    .collect::<Vec<_>>()
                    .join("/");
                let url = base.join(&rel).map_err(std::io::Error::other)?;
                let body = std::fs::read(&path)?;
                transport.insert(url.as_str(), 200, content_type_for_path(&rel), body);
            }
        }
        Ok(transport)
    }
}

impl Transport for StaticTransport {
    fn get(&self, url: &Url) -> Result<FetchResponse, FetchError> {
        let started_at = Instant::now();
        let mut target = url.clone();
        target.set_fragment(None);
        let mut hops = 0;
        while let Some(next) = self.redirects.get(target.as_str()) {
            hops += 1;
            if hops > MAX_REDIRECTS {
                return Err(FetchError::TooManyRedirects);
            }
            target = Url::parse(next).expect("stored redirect");
        }
        let entry = self.entries.get(target.as_str()).or_else(|| {
            target
                .path()
                .ends_with('/')
                .then(|| target.join("index.html").ok())
                .flatten()
                .and_then(|u| self.entries.get(u.as_str()))
        });
        Ok(match entry {
            Some(e) => FetchResponse {
                url: target,
                status: e.status,
                content_type: e.content_type.clone(),
                body: e.body.clone(),
                truncated: false,
                started_at,
            },
            None => FetchResponse {
                url: target,
                status: 404,
                content_type: "text/plain".into(),
                body: b"not found".to_vec(),
                truncated: false,
                started_at,
            },
        })
    }
}

#[derive(Debug, Clone)]
pub struct RequestLogEntry {
    pub url: Url,
    pub host: String,
    pub started_at: Instant,
}

/// Wraps a transport and records the start of every request.
#[derive(Debug)]
pub struct RecordingTransport<T> {
    inner: T,
    log: Mutex<Vec<RequestLogEntry>>,
}

impl<T: Transport> RecordingTransport<T> {
    pub fn new(inner: T) -> Self {
        RecordingTransport {
            inner,
            log: Mutex::new(Vec::new()),
        }
    }

    pub fn log(&self) -> Vec<RequestLogEntry> {
        self.log.lock().expect("log lock").clone()
    }

    /// Request paths (with query) in start order.
    pub fn paths(&self) -> Vec<String> {
        self.log()
            .into_iter()
            .map(|e| match e.url.query() {
                Some(q) => format!("{}?{q}", e.url.path()),
                None => e.url.path().to_string(),
            })
            .collect()
    }
}

impl<T: Transport> Transport for RecordingTransport<T> {
    fn get(&self, url: &Url) -> Result<FetchResponse, FetchError> {
        self.log.lock().expect("log lock").push(RequestLogEntry {
            url: url.clone(),
            host: host_key(url),
            started_at: Instant::now(),
        });
        self.inner.get(url)
    }
}
