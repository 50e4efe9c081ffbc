//! Static file server for the fixture web site.

use std::io;
use std::net::SocketAddr;
use std::path::{Component, Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use owse_core::crawler::content_type_for_path;
use tiny_http::{Header, Response, Server};

const HANDLER_THREADS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestLine {
    pub method: String,
    pub path: String,
    pub status: u16,
}

impl std::fmt::Display for RequestLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {} {}", self.method, self.path, self.status)
    }
}

type Sink = Arc<dyn Fn(&RequestLine) + Send + Sync>;

pub struct FixtureServer {
    server: Arc<Server>,
    addr: SocketAddr,
    requests: Arc<Mutex<Vec<RequestLine>>>,
    handlers: Vec<JoinHandle<()>>,
}

impl FixtureServer {
    /// Serves `root` on 127.0.0.1:`port`; port 0 picks a free one.
    pub fn start(root: &Path, port: u16) -> io::Result<Self> {
        Self::start_with_sink(root, port, Arc::new(|_: &RequestLine| {}))
    }

    /// Like [`start`](Self::start), calling `sink` once per answered request.
    pub fn start_with_sink(root: &Path, port: u16, sink: Sink) -> io::Result<Self> {
        let root = root.canonicalize()?;
        if !root.is_dir() {
            return Err(io::Error::new(io::ErrorKind::NotFound, format!("{} is not a directory", root.display())));
        }
        let server = Server::http(("127.0.0.1", port)).map_err(io::Error::other)?;
        let addr = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| io::Error::other("server is not bound to an IP address"))?;
        let server = Arc::new(server);
        let requests = Arc::new(Mutex::new(Vec::new()));
        let handlers = (0..HANDLER_THREADS)
            .map(|_| {
                let server = Arc::clone(&server);
                let requests = Arc::clone(&requests);
                let sink = Arc::clone(&sink);
                let root = root.clone();
                std::thread::spawn(move || {
                    while let Ok(request) = server.recv() {
                        let line = serve(&root, request);
                        sink(&line);
                        requests.lock().expect("request log").push(line);
                    }
                })
            })
            .collect();
        Ok(FixtureServer {
            server,
            addr,
            requests,
            handlers,
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// `http://127.0.0.1:<port>/`
    pub fn base_url(&self) -> String {
        format!("http://{}/", self.addr)
    }

    pub fn url(&self, path: &str) -> String {
        format!("http://{}/{}", self.addr, path.trim_start_matches('/'))
    }

    pub fn requests(&self) -> Vec<RequestLine> {
        self.requests.lock().expect("request log").clone()
    }

    /// Blocks until the server is shut down from another thread or the
    /// process exits.
    pub fn wait(mut self) {
        for handle in self.handlers.drain(..) {
            let _ = handle.join();
        }
    }
}

impl Drop for FixtureServer {
    fn drop(&mut self) {
        for _ in 0..self.handlers.len() {
            self.server.unblock();
        }
        for handle in self.handlers.drain(..) {
            let _ = handle.join();
        }
    }
}

/// Maps a request path onto a file under `root`, refusing anything that
/// would leave it.
fn resolve(root: &Path, url_path: &str) -> Option<PathBuf> {
    let path = url_path.split(['?', '#']).next().unwrap_or_default();
    let mut file = root.to_path_buf();
    for component in Path::new(path.trim_start_matches('/')).components() {
        match component {
            Component::Normal(part) => file.push(part),
            Component::CurDir => {}
            _ => return None,
        }
    }
    if file.is_dir() {
        file.push("index.html");
    }
    file.is_file().then_some(file)
}

fn serve(root: &Path, request: tiny_http::Request) -> RequestLine {
    let method = request.method().to_string();
    let path = request.url().to_string();
    let found = resolve(root, &path).and_then(|file| std::fs::read(&file).ok().map(|body| (file, body)));
    let (status, response) = match found {
        Some((file, body)) => {
            let content_type = content_type_for_path(&file.to_string_lossy());
            let header = Header::from_bytes("Content-Type", content_type).expect("valid header");
            (200, Response::from_data(body).with_header(header))
        }
        None => (404, Response::from_string("not found").with_status_code(404)),
    };
    if let Err(e) = request.respond(response) {
        log::debug!("fixture: failed to answer {path}: {e}");
    }
    RequestLine { method, path, status }
}
