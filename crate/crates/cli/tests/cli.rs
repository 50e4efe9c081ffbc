use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Duration;

use owse_cli::FixtureServer;
use owse_core::crawler::HttpTransport;
use owse_core::Transport;
use url::Url;

fn webroot() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/webroot")
}

fn owse(args: &[&str], data_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_owse"))
        .args(args)
        .arg("--data-dir")
        .arg(data_dir)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn get(srv: &FixtureServer, path: &str) -> (u16, String) {
    let t = HttpTransport::new(Duration::from_secs(5));
    let r = t.get(&Url::parse(&srv.url(path)).unwrap()).unwrap();
    (r.status, r.content_type)
}

#[test]
fn fixture_server_content_types() {
    let srv = FixtureServer::start(&webroot(), 0).unwrap();
    assert_eq!(get(&srv, "/index.html"), (200, "text/html; charset=utf-8".into()));
    assert_eq!(get(&srv, "/onts/library.rdf"), (200, "application/rdf+xml".into()));
    assert_eq!(get(&srv, "/robots.txt").0, 200);
    assert_eq!(get(&srv, "/missing").0, 404);
    assert_eq!(get(&srv, "/onts/notes.ttl").1, "application/octet-stream");
    let log = srv.requests();
    assert_eq!(log.len(), 5);
    assert_eq!(log[3].to_string(), "GET /missing 404");
}

#[test]
fn fixture_root_must_exist() {
    assert!(FixtureServer::start(Path::new("/nonexistent/webroot"), 0).is_err());
}

#[test]
fn crawl_flag_validation() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("d");
    assert_eq!(owse(&["crawl"], &dir).status.code(), Some(2));
    assert_eq!(
        owse(&["crawl", "--seed", "http://127.0.0.1:1/", "--max-pages", "0"], &dir).status.code(),
        Some(2)
    );
    assert_eq!(owse(&["crawl", "--seed", "ftp://x/"], &dir).status.code(), Some(2));
    assert!(!dir.exists());
}

#[test]
fn pipeline_through_the_binary() {
    let srv = FixtureServer::start(&webroot(), 0).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("data");
    let seed = srv.url("/index.html");

    let crawl = owse(&["crawl", "--seed", &seed, "--politeness-ms", "0", "--follow-ontology-links"], &dir);
    assert_eq!(crawl.status.code(), Some(0));
    assert!(stdout(&crawl).contains("ontologies_found: 4"), "{}", stdout(&crawl));

    let index = owse(&["index"], &dir);
    assert_eq!(index.status.code(), Some(0));
    assert!(stdout(&index).contains("indexed: 4 skipped: 0"));

    let query = owse(&["query", "book"], &dir);
    assert_eq!(query.status.code(), Some(0));
    let first = stdout(&query).lines().next().unwrap().to_string();
    let cols: Vec<&str> = first.split('\t').collect();
    assert_eq!(cols[0], "1");
    assert_eq!(cols[2], srv.url("/onts/library.rdf"));
    assert_eq!(cols[3], "book");
    assert!(cols[1].split('.').nth(1).is_some_and(|d| d.len() == 4));

    let none = owse(&["query", "zzzz"], &dir);
    assert_eq!(none.status.code(), Some(3));
    assert!(stdout(&none).is_empty());

    let stats = owse(&["stats"], &dir);
    assert!(stdout(&stats).contains("docs: 4"));
}

#[test]
fn index_on_missing_dir_creates_empty_index() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("fresh");
    let out = owse(&["index"], &dir);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("indexed: 0"));
    assert!(dir.join("index.json").is_file());
}

#[test]
fn query_before_index_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let out = owse(&["query", "pizza"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("index not found"));
}

#[test]
fn corrupt_index_is_reported_by_stats() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("index.json"), "[]").unwrap();
    let out = owse(&["stats"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("index.json"));
}
