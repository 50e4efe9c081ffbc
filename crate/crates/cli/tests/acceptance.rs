//! End-to-end acceptance checks against the fixture web site.
//!
//! Runs as a plain binary and prints one PASS/FAIL line per criterion.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use owse_cli::FixtureServer;
use owse_core::crawler::{HttpTransport, RecordingTransport};
use owse_core::index::{FieldKind, InvertedIndex, Posting};
use owse_core::rdf::{parse_rdfxml, summarize_ontology, OntologySummary};
use owse_core::storage::{load_index, save_index, DocEntry, IndexSnapshot, UrlRecord, INDEX_FORMAT_VERSION};
use owse_core::{
    crawl, run_indexer, search, CrawlConfig, CrawlReport, DataDir, OntologyRepository, StopReason, UrlRepository,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use serde_json::Value;
use url::Url;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn expected(name: &str) -> Value {
    let text = std::fs::read_to_string(fixtures().join("expected").join(name)).expect("expectations file");
    serde_json::from_str(&text).expect("expectations parse")
}

fn server() -> FixtureServer {
    FixtureServer::start(&fixtures().join("webroot"), 0).expect("fixture server starts")
}

fn transport() -> HttpTransport {
    HttpTransport::new(Duration::from_secs(10))
}

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        if $cond {
        } else {
            return Err(format!($($msg)+));
        }
    };
}

struct CrawlRun {
    report: CrawlReport,
    journal: Vec<UrlRecord>,
}

fn crawl_into(data: &DataDir, srv: &FixtureServer, config: CrawlConfig, t: &dyn owse_core::Transport) -> CrawlRun {
    let mut urls = UrlRepository::open(data.root()).expect("journal opens");
    let blobs = OntologyRepository::open(&data.ontology_dir()).expect("repository opens");
    let config = CrawlConfig {
        seeds: vec![srv.url("/index.html")],
        ..config
    };
    let report = crawl(&config, t, &mut urls, &blobs).expect("crawl completes");
    CrawlRun {
        report,
        journal: urls.scan().expect("journal scans").records,
    }
}

fn config(max_pages: u32, max_depth: u32, politeness_ms: u64, follow: bool) -> CrawlConfig {
    CrawlConfig {
        max_pages,
        max_ontologies: 100,
        max_depth,
        politeness: Duration::from_millis(politeness_ms),
        follow_ontology_links: follow,
        workers: 1,
        ..CrawlConfig::default()
    }
}

fn paths(records: &[UrlRecord]) -> Vec<String> {
    records
        .iter()
        .map(|r| Url::parse(&r.url).expect("journal url").path().to_string())
        .collect()
}

fn strings(v: &Value) -> Vec<String> {
    v.as_array()
        .expect("array")
        .iter()
        .map(|s| s.as_str().expect("string").to_string())
        .collect()
}

fn discovery() -> Outcome {
    let exp = expected("crawl.json");
    let srv = server();
    let started = Instant::now();
    let mut found = Vec::new();
    for (key, follow) in [("strategy2_only", false), ("with_ontology_links", true)] {
        let want = &exp[key];
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        let data = DataDir::create(tmp.path()).map_err(|e| e.to_string())?;
        let run = crawl_into(&data, &srv, config(100, 3, 50, follow), &transport());
        let wanted = want["ontologies_found"].as_u64().unwrap();
        check!(
            u64::from(run.report.ontologies_found) == wanted,
            "{key}: found {} ontologies, expected {wanted}",
            run.report.ontologies_found
        );
        check!(
            paths(&run.journal) == strings(&want["ontology_paths"]),
            "{key}: journal {:?}",
            paths(&run.journal)
        );
        check!(
            u64::from(run.report.pages_fetched) == want["pages_fetched"].as_u64().unwrap(),
            "{key}: pages_fetched {}",
            run.report.pages_fetched
        );
        found.push(run.report.ontologies_found);
    }
    let elapsed = started.elapsed();
    check!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!("off={} on={} in {:.1}s", found[0], found[1], elapsed.as_secs_f64()))
}

fn budgets() -> Outcome {
    let exp = expected("crawl.json");
    let available: Vec<u64> = exp["pages_within_depth"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    let srv = server();
    let started = Instant::now();
    for max_pages in [1u32, 2, 5, 100] {
        for max_depth in 0u32..4 {
            let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
            let data = DataDir::create(tmp.path()).map_err(|e| e.to_string())?;
            let run = crawl_into(&data, &srv, config(max_pages, max_depth, 0, false), &transport());
            let r = &run.report;
            let label = format!("pages={max_pages} depth={max_depth}");
            check!(r.pages_fetched <= max_pages, "{label}: fetched {}", r.pages_fetched);
            check!(
                run.journal.iter().all(|rec| rec.depth <= max_depth),
                "{label}: journal depth above limit"
            );
            let within = available[max_depth as usize];
            if u64::from(max_pages) <= within {
                check!(r.stop_reason == StopReason::PageBudget, "{label}: stop {}", r.stop_reason);
                check!(r.pages_fetched == max_pages, "{label}: fetched {}", r.pages_fetched);
            } else {
                check!(r.stop_reason == StopReason::FrontierExhausted, "{label}: stop {}", r.stop_reason);
                check!(u64::from(r.pages_fetched) == within, "{label}: fetched {}", r.pages_fetched);
            }
        }
    }
    let elapsed = started.elapsed();
    check!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("16 combinations in {:.1}s", elapsed.as_secs_f64()))
}

fn politeness() -> Outcome {
    let srv = server();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = DataDir::create(tmp.path()).map_err(|e| e.to_string())?;
    let recording = RecordingTransport::new(transport());
    let mut cfg = config(100, 3, 200, true);
    cfg.workers = 3;
    crawl_into(&data, &srv, cfg, &recording);
    let log = recording.log();
    check!(log.len() > 10, "only {} requests recorded", log.len());
    let mut last: BTreeMap<&str, Instant> = BTreeMap::new();
    let mut smallest = Duration::MAX;
    for entry in &log {
        if let Some(prev) = last.get(entry.host.as_str()) {
            let gap = entry.started_at.duration_since(*prev);
            check!(gap >= Duration::from_millis(200), "{} started {gap:?} after the previous request", entry.url);
            smallest = smallest.min(gap);
        }
        last.insert(&entry.host, entry.started_at);
    }
    Ok(format!("{} requests, smallest gap {} ms", log.len(), smallest.as_millis()))
}

fn summary_value(file: &str) -> Result<Value, String> {
    let bytes = std::fs::read(fixtures().join("webroot/onts").join(file)).map_err(|e| e.to_string())?;
    let base = Url::parse(&format!("http://fixture.test/onts/{file}")).unwrap();
    let triples = parse_rdfxml(&bytes, &base).map_err(|e| format!("{file}: {e}"))?;
    let summary = summarize_ontology(&triples, base.as_str(), "", bytes.len() as u64);
    let mut v = serde_json::to_value(summary).map_err(|e| e.to_string())?;
    let obj = v.as_object_mut().unwrap();
    for key in ["source_url", "blob_id", "size_bytes"] {
        obj.remove(key);
    }
    obj.insert("file".into(), Value::String(file.into()));
    Ok(v)
}

fn mutate(doc: &[u8], edits: &[(usize, u8)], cut: usize) -> Vec<u8> {
    const NOISE: &[u8] = b"<>/&;\"'=:#!?[]- \nrdfabout\xff\x00";
    let mut out = doc.to_vec();
    for &(pos, b) in edits {
        let at = pos % (out.len() + 1);
        match b % 3 {
            0 if at < out.len() => out[at] = NOISE[b as usize % NOISE.len()],
            1 => out.insert(at, NOISE[b as usize % NOISE.len()]),
            _ if at < out.len() => {
                out.remove(at);
            }
            _ => {}
        }
    }
    out.truncate(cut % (out.len() + 1) + out.len() / 2);
    out
}

fn parser() -> Outcome {
    let want = expected("summaries.json");
    let want = want.as_array().ok_or("summaries.json is not a list")?;
    for w in want {
        let file = w["file"].as_str().unwrap();
        let got = summary_value(file)?;
        check!(&got == w, "{file}: summary differs\n got: {got}\nwant: {w}");
    }

    let base = Url::parse("http://fuzz.test/o.rdf").unwrap();
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&proptest::collection::vec(any::<u8>(), 0..2048), |bytes| {
            let _ = parse_rdfxml(&bytes, &base);
            Ok(())
        })
        .map_err(|e| format!("random bytes: {e}"))?;

    let docs: Vec<Vec<u8>> = ["library.rdf", "pizza.owl", "vehicle.rdf", "agent.rdf"]
        .iter()
        .map(|f| std::fs::read(fixtures().join("webroot/onts").join(f)).unwrap())
        .collect();
    let strategy = (
        0..docs.len(),
        proptest::collection::vec((any::<usize>(), any::<u8>()), 1..12),
        any::<usize>(),
    );
    runner
        .run(&strategy, |(which, edits, cut)| {
            let _ = parse_rdfxml(&mutate(&docs[which], &edits, cut), &base);
            Ok(())
        })
        .map_err(|e| format!("mutated documents: {e}"))?;
    Ok(format!("{} summaries exact, 2000 fuzz inputs", want.len()))
}

/// Reference tokenizer written from the splitting rules, sharing no code
/// with the library.
fn oracle_tokens(text: &str) -> Vec<String> {
    #[derive(PartialEq, Clone, Copy)]
    enum Class {
        Upper,
        Lower,
        Other,
        Sep,
    }
    let class = |c: char| {
        if !c.is_alphanumeric() {
            Class::Sep
        } else if c.is_uppercase() {
            Class::Upper
        } else if c.is_lowercase() {
            Class::Lower
        } else {
            Class::Other
        }
    };
    let chars: Vec<char> = text.chars().collect();
    let mut words: Vec<String> = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let k = class(c);
        if k == Class::Sep {
            words.push(std::mem::take(&mut current));
            continue;
        }
        if i > 0 && !current.is_empty() {
            let prev = class(chars[i - 1]);
            let next = chars.get(i + 1).map(|&n| class(n));
            let split = (prev == Class::Lower && k == Class::Upper)
                || (prev == Class::Upper && k == Class::Upper && next == Some(Class::Lower));
            if split {
                words.push(std::mem::take(&mut current));
            }
        }
        current.push(c);
    }
    words.push(current);
    words
        .into_iter()
        .map(|w| w.to_lowercase())
        .filter(|w| w.chars().count() >= 2)
        .collect()
}

fn field_texts(s: &OntologySummary) -> Vec<(FieldKind, String)> {
    let mut out = Vec::new();
    for c in &s.classes {
        out.push((FieldKind::ClassName, c.local_name.clone()));
    }
    for p in &s.properties {
        out.push((FieldKind::PropertyName, p.local_name.clone()));
    }
    for e in s.classes.iter().chain(&s.properties) {
        out.extend(e.labels.iter().map(|l| (FieldKind::Label, l.clone())));
        out.extend(e.comments.iter().map(|c| (FieldKind::Comment, c.clone())));
    }
    out.push((FieldKind::OntologyIri, s.ontology_iri.clone()));
    out.push((FieldKind::OntologyIri, s.source_url.clone()));
    out
}

fn weight(f: FieldKind) -> f64 {
    match f {
        FieldKind::ClassName => 3.0,
        FieldKind::PropertyName | FieldKind::Label => 2.0,
        FieldKind::Comment => 1.0,
        FieldKind::OntologyIri => 1.5,
    }
}

/// Brute-force ranking straight from the summaries.
fn oracle_rank(summaries: &[OntologySummary], query: &str) -> Vec<(String, f64)> {
    let mut terms: Vec<String> = Vec::new();
    for t in oracle_tokens(query) {
        if !terms.contains(&t) {
            terms.push(t);
        }
    }
    let n = summaries.len() as f64;
    let tf: Vec<BTreeMap<(String, FieldKind), u32>> = summaries
        .iter()
        .map(|s| {
            let mut m = BTreeMap::new();
            for (field, text) in field_texts(s) {
                for tok in oracle_tokens(&text) {
                    *m.entry((tok, field)).or_insert(0) += 1;
                }
            }
            m
        })
        .collect();
    let mut ranked = Vec::new();
    for (d, s) in summaries.iter().enumerate() {
        let mut score = 0.0;
        for t in &terms {
            let df = tf.iter().filter(|m| m.keys().any(|(tok, _)| tok == t)).count() as f64;
            let idf = (1.0 + n / (1.0 + df)).log2();
            let fields: f64 = [
                FieldKind::ClassName,
                FieldKind::PropertyName,
                FieldKind::Label,
                FieldKind::Comment,
                FieldKind::OntologyIri,
            ]
            .iter()
            .filter_map(|&f| tf[d].get(&(t.clone(), f)).map(|&c| weight(f) * (1.0 + f64::from(c)).log2()))
            .sum();
            score += idf * fields;
        }
        if score > 0.0 {
            ranked.push((s.source_url.clone(), score));
        }
    }
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
}

/// Summaries rebuilt from the stored documents in journal order.
fn reread_summaries(data: &DataDir) -> Result<Vec<OntologySummary>, String> {
    let urls = UrlRepository::open(data.root()).map_err(|e| e.to_string())?;
    let blobs = OntologyRepository::open(&data.ontology_dir()).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for rec in urls.scan().map_err(|e| e.to_string())?.records {
        let entry = blobs
            .lookup(&rec.url)
            .map_err(|e| e.to_string())?
            .ok_or(format!("{} not stored", rec.url))?;
        let bytes = blobs.get(&entry.id).map_err(|e| e.to_string())?;
        let triples = parse_rdfxml(&bytes, &Url::parse(&rec.url).unwrap()).map_err(|e| e.to_string())?;
        out.push(summarize_ontology(&triples, &rec.url, &entry.id, bytes.len() as u64));
    }
    Ok(out)
}

fn indexed_fixture(srv: &FixtureServer, follow: bool) -> Result<(tempfile::TempDir, DataDir, InvertedIndex), String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = DataDir::create(tmp.path()).map_err(|e| e.to_string())?;
    crawl_into(&data, srv, config(100, 3, 0, follow), &transport());
    run_indexer(&data, &transport()).map_err(|e| e.to_string())?;
    let index = InvertedIndex::from_snapshot(load_index(&data.index_file()).map_err(|e| e.to_string())?);
    Ok((tmp, data, index))
}

fn compare(summaries: &[OntologySummary], index: &InvertedIndex, query: &str) -> Result<usize, String> {
    let oracle = oracle_rank(summaries, query);
    let results = search(query, index, usize::MAX);
    check!(
        results.total_matching == oracle.len(),
        "{query:?}: {} matches, oracle {}",
        results.total_matching,
        oracle.len()
    );
    for (hit, (url, score)) in results.hits.iter().zip(&oracle) {
        check!(&hit.url == url, "{query:?}: got {} where oracle ranks {url}", hit.url);
        check!((hit.score - score).abs() <= 1e-9, "{query:?}: {url} scored {} vs oracle {score}", hit.score);
    }
    Ok(oracle.len())
}

fn oracle_equivalence() -> Outcome {
    let srv = server();
    let (_tmp, data, index) = indexed_fixture(&srv, true)?;
    let summaries = reread_summaries(&data)?;
    check!(summaries.len() == 4, "{} summaries", summaries.len());
    let text = std::fs::read_to_string(fixtures().join("expected/queries.txt")).map_err(|e| e.to_string())?;
    let queries: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    check!(queries.len() >= 20, "only {} queries", queries.len());
    let mut with_hits = 0;
    for q in &queries {
        if compare(&summaries, &index, q)? > 0 {
            with_hits += 1;
        }
    }

    let (_tmp3, data3, index3) = indexed_fixture(&srv, false)?;
    let summaries3 = reread_summaries(&data3)?;
    check!(summaries3.len() == 3, "N={} for the html-only crawl", summaries3.len());
    compare(&summaries3, &index3, "author")?;
    let oracle = oracle_rank(&summaries3, "author");
    check!(oracle.len() == 1, "author matched {} documents", oracle.len());
    check!((oracle[0].1 - 3.9658).abs() < 1e-4, "author scored {}", oracle[0].1);
    Ok(format!(
        "{} queries ({} with hits) agree; N=3 author score {:.4}",
        queries.len(),
        with_hits,
        oracle[0].1
    ))
}

fn owse(args: &[&str], data_dir: &Path) -> Result<(i32, String), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_owse"))
        .args(args)
        .env("OWSE_DATA_DIR", data_dir)
        .output()
        .map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned()))
}

fn snapshot_strategy() -> impl Strategy<Value = IndexSnapshot> {
    (1u32..6).prop_flat_map(|n| {
        let docs = proptest::collection::vec(("[0-9a-f]{64}", "[a-z]{1,8}", any::<u64>(), any::<[u32; 3]>()), n as usize);
        let fields = proptest::sample::subsequence(
            vec![
                FieldKind::ClassName,
                FieldKind::PropertyName,
                FieldKind::Label,
                FieldKind::Comment,
                FieldKind::OntologyIri,
            ],
            1..=5,
        );
        let postings = proptest::collection::btree_map(
            "[a-z0-9]{2,10}",
            proptest::collection::btree_map(0..n, (fields, 1u32..1000), 1..=n as usize),
            0..20,
        );
        (docs, postings).prop_map(move |(docs, postings)| IndexSnapshot {
            version: INDEX_FORMAT_VERSION,
            doc_count: n,
            doc_table: docs
                .into_iter()
                .enumerate()
                .map(|(i, (blob_id, name, size_bytes, [classes, properties, relations]))| DocEntry {
                    ordinal: i as u32,
                    blob_id,
                    url: format!("http://h.test/{name}.owl"),
                    size_bytes,
                    classes,
                    properties,
                    relations,
                })
                .collect(),
            postings: postings
                .into_iter()
                .map(|(term, per_doc)| {
                    let list = per_doc
                        .into_iter()
                        .flat_map(|(doc, (fields, tf))| {
                            fields.into_iter().map(move |field| Posting { doc, field, tf })
                        })
                        .collect();
                    (term, list)
                })
                .collect(),
        })
    })
}

fn determinism() -> Outcome {
    let srv = server();
    let seed = srv.url("/index.html");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut indexes = Vec::new();
    let mut answers = Vec::new();
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        let crawl_args = [
            "crawl",
            "--seed",
            &seed,
            "--politeness-ms",
            "0",
            "--workers",
            "1",
            "--follow-ontology-links",
        ];
        let (code, _) = owse(&crawl_args, &dir)?;
        check!(code == 0, "crawl exited {code}");
        let (code, out) = owse(&["index"], &dir)?;
        check!(code == 0, "index exited {code}");
        check!(out.contains("indexed: 4 skipped: 0"), "index printed {out:?}");
        indexes.push(std::fs::read(dir.join("index.json")).map_err(|e| e.to_string())?);
        let (code, out) = owse(&["query", "pizza topping vehicle"], &dir)?;
        check!(code == 0, "query exited {code}");
        answers.push(out);
    }
    check!(indexes[0] == indexes[1], "index.json differs between runs");
    check!(answers[0] == answers[1], "query output differs between runs");

    let mut runner = TestRunner::new(Config {
        cases: 200,
        failure_persistence: None,
        ..Config::default()
    });
    let store = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = store.path().join("index.json");
    runner
        .run(&snapshot_strategy(), |snapshot| {
            prop_assert!(snapshot.validate().is_ok());
            save_index(&snapshot, &path).unwrap();
            prop_assert_eq!(load_index(&path).unwrap(), snapshot);
            Ok(())
        })
        .map_err(|e| format!("round trip: {e}"))?;
    Ok(format!("index.json identical ({} bytes), 200 snapshots round-trip", indexes[0].len()))
}

fn degradation() -> Outcome {
    let srv = server();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = tmp.path().join("data");
    {
        let mut urls = UrlRepository::open(&dir).map_err(|e| e.to_string())?;
        for path in [
            "/onts/library.rdf",
            "/onts/notes.ttl",
            "/onts/pizza.owl",
            "/onts/gone.owl",
            "/onts/vehicle.rdf",
        ] {
            urls.append(&UrlRecord::ontology(srv.url(path), srv.url("/index.html"), 1))
                .map_err(|e| e.to_string())?;
        }
    }
    let (code, out) = owse(&["index"], &dir)?;
    check!(code == 0, "index exited {code}");
    check!(out.contains("indexed: 3 skipped: 2"), "index printed {out:?}");
    for (query, path) in [("book", "/onts/library.rdf"), ("margherita", "/onts/pizza.owl"), ("truck", "/onts/vehicle.rdf")] {
        let (code, out) = owse(&["query", query], &dir)?;
        check!(code == 0, "query {query:?} exited {code}");
        let first = out.lines().next().unwrap_or_default();
        check!(first.contains(&srv.url(path)), "query {query:?} printed {out:?}");
    }
    Ok("skipped=2, exit 0, remaining documents searchable".into())
}

fn main() {
    let criteria: [Check; 7] = [
        ("fixture end-to-end discovery", discovery),
        ("budget and depth limits", budgets),
        ("per-host politeness", politeness),
        ("parser exactness and robustness", parser),
        ("search agrees with brute-force oracle", oracle_equivalence),
        ("determinism and index round trip", determinism),
        ("graceful degradation", degradation),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail})", i + 1),
            Err(reason) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {reason}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
