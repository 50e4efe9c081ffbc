//! Keyword search over an [`InvertedIndex`].
//!
//! A document's score for a query is
//!
//! ```text
//! score(d) = Σ_t idf(t) · Σ_f w_f · log2(1 + tf(t, f, d))
//! idf(t)   = log2(1 + N / (1 + df(t)))
//! ```
//!
//! summed over the query's distinct terms `t` and the field kinds `f` in
//! which `t` occurs in `d`. Terms match disjunctively.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::index::{tokenize, FieldKind, InvertedIndex};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Query {
    pub raw: String,
    pub terms: Vec<String>,
    /// `terms` without repeats, in first-occurrence order.
    pub unique_terms: Vec<String>,
}

pub fn parse_query(raw: &str) -> Query {
    let terms = tokenize(raw);
    let mut unique_terms: Vec<String> = Vec::new();
    for t in &terms {
        if !unique_terms.contains(t) {
            unique_terms.push(t.clone());
        }
    }
    Query {
        raw: raw.to_string(),
        terms,
        unique_terms,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchedTerm {
    pub term: String,
    pub field: FieldKind,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredHit {
    pub url: String,
    pub blob_id: String,
    pub ordinal: u32,
    pub score: f64,
    pub matched: Vec<MatchedTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResults {
    pub hits: Vec<ScoredHit>,
    pub total_matching: usize,
    pub query: Query,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("document ordinal {doc} out of range (index has {n} documents)")]
    OrdinalOutOfRange { doc: u32, n: u32 },
}

pub fn idf(n: u32, df: u32) -> f64 {
    (1.0 + f64::from(n) / (1.0 + f64::from(df))).log2()
}

/// Scores one document. Terms are taken in the given order; callers pass
/// distinct terms.
pub fn score_ontology(
    unique_terms: &[String],
    index: &InvertedIndex,
    doc: u32,
) -> Result<(f64, Vec<MatchedTerm>), QueryError> {
    let n = index.doc_count();
    if doc >= n {
        return Err(QueryError::OrdinalOutOfRange { doc, n });
    }
    let mut score = 0.0;
    let mut matched = Vec::new();
    for term in unique_terms {
        let postings = index.postings(term);
        let start = postings.partition_point(|p| p.doc < doc);
        let mut field_sum = 0.0;
        for p in postings[start..].iter().take_while(|p| p.doc == doc) {
            field_sum += p.field.weight() * (1.0 + f64::from(p.tf)).log2();
            matched.push(MatchedTerm {
                term: term.clone(),
                field: p.field,
                tf: p.tf,
            });
        }
        if field_sum > 0.0 {
            score += idf(n, index.df(term)) * field_sum;
        }
    }
    Ok((score, matched))
}

/// Ranks every document matching at least one query term by score
/// descending, then URL ascending, and keeps the first `top_k`.
pub fn search(raw: &str, index: &InvertedIndex, top_k: usize) -> SearchResults {
    let query = parse_query(raw);
    let mut candidates: BTreeMap<u32, ()> = BTreeMap::new();
    for term in &query.unique_terms {
        for p in index.postings(term) {
            candidates.insert(p.doc, ());
        }
    }

    let mut hits: Vec<ScoredHit> = candidates
        .keys()
        .filter_map(|&doc| {
            let (score, matched) = score_ontology(&query.unique_terms, index, doc).ok()?;
            let entry = &index.doc_table[doc as usize];
            (score > 0.0).then(|| ScoredHit {
                url: entry.url.clone(),
                blob_id: entry.blob_id.clone(),
                ordinal: doc,
                score,
                matched,
            })
        })
        .collect();
    hits.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.url.cmp(&b.url))
            .then_with(|| a.blob_id.cmp(&b.blob_id))
    });
    let total_matching = hits.len();
    hits.truncate(top_k);
    SearchResults {
        hits,
        total_matching,
        query,
    }
}
