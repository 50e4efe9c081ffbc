//! Inverted index over ontology summaries.

mod pipeline;
mod tokenize;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::rdf::OntologySummary;
use crate::storage::{DocEntry, IndexSnapshot, INDEX_FORMAT_VERSION};

pub use pipeline::{run_indexer, IndexReport};
pub use tokenize::tokenize;

/// Where in an ontology a term occurred. Declaration order is the sort
/// order inside posting lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    ClassName,
    PropertyName,
    Label,
    Comment,
    OntologyIri,
}

impl FieldKind {
    pub const ALL: [FieldKind; 5] = [
        FieldKind::ClassName,
        FieldKind::PropertyName,
        FieldKind::Label,
        FieldKind::Comment,
        FieldKind::OntologyIri,
    ];

    pub fn weight(self) -> f64 {
        match self {
            FieldKind::ClassName => 3.0,
            FieldKind::PropertyName => 2.0,
            FieldKind::Label => 2.0,
            FieldKind::Comment => 1.0,
            FieldKind::OntologyIri => 1.5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::ClassName => "class_name",
            FieldKind::PropertyName => "property_name",
            FieldKind::Label => "label",
            FieldKind::Comment => "comment",
            FieldKind::OntologyIri => "ontology_iri",
        }
    }
}

impl std::fmt::Display for FieldKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Posting {
    pub doc: u32,
    pub field: FieldKind,
    pub tf: u32,
}

/// Term/posting pairs for one ontology, sorted by term then field.
pub fn index_ontology(summary: &OntologySummary, ordinal: u32) -> Vec<(String, Posting)> {
    let mut counts: BTreeMap<(String, FieldKind), u32> = BTreeMap::new();
    let mut add = |text: &str, field: FieldKind| {
        for term in tokenize(text) {
            *counts.entry((term, field)).or_default() += 1;
        }
    };
    for class in &summary.classes {
        add(&class.local_name, FieldKind::ClassName);
    }
    for property in &summary.properties {
        add(&property.local_name, FieldKind::PropertyName);
    }
    for element in summary.classes.iter().chain(&summary.properties) {
        for label in &element.labels {
            add(label, FieldKind::Label);
        }
        for comment in &element.comments {
            add(comment, FieldKind::Comment);
        }
    }
    add(&summary.ontology_iri, FieldKind::OntologyIri);
    add(&summary.source_url, FieldKind::OntologyIri);

    counts
        .into_iter()
        .map(|((term, field), tf)| (term, Posting { doc: ordinal, field, tf }))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InvertedIndex {
    pub doc_table: Vec<DocEntry>,
    pub postings: BTreeMap<String, Vec<Posting>>,
}

impl InvertedIndex {
    pub fn doc_count(&self) -> u32 {
        self.doc_table.len() as u32
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }

    /// Number of distinct documents with a posting for `term`.
    pub fn df(&self, term: &str) -> u32 {
        let list = self.postings(term);
        let mut df = 0;
        let mut last = None;
        for p in list {
            if last != Some(p.doc) {
                df += 1;
                last = Some(p.doc);
            }
        }
        df
    }

    pub fn total_postings(&self) -> usize {
        self.postings.values().map(Vec::len).sum()
    }

    pub fn to_snapshot(&self) -> IndexSnapshot {
        IndexSnapshot {
            version: INDEX_FORMAT_VERSION,
            doc_count: self.doc_count(),
            doc_table: self.doc_table.clone(),
            postings: self.postings.clone(),
        }
    }

    pub fn from_snapshot(snapshot: IndexSnapshot) -> Self {
        InvertedIndex {
            doc_table: snapshot.doc_table,
            postings: snapshot.postings,
        }
    }
}

pub fn build_index(summaries: &[OntologySummary]) -> InvertedIndex {
    let mut index = InvertedIndex::default();
    for (i, summary) in summaries.iter().enumerate() {
        let ordinal = i as u32;
        index.doc_table.push(DocEntry {
            ordinal,
            blob_id: summary.blob_id.clone(),
            url: summary.source_url.clone(),
            size_bytes: summary.size_bytes,
            classes: summary.classes.len() as u32,
            properties: summary.properties.len() as u32,
            relations: summary.relations.len() as u32,
        });
        // Ordinals only grow, so appending keeps every list sorted.
        for (term, posting) in index_ontology(summary, ordinal) {
            index.postings.entry(term).or_default().push(posting);
        }
    }
    index
}
