//! RDF/XML subset parser and ontology summaries.

mod parser;
mod summary;
pub mod vocab;

use std::collections::BTreeMap;
use std::fmt;

pub use parser::{parse_rdfxml, ParseError};
pub use summary::{
    local_name, summarize_ontology, ElementKind, OntologyElement, OntologySummary, Relation, RelationKind,
};

/// Subject position: a named resource or a document-scoped blank node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subject {
    Iri(String),
    Blank(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    Blank(String),
    /// Lexical form only; datatype and language are dropped.
    Literal(String),
}

impl From<Subject> for Term {
    fn from(s: Subject) -> Self {
        match s {
            Subject::Iri(i) => Term::Iri(i),
            Subject::Blank(b) => Term::Blank(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triple {
    pub subject: Subject,
    pub predicate: String,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Subject, predicate: impl Into<String>, object: Term) -> Self {
        Triple {
            subject,
            predicate: predicate.into(),
            object,
        }
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Iri(i) => write!(f, "<{i}>"),
            Subject::Blank(b) => write!(f, "_:{b}"),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(i) => write!(f, "<{i}>"),
            Term::Blank(b) => write!(f, "_:{b}"),
            Term::Literal(l) => write!(f, "{l:?}"),
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <{}> {} .", self.subject, self.predicate, self.object)
    }
}

/// Parser output. Triples are in the order their statements completed and
/// contain no exact duplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TripleSet {
    pub triples: Vec<Triple>,
    pub base_iri: String,
    pub namespaces: BTreeMap<String, String>,
    /// Constructs that were skipped, one message each.
    pub warnings: Vec<String>,
}
