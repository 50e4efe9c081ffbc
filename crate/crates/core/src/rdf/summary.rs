use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::vocab::*;
use super::{Subject, Term, TripleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Class,
    ObjectProperty,
    DatatypeProperty,
    AnnotationProperty,
    PlainProperty,
}

impl ElementKind {
    pub fn is_property(self) -> bool {
        self != ElementKind::Class
    }

    fn precedence(self) -> u8 {
        match self {
            ElementKind::ObjectProperty => 3,
            ElementKind::DatatypeProperty => 2,
            ElementKind::AnnotationProperty => 1,
            ElementKind::PlainProperty | ElementKind::Class => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyElement {
    pub iri: String,
    pub local_name: String,
    pub labels: Vec<String>,
    pub comments: Vec<String>,
    pub kind: ElementKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RelationKind {
    SubClassOf,
    SubPropertyOf,
    Domain,
    Range,
}

impl RelationKind {
    fn from_predicate(p: &str) -> Option<Self> {
        match p {
            RDFS_SUB_CLASS_OF => Some(RelationKind::SubClassOf),
            RDFS_SUB_PROPERTY_OF => Some(RelationKind::SubPropertyOf),
            RDFS_DOMAIN => Some(RelationKind::Domain),
            RDFS_RANGE => Some(RelationKind::Range),
            _ => None,
        }
    }
}

/// `(subject, kind, object)`, serialized as a three-element array.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relation(pub String, pub RelationKind, pub String);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologySummary {
    pub ontology_iri: String,
    pub source_url: String,
    pub blob_id: String,
    pub size_bytes: u64,
    pub classes: Vec<OntologyElement>,
    pub properties: Vec<OntologyElement>,
    pub relations: Vec<Relation>,
    pub imports: Vec<String>,
}

/// Text after the last `#`, else after the last `/`. Falls back to the whole
/// IRI when that would be empty.
pub fn local_name(iri: &str) -> &str {
    let tail = match iri.rfind('#') {
        Some(i) => &iri[i + 1..],
        None => iri.rfind('/').map_or(iri, |i| &iri[i + 1..]),
    };
    if tail.is_empty() {
        iri
    } else {
        tail
    }
}

fn add_property<'a>(properties: &mut BTreeMap<&'a str, ElementKind>, iri: &'a str, kind: ElementKind) {
    let slot = properties.entry(iri).or_insert(kind);
    if kind.precedence() > slot.precedence() {
        *slot = kind;
    }
}

pub fn summarize_ontology(triples: &TripleSet, source_url: &str, blob_id: &str, size_bytes: u64) -> OntologySummary {
    let mut classes: BTreeMap<&str, ()> = BTreeMap::new();
    let mut properties: BTreeMap<&str, ElementKind> = BTreeMap::new();
    let mut relations = Vec::new();
    let mut labels: HashMap<&str, Vec<&str>> = HashMap::new();
    let mut comments: HashMap<&str, Vec<&str>> = HashMap::new();
    let mut imports: Vec<String> = Vec::new();
    let mut ontology_iri: Option<String> = None;

    for t in &triples.triples {
        let subject = match &t.subject {
            Subject::Iri(s) => Some(s.as_str()),
            Subject::Blank(_) => None,
        };
        let object_iri = match &t.object {
            Term::Iri(o) => Some(o.as_str()),
            _ => None,
        };
        let predicate = t.predicate.as_str();

        if predicate == RDF_TYPE {
            let Some(ty) = object_iri else { continue };
            if ty == OWL_ONTOLOGY {
                if ontology_iri.is_none() {
                    ontology_iri = Some(subject.unwrap_or_default().to_string());
                }
                continue;
            }
            let Some(s) = subject else { continue };
            match ty {
                OWL_CLASS | RDFS_CLASS => {
                    classes.insert(s, ());
                }
                OWL_OBJECT_PROPERTY => add_property(&mut properties, s, ElementKind::ObjectProperty),
                OWL_DATATYPE_PROPERTY => add_property(&mut properties, s, ElementKind::DatatypeProperty),
                OWL_ANNOTATION_PROPERTY => add_property(&mut properties, s, ElementKind::AnnotationProperty),
                RDF_PROPERTY => add_property(&mut properties, s, ElementKind::PlainProperty),
                _ => {}
            }
            continue;
        }

        if predicate == OWL_IMPORTS {
            if let Some(o) = object_iri {
                if !imports.iter().any(|i| i == o) {
                    imports.push(o.to_string());
                }
            }
            continue;
        }

        if let Some(kind) = RelationKind::from_predicate(predicate) {
            match kind {
                RelationKind::SubClassOf => {
                    if let Some(s) = subject {
                        classes.insert(s, ());
                    }
                    if let Some(o) = object_iri {
                        classes.insert(o, ());
                    }
                }
                RelationKind::SubPropertyOf => {
                    if let Some(s) = subject {
                        add_property(&mut properties, s, ElementKind::PlainProperty);
                    }
                    if let Some(o) = object_iri {
                        add_property(&mut properties, o, ElementKind::PlainProperty);
                    }
                }
                RelationKind::Domain | RelationKind::Range => {
                    if let Some(s) = subject {
                        add_property(&mut properties, s, ElementKind::PlainProperty);
                    }
                    if let Some(o) = object_iri {
                        classes.insert(o, ());
                    }
                }
            }
            if let (Some(s), Some(o)) = (subject, object_iri) {
                relations.push(Relation(s.to_string(), kind, o.to_string()));
            }
            continue;
        }

        let (Some(s), Term::Literal(text)) = (subject, &t.object) else {
            continue;
        };
        let bucket = match predicate {
            RDFS_LABEL => &mut labels,
            RDFS_COMMENT => &mut comments,
            _ => continue,
        };
        let list = bucket.entry(s).or_default();
        if !list.contains(&text.as_str()) {
            list.push(text);
        }
    }

    let element = |iri: &str, kind| OntologyElement {
        iri: iri.to_string(),
        local_name: local_name(iri).to_string(),
        labels: labels.get(iri).map(|l| l.iter().map(|s| s.to_string()).collect()).unwrap_or_default(),
        comments: comments.get(iri).map(|c| c.iter().map(|s| s.to_string()).collect()).unwrap_or_default(),
        kind,
    };

    relations.sort();
    relations.dedup();

    OntologySummary {
        ontology_iri: ontology_iri.unwrap_or_default(),
        source_url: source_url.to_string(),
        blob_id: blob_id.to_string(),
        size_bytes,
        classes: classes.keys().map(|iri| element(iri, ElementKind::Class)).collect(),
        properties: properties.iter().map(|(iri, kind)| element(iri, *kind)).collect(),
        relations,
        imports,
    }
}
