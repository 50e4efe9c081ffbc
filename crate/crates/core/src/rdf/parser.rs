//! Streaming parser for the RDF/XML subset used by ontology documents.
//!
//! Supported: an `rdf:RDF` root with namespace declarations, `xml:base`,
//! `rdf:Description` and typed node elements, `rdf:about` / `rdf:ID` /
//! `rdf:nodeID` subjects, property attributes on node elements, and
//! property elements whose object is an `rdf:resource`, an `rdf:nodeID`,
//! one nested node element, or literal text. Internal DTD entity
//! declarations (`<!ENTITY owl "...">`) are expanded.
//!
//! Anything else the grammar allows (`rdf:parseType`, containers, `rdf:li`,
//! reification via `rdf:ID` on a property element, property attributes on a
//! property element) drops the enclosing property element and records a
//! warning.

use std::borrow::Cow;
use std::collections::{HashMap, HashSet};

use quick_xml::escape::resolve_predefined_entity;
use quick_xml::events::{BytesStart, Event};
use quick_xml::name::ResolveResult;
use quick_xml::NsReader;
use url::Url;

use super::vocab::{RDF_NS, RDF_TYPE, XML_NS};
use super::{Subject, Term, Triple, TripleSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("XML is not well-formed: {0}")]
    XmlNotWellFormed(String),
    #[error("not an RDF/XML document: root element is {0}")]
    NotRdf(String),
}

#[derive(Debug)]
enum Frame {
    Root,
    Node {
        subject: Subject,
    },
    Property {
        subject: Subject,
        predicate: String,
        object: Option<Term>,
        text: String,
        skipped: bool,
    },
    Skip,
}

#[derive(Debug, Default)]
struct Attrs {
    about: Option<String>,
    id: Option<String>,
    node_id: Option<String>,
    resource: Option<String>,
    parse_type: Option<String>,
    base: Option<String>,
    /// Namespaced attributes other than the syntax ones above.
    properties: Vec<(String, String)>,
    /// `rdf:` attributes that have no meaning in this position.
    stray_rdf: Vec<String>,
}

struct Parser {
    stack: Vec<(Frame, Url)>,
    out: TripleSet,
    emitted: HashSet<Triple>,
    blank_counter: usize,
    entities: HashMap<String, String>,
    root_seen: bool,
}

/// Parses `bytes` as RDF/XML. Relative references resolve against `base`
/// unless the document sets `xml:base`.
pub fn parse_rdfxml(bytes: &[u8], base: &Url) -> Result<TripleSet, ParseError> {
    let text = String::from_utf8_lossy(bytes);
    let mut reader = NsReader::from_str(&text);
    let mut parser = Parser {
        stack: Vec::new(),
        out: TripleSet {
            base_iri: base.to_string(),
            ..TripleSet::default()
        },
        emitted: HashSet::new(),
        blank_counter: 0,
        entities: HashMap::new(),
        root_seen: false,
    };

    loop {
        let position = reader.buffer_position();
        let (ns, event) = reader
            .read_resolved_event()
            .map_err(|e| ParseError::XmlNotWellFormed(format!("at byte {position}: {e}")))?;
        let element_ns = match ns {
            ResolveResult::Bound(ns) => Some(parser.expand(ns.0)?.into_owned()),
            ResolveResult::Unbound => None,
            ResolveResult::Unknown(prefix) => {
                return Err(ParseError::XmlNotWellFormed(format!("undeclared prefix {prefix:?}")))
            }
        };
        match event {
            Event::Start(e) => parser.start(&reader, &e, element_ns, base)?,
            Event::Empty(e) => {
                parser.start(&reader, &e, element_ns, base)?;
                parser.end();
            }
            Event::End(_) => parser.end(),
            Event::Text(t) => parser.text(&t.xml10_content())?,
            Event::CData(c) => parser.text(&c.xml10_content())?,
            Event::GeneralRef(r) => {
                let resolved = if r.is_char_ref() {
                    let c = r
                        .resolve_char_ref()
                        .map_err(|e| ParseError::XmlNotWellFormed(e.to_string()))?
                        .ok_or_else(|| ParseError::XmlNotWellFormed("bad character reference".into()))?;
                    c.to_string()
                } else {
                    let name = r.xml10_content();
                    parser
                        .entity(&name)
                        .ok_or_else(|| ParseError::XmlNotWellFormed(format!("undefined entity &{name};")))?
                        .to_string()
                };
                parser.text(&resolved)?;
            }
            Event::DocType(d) => parser.declare_entities(&d.xml10_content()),
            Event::Comment(_) | Event::Decl(_) | Event::PI(_) => {}
            Event::Eof => break,
        }
    }

    if !parser.stack.is_empty() {
        return Err(ParseError::XmlNotWellFormed("unexpected end of document".into()));
    }
    if !parser.root_seen {
        return Err(ParseError::XmlNotWellFormed("no root element".into()));
    }
    Ok(parser.out)
}

impl Parser {
    fn entity(&self, name: &str) -> Option<&str> {
        resolve_predefined_entity(name).or_else(|| self.entities.get(name).map(String::as_str))
    }

    /// Expands entity references in raw text such as namespace values.
    fn expand<'s>(&self, raw: &'s str) -> Result<Cow<'s, str>, ParseError> {
        quick_xml::escape::unescape_with(raw, |name| self.entity(name))
            .map_err(|e| ParseError::XmlNotWellFormed(e.to_string()))
    }

    /// Collects `<!ENTITY name "value">` declarations from a DOCTYPE
    /// internal subset. Parameter entities and external entities are ignored.
    fn declare_entities(&mut self, doctype: &str) {
        let mut rest = doctype;
        while let Some(pos) = rest.find("<!ENTITY") {
            rest = &rest[pos + "<!ENTITY".len()..];
            let decl = rest.trim_start();
            if decl.starts_with('%') {
                continue;
            }
            let name_len = decl
                .find(|c: char| c.is_whitespace())
                .unwrap_or(decl.len());
            let name = &decl[..name_len];
            let after = decl[name_len..].trim_start();
            let Some(quote) = after.chars().next().filter(|c| *c == '"' || *c == '\'') else {
                continue;
            };
            let Some(end) = after[1..].find(quote) else {
                break;
            };
            let value = &after[1..1 + end];
            let value = self.expand(value).map(Cow::into_owned).unwrap_or_else(|_| value.to_string());
            self.entities.entry(name.to_string()).or_insert(value);
        }
    }

    fn warn(&mut self, message: String) {
        log::debug!("rdf/xml: {message}");
        self.out.warnings.push(message);
    }

    fn fresh_blank(&mut self) -> String {
        self.blank_counter += 1;
        format!("b{}", self.blank_counter)
    }

    fn emit(&mut self, triple: Triple) {
        if self.emitted.insert(triple.clone()) {
            self.out.triples.push(triple);
        }
    }

    fn current_base(&self) -> Option<&Url> {
        self.stack.last().map(|(_, base)| base)
    }

    fn start(
        &mut self,
        reader: &NsReader<&[u8]>,
        e: &BytesStart<'_>,
        element_ns: Option<String>,
        doc_base: &Url,
    ) -> Result<(), ParseError> {
        let local = e.local_name().as_ref().to_string();
        let attrs = self.attributes(reader, e)?;
        let parent_base = self.current_base().cloned().unwrap_or_else(|| doc_base.clone());
        let base = match &attrs.base {
            Some(b) => match parent_base.join(b) {
                Ok(mut u) => {
                    u.set_fragment(None);
                    u
                }
                Err(err) => {
                    self.warn(format!("ignoring xml:base {b:?}: {err}"));
                    parent_base.clone()
                }
            },
            None => parent_base.clone(),
        };

        if self.stack.is_empty() {
            if self.root_seen {
                return Err(ParseError::XmlNotWellFormed("more than one root element".into()));
            }
            self.root_seen = true;
            let is_rdf_root = element_ns.as_deref() == Some(RDF_NS) && local == "RDF";
            if !is_rdf_root {
                let name = e.name().as_ref().to_string();
                return Err(ParseError::NotRdf(name));
            }
            self.out.base_iri = base.to_string();
            self.stack.push((Frame::Root, base));
            return Ok(());
        }

        let Some(ns) = element_ns else {
            self.warn(format!("skipping element <{local}> without a namespace"));
            self.stack.push((Frame::Skip, base));
            return Ok(());
        };
        let name_iri = format!("{ns}{local}");

        let top = self.stack.len() - 1;
        match &mut self.stack[top].0 {
            Frame::Skip => {
                self.stack.push((Frame::Skip, base));
            }
            Frame::Root => self.node_element(&name_iri, attrs, base),
            Frame::Property {
                object, text, skipped, ..
            } => {
                if *skipped {
                    self.stack.push((Frame::Skip, base));
                } else if object.is_some() || !text.trim().is_empty() {
                    *skipped = true;
                    self.warn(format!("property with more than one object at <{name_iri}>"));
                    self.stack.push((Frame::Skip, base));
                } else {
                    self.node_element(&name_iri, attrs, base);
                }
            }
            Frame::Node { subject } => {
                let subject = subject.clone();
                self.property_element(subject, name_iri, attrs, base);
            }
        }
        Ok(())
    }

    fn attributes(&mut self, reader: &NsReader<&[u8]>, e: &BytesStart<'_>) -> Result<Attrs, ParseError> {
        let mut attrs = Attrs::default();
        for attr in e.attributes() {
            let attr = attr.map_err(|err| ParseError::XmlNotWellFormed(err.to_string()))?;
            let key = attr.key;
            let raw_key = key.as_ref();
            if raw_key == "xmlns" || raw_key.starts_with("xmlns:") {
                let prefix = raw_key.strip_prefix("xmlns:").unwrap_or_default();
                let value = attr
                    .normalized_value_with(quick_xml::XmlVersion::Implicit1_0, 16, |n| self.entity(n))
                    .map_err(|err| ParseError::XmlNotWellFormed(err.to_string()))?;
                self.out
                    .namespaces
                    .entry(prefix.to_string())
                    .or_insert_with(|| value.into_owned());
                continue;
            }
            let value = attr
                .normalized_value_with(quick_xml::XmlVersion::Implicit1_0, 16, |n| self.entity(n))
                .map_err(|err| ParseError::XmlNotWellFormed(err.to_string()))?
                .into_owned();
            let (ns, local) = reader.resolver().resolve_attribute(key);
            let local = local.as_ref().to_string();
            let ns = match ns {
                ResolveResult::Bound(ns) => self.expand(ns.0)?.into_owned(),
                ResolveResult::Unbound => continue,
                ResolveResult::Unknown(prefix) => {
                    return Err(ParseError::XmlNotWellFormed(format!("undeclared prefix {prefix:?}")))
                }
            };
            if ns == XML_NS {
                if local == "base" {
                    attrs.base = Some(value);
                }
                continue;
            }
            if ns == RDF_NS {
                match local.as_str() {
                    "about" => attrs.about = Some(value),
                    "ID" => attrs.id = Some(value),
                    "nodeID" => attrs.node_id = Some(value),
                    "resource" => attrs.resource = Some(value),
                    "parseType" => attrs.parse_type = Some(value),
                    "datatype" => {}
                    "type" => attrs.properties.push((RDF_TYPE.to_string(), value)),
                    other => attrs.stray_rdf.push(other.to_string()),
                }
                continue;
            }
            attrs.properties.push((format!("{ns}{local}"), value));
        }
        Ok(attrs)
    }

    fn resolve(&mut self, base: &Url, reference: &str) -> Option<String> {
        match base.join(reference) {
            Ok(u) => Some(u.to_string()),
            Err(err) => {
                self.warn(format!("cannot resolve {reference:?} against {base}: {err}"));
                None
            }
        }
    }

    fn id_iri(base: &Url, id: &str) -> String {
        let mut iri = base.to_string();
        if let Some(hash) = iri.find('#') {
            iri.truncate(hash);
        }
        iri.push('#');
        iri.push_str(id);
        iri
    }

    fn node_element(&mut self, type_iri: &str, attrs: Attrs, base: Url) {
        let is_container = [
            "Bag", "Seq", "Alt", "List",
        ]
        .iter()
        .any(|c| type_iri.strip_prefix(RDF_NS) == Some(c));
        if is_container {
            self.warn(format!("skipping unsupported container <{type_iri}>"));
            self.skip_enclosing_property();
            self.stack.push((Frame::Skip, base));
            return;
        }

        let subject = if let Some(about) = &attrs.about {
            match self.resolve(&base, about) {
                Some(iri) => Subject::Iri(iri),
                None => Subject::Blank(self.fresh_blank()),
            }
        } else if let Some(id) = &attrs.id {
            Subject::Iri(Self::id_iri(&base, id))
        } else if let Some(node_id) = &attrs.node_id {
            Subject::Blank(format!("n-{node_id}"))
        } else {
            Subject::Blank(self.fresh_blank())
        };

        if type_iri != format!("{RDF_NS}Description") {
            self.emit(Triple::new(subject.clone(), RDF_TYPE, Term::Iri(type_iri.to_string())));
        }
        for (predicate, value) in attrs.properties {
            let object = if predicate == RDF_TYPE {
                match self.resolve(&base, &value) {
                    Some(iri) => Term::Iri(iri),
                    None => continue,
                }
            } else {
                Term::Literal(value)
            };
            self.emit(Triple::new(subject.clone(), predicate, object));
        }
        let mut stray = attrs.stray_rdf;
        if attrs.resource.is_some() {
            stray.push("resource".to_string());
        }
        for name in stray {
            self.warn(format!("ignoring rdf:{name} on node element <{type_iri}>"));
        }

        if let Some((Frame::Property { object, .. }, _)) = self.stack.last_mut() {
            *object = Some(subject.clone().into());
        }
        self.stack.push((Frame::Node { subject }, base));
    }

    fn property_element(&mut self, subject: Subject, predicate: String, attrs: Attrs, base: Url) {
        let unsupported = if let Some(pt) = &attrs.parse_type {
            Some(format!("rdf:parseType=\"{pt}\""))
        } else if predicate.strip_prefix(RDF_NS).is_some_and(|l| {
            l == "li" || (l.starts_with('_') && l[1..].bytes().all(|b| b.is_ascii_digit()))
        }) {
            Some("container membership property".to_string())
        } else if attrs.id.is_some() {
            Some("reification (rdf:ID on a property element)".to_string())
        } else if !attrs.properties.is_empty() {
            Some("property attributes on a property element".to_string())
        } else if attrs.resource.is_some() && attrs.node_id.is_some() {
            Some("both rdf:resource and rdf:nodeID".to_string())
        } else {
            None
        };
        if let Some(what) = unsupported {
            self.warn(format!("skipping <{predicate}>: {what} is not supported"));
            self.stack.push((Frame::Skip, base));
            return;
        }

        let object = if let Some(resource) = &attrs.resource {
            match self.resolve(&base, resource) {
                Some(iri) => Some(Term::Iri(iri)),
                None => {
                    self.stack.push((Frame::Skip, base));
                    return;
                }
            }
        } else {
            attrs.node_id.as_ref().map(|id| Term::Blank(format!("n-{id}")))
        };
        let frame = Frame::Property {
            subject,
            predicate,
            object,
            text: String::new(),
            skipped: false,
        };
        self.stack.push((frame, base));
    }

    fn skip_enclosing_property(&mut self) {
        if let Some((Frame::Property { skipped, .. }, _)) = self.stack.last_mut() {
            *skipped = true;
        }
    }

    fn text(&mut self, content: &str) -> Result<(), ParseError> {
        match self.stack.last_mut() {
            None if !content.trim().is_empty() => {
                Err(ParseError::XmlNotWellFormed("text outside the root element".into()))
            }
            Some((Frame::Property { text, .. }, _)) => {
                text.push_str(content);
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn end(&mut self) {
        let Some((frame, _)) = self.stack.pop() else {
            return;
        };
        if let Frame::Property {
            subject,
            predicate,
            object,
            text,
            skipped,
        } = frame
        {
            if skipped {
                return;
            }
            let object = match object {
                Some(obj) if !text.trim().is_empty() => {
                    self.warn(format!("skipping <{predicate}>: text next to {obj}"));
                    return;
                }
                Some(obj) => obj,
                None => Term::Literal(text),
            };
            self.emit(Triple::new(subject, predicate, object));
        }
    }
}
