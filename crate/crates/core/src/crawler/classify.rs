use serde::Serialize;
use url::Url;

/// Number of leading body bytes inspected when sniffing content.
pub const SNIFF_WINDOW: usize = 4096;

const ONTOLOGY_MEDIA_TYPES: &[&str] = &["application/rdf+xml", "application/owl+xml", "text/rdf"];
const HTML_MEDIA_TYPES: &[&str] = &["text/html", "application/xhtml+xml"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceKind {
    Html,
    Ontology,
    Other,
}

/// Decides what a fetched resource is. The ontology tests run first, so an
/// RDF document served as `text/html` is still an ontology.
pub fn classify_resource(url: &Url, content_type: &str, body_prefix: &[u8]) -> ResourceKind {
    let prefix = &body_prefix[..body_prefix.len().min(SNIFF_WINDOW)];
    let media_type = content_type
        .split(';')
        .next()
        .unwrap_or_default()
        .trim()
        .to_ascii_lowercase();
    let path = url.path().to_ascii_lowercase();

    if path.ends_with(".owl")
        || path.ends_with(".rdf")
        || ONTOLOGY_MEDIA_TYPES.contains(&media_type.as_str())
        || contains(prefix, b"<rdf:RDF")
        || contains(prefix, b"owl:Ontology")
    {
        return ResourceKind::Ontology;
    }
    if HTML_MEDIA_TYPES.contains(&media_type.as_str())
        || prefix.windows(5).any(|w| w.eq_ignore_ascii_case(b"<html"))
    {
        return ResourceKind::Html;
    }
    ResourceKind::Other
}

fn contains(hay: &[u8], needle: &[u8]) -> bool {
    hay.windows(needle.len()).any(|w| w == needle)
}
