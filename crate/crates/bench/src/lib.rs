//! Synthetic ontology corpora for benchmarks.

use owse_core::rdf::{parse_rdfxml, summarize_ontology, OntologySummary};
use owse_core::storage::sha256_hex;
use url::Url;

const WORDS: &[&str] = &[
    "agent", "book", "cheese", "driver", "engine", "fruit", "garden", "harbor", "island", "journal", "kitchen",
    "ledger", "market", "number", "orchard", "pizza", "quarry", "river", "station", "topping", "vehicle", "wheel",
];

fn word(i: usize) -> &'static str {
    WORDS[i % WORDS.len()]
}

fn capitalized(i: usize) -> String {
    let w = word(i);
    let mut c = w.chars();
    let first = c.next().map(|f| f.to_ascii_uppercase()).unwrap_or_default();
    format!("{first}{}{}", c.as_str(), i / WORDS.len())
}

/// An RDF/XML document with `classes` classes in a subclass chain and one
/// object property per pair of neighbours.
pub fn synthetic_rdfxml(doc: usize, classes: usize) -> Vec<u8> {
    let mut out = String::from(
        r#"<?xml version="1.0"?>
<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"
         xmlns:rdfs="http://www.w3.org/2000/01/rdf-schema#"
         xmlns:owl="http://www.w3.org/2002/07/owl#">
"#,
    );
    out.push_str(&format!("  <owl:Ontology rdf:about=\"http://bench.test/o{doc}\"/>\n"));
    for i in 0..classes {
        let name = capitalized(doc * 7 + i);
        out.push_str(&format!(
            "  <owl:Class rdf:about=\"#{name}\">\n    <rdfs:label>{} {}</rdfs:label>\n",
            word(i),
            word(doc + i)
        ));
        if i > 0 {
            out.push_str(&format!(
                "    <rdfs:subClassOf rdf:resource=\"#{}\"/>\n",
                capitalized(doc * 7 + i - 1)
            ));
        }
        out.push_str("  </owl:Class>\n");
        if i > 0 {
            out.push_str(&format!(
                "  <owl:ObjectProperty rdf:about=\"#has{name}\">\n    <rdfs:domain rdf:resource=\"#{}\"/>\n    <rdfs:range rdf:resource=\"#{name}\"/>\n  </owl:ObjectProperty>\n",
                capitalized(doc * 7 + i - 1)
            ));
        }
    }
    out.push_str("</rdf:RDF>\n");
    out.into_bytes()
}

pub fn synthetic_url(doc: usize) -> Url {
    Url::parse(&format!("http://bench.test/onts/o{doc}.owl")).expect("valid url")
}

pub fn synthetic_summaries(docs: usize, classes: usize) -> Vec<OntologySummary> {
    (0..docs)
        .map(|d| {
            let bytes = synthetic_rdfxml(d, classes);
            let url = synthetic_url(d);
            let triples = parse_rdfxml(&bytes, &url).expect("synthetic document parses");
            summarize_ontology(&triples, url.as_str(), &sha256_hex(&bytes), bytes.len() as u64)
        })
        .collect()
}
