//! Tolerant extraction of `href` targets from HTML.
//!
//! This is a byte scanner over tags, not an HTML parser: it looks at `<a>`,
//! `<link>` and `<base>` start tags, skips comments and the raw text of
//! `<script>`/`<style>`, and accepts whatever attributes it can read.

use url::Url;

use super::url::normalize_url;

#[derive(Debug)]
struct Tag {
    name: String,
    href: Option<String>,
}

/// Returns the `href` of every anchor and link tag in document order,
/// resolved against the first `<base href>` (itself resolved against
/// `base`) or against `base`. Unresolvable and non-http(s) targets are
/// dropped; duplicates are kept.
pub fn extract_html_links(body: &[u8], base: &Url) -> Vec<Url> {
    let text = String::from_utf8_lossy(body);
    let tags = scan_tags(&text);

    let doc_base = tags
        .iter()
        .find(|t| t.name == "base" && t.href.is_some())
        .and_then(|t| normalize_url(t.href.as_deref()?, Some(base)).ok())
        .unwrap_or_else(|| base.clone());

    tags.iter()
        .filter(|t| t.name == "a" || t.name == "link")
        .filter_map(|t| t.href.as_deref())
        .filter_map(|href| normalize_url(href, Some(&doc_base)).ok())
        .collect()
}

fn scan_tags(text: &str) -> Vec<Tag> {
    let bytes = text.as_bytes();
    let mut tags = Vec::new();
    let mut i = 0;
    while let Some(off) = memchr(b'<', &bytes[i..]) {
        i += off + 1;
        if bytes[i..].starts_with(b"!--") {
            i = find(bytes, i + 3, b"-->").map_or(bytes.len(), |p| p + 3);
            continue;
        }
        let name_end = i + bytes[i..]
            .iter()
            .take_while(|b| b.is_ascii_alphanumeric())
            .count();
        if name_end == i {
            continue;
        }
        let name = text[i..name_end].to_ascii_lowercase();
        let (attrs, end) = scan_attributes(text, name_end);
        i = end;
        match name.as_str() {
            "a" | "link" | "base" => {
                let href = attrs
                    .into_iter()
                    .find(|(k, _)| k == "href")
                    .map(|(_, v)| decode_entities(v.trim()));
                tags.push(Tag { name, href });
            }
            "script" | "style" => {
                let close = format!("</{name}");
                i = find_ci(bytes, i, close.as_bytes()).unwrap_or(bytes.len());
            }
            _ => {}
        }
    }
    tags
}

/// Reads `key=value` pairs up to the closing `>`. Returns the attributes
/// (lowercased keys) and the offset just past the tag.
fn scan_attributes(text: &str, mut i: usize) -> (Vec<(String, String)>, usize) {
    let bytes = text.as_bytes();
    let mut attrs = Vec::new();
    loop {
        while i < bytes.len() && (bytes[i].is_ascii_whitespace() || bytes[i] == b'/') {
            i += 1;
        }
        if i >= bytes.len() {
            return (attrs, i);
        }
        if bytes[i] == b'>' {
            return (attrs, i + 1);
        }
        let key_start = i;
        while i < bytes.len() && !matches!(bytes[i], b'=' | b'>' | b'/') && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        let key = text[key_start..i].to_ascii_lowercase();
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i >= bytes.len() || bytes[i] != b'=' {
            attrs.push((key, String::new()));
            continue;
        }
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        let value = match bytes.get(i) {
            Some(&q @ (b'"' | b'\'')) => {
                let start = i + 1;
                let end = memchr(q, &bytes[start..]).map_or(bytes.len(), |p| start + p);
                i = (end + 1).min(bytes.len());
                &text[start..end]
            }
            _ => {
                let start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'>' {
                    i += 1;
                }
                &text[start..i]
            }
        };
        attrs.push((key, value.to_string()));
    }
}

fn memchr(needle: u8, hay: &[u8]) -> Option<usize> {
    hay.iter().position(|&b| b == needle)
}

fn find(hay: &[u8], from: usize, needle: &[u8]) -> Option<usize> {
    hay.get(from..)?
        .windows(needle.len())
        .position(|w| w == needle)
        .map(|p| p + from)
}

fn find_ci(hay: &[u8], from: usize, needle: &[u8]) -> Option<usize> {
    hay.get(from..)?
        .windows(needle.len())
        .position(|w| w.eq_ignore_ascii_case(needle))
        .map(|p| p + from)
}

/// Decodes the handful of character references that show up in URLs.
fn decode_entities(raw: &str) -> String {
    if !raw.contains('&') {
        return raw.to_string();
    }
    let mut out = String::with_capacity(raw.len());
    let mut rest = raw;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        rest = &rest[amp..];
        let decoded = rest.find(';').filter(|&semi| semi <= 10).and_then(|semi| {
            let entity = &rest[1..semi];
            let c = match entity {
                "amp" => Some('&'),
                "lt" => Some('<'),
                "gt" => Some('>'),
                "quot" => Some('"'),
                "apos" => Some('\''),
                _ => {
                    let num = entity.strip_prefix('#')?;
                    let code = match num.strip_prefix(['x', 'X']) {
                        Some(hex) => u32::from_str_radix(hex, 16).ok()?,
                        None => num.parse().ok()?,
                    };
                    char::from_u32(code)
                }
            };
            c.map(|c| (c, semi))
        });
        match decoded {
            Some((c, semi)) => {
                out.push(c);
                rest = &rest[semi + 1..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}
