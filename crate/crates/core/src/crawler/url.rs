use url::Url;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UrlError {
    #[error("unsupported scheme {0:?}")]
    UnsupportedScheme(String),
    #[error("cannot parse {raw:?}: {reason}")]
    Unparseable { raw: String, reason: String },
}

/// Resolves `raw` against `base` and brings it into the canonical form
/// used for URL equality throughout the crawler and the URL journal.
///
/// The `url` crate already lowercases scheme and host, drops default ports,
/// removes dot segments and turns an empty path into `/`; on top of that the
/// fragment is removed and only http/https are accepted.
pub fn normalize_url(raw: &str, base: Option<&Url>) -> Result<Url, UrlError> {
    let parsed = match base {
        Some(base) => base.join(raw),
        None => Url::parse(raw),
    };
    let mut url = parsed.map_err(|e| UrlError::Unparseable {
        raw: raw.to_string(),
        reason: e.to_string(),
    })?;
    match url.scheme() {
        "http" | "https" => {}
        other => return Err(UrlError::UnsupportedScheme(other.to_string())),
    }
    if url.host_str().is_none_or(str::is_empty) {
        return Err(UrlError::Unparseable {
            raw: raw.to_string(),
            reason: "missing host".into(),
        });
    }
    url.set_fragment(None);
    Ok(url)
}

/// `host:port` key used for per-host politeness and robots caching.
pub fn host_key(url: &Url) -> String {
    format!(
        "{}:{}",
        url.host_str().unwrap_or_default(),
        url.port_or_known_default().unwrap_or(0)
    )
}
