//! Document retrieval with an on-disk cache.
//!
//! Cache entries live in `<cache_dir>/<sha256(url)>.txt` and are written to
//! a temporary file first and then renamed, so a reader never sees a partial
//! entry.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const CACHE_DIR_ENV: &str = "BIOQA_CACHE_DIR";
pub const OFFLINE_ENV: &str = "BIOQA_OFFLINE";

pub trait HttpClient {
    fn get(&self, url: &str) -> std::result::Result<String, String>;
}

pub struct UreqClient {
    agent: ureq::Agent,
}

impl UreqClient {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        UreqClient { agent }
    }
}

impl Default for UreqClient {
    fn default() -> Self {
        Self::new(Duration::from_secs(30))
    }
}

impl HttpClient for UreqClient {
    fn get(&self, url: &str) -> std::result::Result<String, String> {
        self.agent
            .get(url)
            .call()
            .map_err(|e| e.to_string())?
            .body_mut()
            .read_to_string()
            .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchOptions {
    pub cache_dir: PathBuf,
    pub offline: bool,
}

impl FetchOptions {
    /// Reads `BIOQA_CACHE_DIR` (default `.bioqa-cache`) and `BIOQA_OFFLINE`.
    pub fn from_env() -> Self {
        let cache_dir = std::env::var_os(CACHE_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".bioqa-cache"));
        let offline = std::env::var(OFFLINE_ENV).is_ok_and(|v| v == "1" || v.eq_ignore_ascii_case("true"));
        FetchOptions { cache_dir, offline }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FetchOutcome {
    pub texts: BTreeMap<String, String>,
    /// Per-URL failures; callers may continue with snippets.
    pub errors: BTreeMap<String, String>,
}

pub fn cache_path(cache_dir: &Path, url: &str) -> PathBuf {
    let digest = Sha256::digest(url.as_bytes());
    cache_dir.join(format!("{}.txt", hex::encode(digest)))
}

fn write_atomic(dir: &Path, target: &Path, text: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(text.as_bytes()).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(target).map_err(|e| Error::io(target, e.error))?;
    Ok(())
}

/// Returns the plain text of each URL, preferring the cache.
///
/// Network failures are collected per URL. In offline mode a cache miss is
/// a hard error.
pub fn fetch_documents(urls: &[String], opts: &FetchOptions, client: &dyn HttpClient) -> Result<FetchOutcome> {
    let mut out = FetchOutcome::default();
    for url in urls {
        if out.texts.contains_key(url) {
            continue;
        }
        let path = cache_path(&opts.cache_dir, url);
        match std::fs::read_to_string(&path) {
            Ok(text) => {
                out.texts.insert(url.clone(), text);
                continue;
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(Error::io(path, e)),
        }
        if opts.offline {
            return Err(Error::OfflineCacheMiss { url: url.clone() });
        }
        let (fetch_url, pubmed) = match pubmed_id(url) {
            Some(id) => (
                format!("https://eutils.ncbi.nlm.nih.gov/entrez/eutils/efetch.fcgi?db=pubmed&id={id}&retmode=xml"),
                true,
            ),
            None => (url.clone(), false),
        };
        match client.get(&fetch_url) {
            Ok(body) => {
                let text = if pubmed {
                    pubmed_xml_text(&body)
                } else {
                    html_text(&body)
                };
                write_atomic(&opts.cache_dir, &path, &text)?;
                out.texts.insert(url.clone(), text);
            }
            Err(e) => {
                log::warn!("could not fetch {url}: {e}");
                out.errors.insert(url.clone(), e);
            }
        }
    }
    Ok(out)
}

/// PubMed id from URLs like `http://www.ncbi.nlm.nih.gov/pubmed/23456789`.
pub fn pubmed_id(url: &str) -> Option<&str> {
    let rest = url.split("/pubmed/").nth(1)?;
    let id = rest.trim_end_matches('/');
    (!id.is_empty() && id.bytes().all(|b| b.is_ascii_digit())).then_some(id)
}

/// Title and abstract paragraphs from an efetch PubMed XML record.
pub fn pubmed_xml_text(xml: &str) -> String {
    let mut parts = Vec::new();
    for tag in ["ArticleTitle", "AbstractText"] {
        let open = format!("<{tag}");
        let close = format!("</{tag}>");
        let mut rest = xml;
        while let Some(start) = rest.find(&open) {
            let after = &rest[start + open.len()..];
            // the opening tag may carry attributes, e.g. Label="METHODS"
            let Some(gt) = after.find('>') else { break };
            let body = &after[gt + 1..];
            let Some(end) = body.find(&close) else { break };
            parts.push(html_text(&body[..end]));
            rest = &body[end + close.len()..];
        }
    }
    parts.retain(|p| !p.is_empty());
    parts.join(" ")
}

/// Visible text of an HTML page: drops `script` and `style` elements and all
/// tags, decodes the common entities and collapses whitespace.
pub fn html_text(html: &str) -> String {
    let mut text = String::with_capacity(html.len());
    let lower = html.to_ascii_lowercase();
    let mut i = 0;
    while i < html.len() {
        let rest = &html[i..];
        if rest.starts_with('<') {
            let lrest = &lower[i..];
            let skip_to = ["script", "style"].iter().find_map(|name| {
                let opens = lrest.strip_prefix('<')?.strip_prefix(name)?;
                opens
                    .starts_with(|c: char| c == '>' || c.is_whitespace())
                    .then(|| lrest.find(&format!("</{name}")))
                    .flatten()
            });
            let from = i + skip_to.unwrap_or(0);
            match html[from..].find('>') {
                Some(end) => {
                    i = from + end + 1;
                    text.push(' ');
                }
                None => break,
            }
        } else {
            let next = rest.find('<').unwrap_or(rest.len());
            text.push_str(&rest[..next]);
            i += next;
        }
    }
    let decoded = text
        .replace("&nbsp;", " ")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&#39;", "'")
        .replace("&apos;", "'")
        .replace("&amp;", "&");
    decoded.split_whitespace().collect::<Vec<_>>().join(" ")
}
