//! The committed fixture corpus.
//!
//! Base documents each have a hand-computed golden text. Every wrapped
//! variant embeds its base document verbatim inside one archive's additions
//! (the Archive.is variant is additionally minified), so extracting any
//! variant must yield the base golden. Pathological fixtures reproduce
//! individual parsing and acquisition hazards.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use regex::Regex;
use serde::Serialize;

macro_rules! fixture {
    ($path:literal) => {
        (
            $path,
            include_bytes!(concat!("../fixtures/", $path)).as_slice(),
        )
    };
}

const FILES: &[(&str, &[u8])] = &[
    fixture!("base/b1.html"),
    fixture!("base/b1.txt"),
    fixture!("base/b2.html"),
    fixture!("base/b2.txt"),
    fixture!("base/b3.html"),
    fixture!("base/b3.txt"),
    fixture!("base/b4.html"),
    fixture!("base/b4.txt"),
    fixture!("base/b5.html"),
    fixture!("base/b5.txt"),
    fixture!("wrapped/b1.wayback.html"),
    fixture!("wrapped/b1.uk.html"),
    fixture!("wrapped/b1.proni.html"),
    fixture!("wrapped/b1.archiveis.html"),
    fixture!("wrapped/b2.wayback.html"),
    fixture!("wrapped/b2.uk.html"),
    fixture!("wrapped/b2.proni.html"),
    fixture!("wrapped/b2.archiveis.html"),
    fixture!("wrapped/b3.wayback.html"),
    fixture!("wrapped/b3.uk.html"),
    fixture!("wrapped/b3.proni.html"),
    fixture!("wrapped/b3.archiveis.html"),
    fixture!("wrapped/b4.wayback.html"),
    fixture!("wrapped/b4.uk.html"),
    fixture!("wrapped/b4.proni.html"),
    fixture!("wrapped/b4.archiveis.html"),
    fixture!("wrapped/b5.wayback.html"),
    fixture!("wrapped/b5.uk.html"),
    fixture!("wrapped/b5.proni.html"),
    fixture!("wrapped/b5.archiveis.html"),
    fixture!("pathological/archiveis-header-no-meta.html"),
    fixture!("pathological/js-redirect-1.html"),
    fixture!("pathological/js-redirect-2.html"),
    fixture!("pathological/meta-refresh.html"),
    fixture!("pathological/meta-refresh-self.html"),
    fixture!("pathological/noscript-corrupt.html"),
    fixture!("pathological/noscript-faux.html"),
    fixture!("pathological/noscript-faux.txt"),
    fixture!("pathological/null-bytes.html"),
    fixture!("pathological/null-bytes.txt"),
    fixture!("pathological/webcite-frameset.html"),
    fixture!("pathological/webcite-nosession.html"),
    fixture!("pathological/webcite-topframe.html"),
    fixture!("pathological/wrong-charset.html"),
    fixture!("pathological/wrong-charset.txt"),
];

pub const BASE_NAMES: &[&str] = &["b1", "b2", "b3", "b4", "b5"];

/// Null bytes in `pathological/null-bytes.html`: five inside `<html>`, one
/// inside `<title>`.
pub const NULL_BYTES_COUNT: usize = 6;

/// Bytes of a committed fixture, by path relative to the fixture root.
pub fn fixture(path: &str) -> Option<&'static [u8]> {
    FILES.iter().find(|(p, _)| *p == path).map(|(_, b)| *b)
}

pub fn fixture_paths() -> impl Iterator<Item = &'static str> {
    FILES.iter().map(|(p, _)| *p)
}

fn must(path: &str) -> &'static [u8] {
    fixture(path).unwrap_or_else(|| panic!("fixture {path} is not in the corpus"))
}

fn utf8(path: &str) -> &'static str {
    std::str::from_utf8(must(path)).unwrap_or_else(|_| panic!("fixture {path} is not UTF-8"))
}

/// Directory holding the fixture files in the source tree.
pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// An archive's presentation of a base document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Wrapper {
    Wayback,
    Uk,
    Proni,
    ArchiveIs,
    /// The base document as served by a host with no archive rule.
    Plain,
}

impl Wrapper {
    pub const ALL: [Wrapper; 5] = [
        Wrapper::Wayback,
        Wrapper::Uk,
        Wrapper::Proni,
        Wrapper::ArchiveIs,
        Wrapper::Plain,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Wrapper::Wayback => "wayback",
            Wrapper::Uk => "uk",
            Wrapper::Proni => "proni",
            Wrapper::ArchiveIs => "archiveis",
            Wrapper::Plain => "plain",
        }
    }

    /// Fixture path of `base` in this wrapper.
    pub fn fixture_path(self, base: &str) -> String {
        match self {
            Wrapper::Plain => format!("base/{base}.html"),
            w => format!("wrapped/{base}.{}.html", w.as_str()),
        }
    }

    /// A memento URI on the archive host this wrapper imitates.
    pub fn memento_uri(self, base: &str) -> String {
        let original = format!("http://www.example.org/{base}.html");
        match self {
            Wrapper::Wayback => format!("http://web.archive.org/web/20081126132802/{original}"),
            Wrapper::Uk => {
                format!("http://webarchive.nationalarchives.gov.uk/20120405000000/{original}")
            }
            Wrapper::Proni => format!("http://webarchive.proni.gov.uk/20111214024729/{original}"),
            Wrapper::ArchiveIs => format!("http://archive.is/{base}x9Q"),
            Wrapper::Plain => format!("http://example.org/{base}.html"),
        }
    }
}

/// A base document and its golden text.
#[derive(Debug, Clone, Copy)]
pub struct BaseDocument {
    pub name: &'static str,
    pub html: &'static str,
    pub golden: &'static str,
}

pub fn base_documents() -> Vec<BaseDocument> {
    BASE_NAMES
        .iter()
        .map(|name| BaseDocument {
            name,
            html: utf8(&format!("base/{name}.html")),
            golden: utf8(&format!("base/{name}.txt")),
        })
        .collect()
}

pub fn wrapped(base: &str, wrapper: Wrapper) -> &'static [u8] {
    must(&wrapper.fixture_path(base))
}

pub fn pathological(name: &str) -> &'static [u8] {
    must(&format!("pathological/{name}"))
}

/// Collapses every whitespace run to one space and trims: how Archive.is
/// presents HTML.
pub fn minify(html: &str) -> String {
    static WS: OnceLock<Regex> = OnceLock::new();
    WS.get_or_init(|| Regex::new(r"\s+").expect("whitespace pattern"))
        .replace_all(html, " ")
        .trim()
        .to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureKind {
    Base,
    Wrapped,
    Pathological,
}

/// One `manifest.json` record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusEntry {
    pub fixture: String,
    pub kind: FixtureKind,
    pub base: Option<String>,
    pub wrapper: Option<Wrapper>,
    pub expected_text: Option<String>,
    pub memento_uri: Option<String>,
    pub content_type: String,
    pub null_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusManifest {
    pub entries: Vec<CorpusEntry>,
}

const HTML_UTF8: &str = "text/html; charset=utf-8";

/// Content type each pathological fixture is served with.
pub fn pathological_content_type(name: &str) -> &'static str {
    match name {
        // Deliberately wrong: the body is UTF-8.
        "wrong-charset.html" => "text/html; charset=shift_jis",
        "null-bytes.html" | "noscript-corrupt.html" | "noscript-faux.html" => "text/html",
        _ => HTML_UTF8,
    }
}

pub fn corpus_manifest() -> CorpusManifest {
    let mut entries = Vec::new();
    for base in BASE_NAMES {
        for wrapper in Wrapper::ALL {
            entries.push(CorpusEntry {
                fixture: wrapper.fixture_path(base),
                kind: if wrapper == Wrapper::Plain {
                    FixtureKind::Base
                } else {
                    FixtureKind::Wrapped
                },
                base: Some(base.to_string()),
                wrapper: Some(wrapper),
                expected_text: Some(format!("base/{base}.txt")),
                memento_uri: Some(wrapper.memento_uri(base)),
                content_type: HTML_UTF8.into(),
                null_count: None,
            });
        }
    }
    for path in fixture_paths().filter(|p| p.starts_with("pathological/") && p.ends_with(".html")) {
        let name = &path["pathological/".len()..];
        let golden = format!("{}.txt", path.trim_end_matches(".html"));
        entries.push(CorpusEntry {
            fixture: path.to_string(),
            kind: FixtureKind::Pathological,
            base: None,
            wrapper: None,
            expected_text: fixture(&golden).is_some().then_some(golden),
            memento_uri: None,
            content_type: pathological_content_type(name).into(),
            null_count: (name == "null-bytes.html").then_some(NULL_BYTES_COUNT),
        });
    }
    CorpusManifest { entries }
}

/// Writes every fixture under `output` plus a `manifest.json` describing
/// them.
pub fn build_corpus(output: &Path) -> io::Result<CorpusManifest> {
    for (path, bytes) in FILES {
        let target = output.join(path);
        if let Some(parent) = target.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(target, bytes)?;
    }
    let manifest = corpus_manifest();
    let json = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
    fs::write(output.join("manifest.json"), json)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_wrapper_embeds_its_base() {
        let open = Regex::new(r"(?i)<body\b[^>]*>").unwrap();
        let close = Regex::new(r"(?i)</body\s*>").unwrap();
        for base in base_documents() {
            let start = open.find(base.html).expect("base has a body").end();
            let end = close.find(base.html).map_or(base.html.len(), |m| m.start());
            let body = &base.html[start..end];
            for wrapper in [Wrapper::Wayback, Wrapper::Uk, Wrapper::Proni] {
                let wrapped = std::str::from_utf8(wrapped(base.name, wrapper)).unwrap();
                assert!(wrapped.contains(body), "{} {:?}", base.name, wrapper);
            }
            let minified = std::str::from_utf8(wrapped(base.name, Wrapper::ArchiveIs)).unwrap();
            assert!(
                minified.contains(minify(body).as_str()),
                "{} archiveis",
                base.name
            );
        }
    }

    #[test]
    fn archive_is_variant_is_one_line() {
        for base in BASE_NAMES {
            let html = wrapped(base, Wrapper::ArchiveIs);
            assert!(!html.contains(&b'\n'), "{base}");
        }
    }

    #[test]
    fn null_fixture_has_the_interleaved_tag() {
        let html = pathological("null-bytes.html");
        assert!(html.windows(11).any(|w| w == b"<\0h\0t\0m\0l\0>"));
        assert_eq!(html.iter().filter(|&&b| b == 0).count(), NULL_BYTES_COUNT);
    }

    #[test]
    fn webcite_frameset_structure() {
        let html = std::str::from_utf8(pathological("webcite-frameset.html")).unwrap();
        assert!(html.contains(r#"<frameset rows="60,*" frameborder="0">"#));
        assert!(html.contains(r#"<frame src="./mainframe.php" name="main""#));
        assert!(html.contains(r#"<frame src="./topframe.php" name="nav""#));
    }

    #[test]
    fn corpus_lists_every_fixture_dir_file() {
        let mut on_disk = Vec::new();
        for dir in ["base", "wrapped", "pathological"] {
            for entry in fs::read_dir(fixture_dir().join(dir)).unwrap() {
                let name = entry.unwrap().file_name().into_string().unwrap();
                on_disk.push(format!("{dir}/{name}"));
            }
        }
        on_disk.sort();
        let mut embedded: Vec<_> = fixture_paths().map(str::to_string).collect();
        embedded.sort();
        assert_eq!(on_disk, embedded);
    }

    #[test]
    fn build_writes_files_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = build_corpus(dir.path()).unwrap();
        assert_eq!(
            fs::read(dir.path().join("pathological/null-bytes.html")).unwrap(),
            pathological("null-bytes.html")
        );
        let wrapped: Vec<_> = manifest
            .entries
            .iter()
            .filter(|e| e.wrapper.is_some())
            .collect();
        assert_eq!(wrapped.len(), BASE_NAMES.len() * Wrapper::ALL.len());
        for entry in wrapped {
            let base = entry.base.as_deref().unwrap();
            assert_eq!(
                entry.expected_text.as_deref(),
                Some(format!("base/{base}.txt").as_str())
            );
        }
        let json: serde_json::Value =
            serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert!(json["entries"].as_array().unwrap().len() > 25);
    }
}
