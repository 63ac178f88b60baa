//! From a fetched payload to comparable text.
//!
//! [`extract`] runs the stages in order: null-byte scrub, charset decision,
//! noscript check, strict parse, sanitization, text extraction, prefix
//! strip, whitespace normalization. Each stage is also public on its own.

mod charset;
mod dom;
mod normalize;
mod noscript;

use encoding_rs::UTF_8;
use serde::{Deserialize, Serialize};

pub use charset::{detect_charset, parse_content_type, CharsetDecision, CharsetSource};
pub use dom::{extract_text, sanitize_dom, Document};
pub use normalize::{normalize_whitespace, strip_prefixes};
pub use noscript::detect_noscript_corruption;

use crate::acquisition::{scan_meta_refresh_text, FetchOutcome, RefreshScan};
use crate::rules::{match_archive, RuleSet};

/// Media types handled as HTML.
pub const HTML_MEDIA_TYPES: &[&str] = &["text/html", "application/xhtml+xml"];

#[derive(Debug, thiserror::Error)]
pub enum ExtractError {
    #[error("final response has status {status}; only 2xx payloads are extracted")]
    NonSuccessStatus { status: u16 },
    #[error("body decodes neither as {charset} nor as UTF-8")]
    Undecodable { charset: String },
    #[error("noscript corruption: {detail}")]
    NoscriptCorruption { detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticCode {
    NullBytesRemoved,
    CharsetFallback,
    CharsetUndecodable,
    FauxNoscriptTags,
    NoscriptCorruption,
    MetaRefreshIgnored,
    UnsupportedMediaType,
    PrefixStripped,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::NullBytesRemoved => "null-bytes-removed",
            DiagnosticCode::CharsetFallback => "charset-fallback",
            DiagnosticCode::CharsetUndecodable => "charset-undecodable",
            DiagnosticCode::FauxNoscriptTags => "faux-noscript-tags",
            DiagnosticCode::NoscriptCorruption => "noscript-corruption",
            DiagnosticCode::MetaRefreshIgnored => "meta-refresh-ignored",
            DiagnosticCode::UnsupportedMediaType => "unsupported-media-type",
            DiagnosticCode::PrefixStripped => "prefix-stripped",
        }
    }
}

impl std::fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Something the pipeline noticed or did. `detail` is for humans only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub detail: String,
    pub count: Option<u64>,
}

impl Diagnostic {
    fn new(code: DiagnosticCode, detail: impl Into<String>) -> Self {
        Self {
            code,
            detail: detail.into(),
            count: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionResult {
    /// Newline-separated tokens; no empty lines, no leading/trailing newline.
    pub text: String,
    /// `None` when the payload was not HTML.
    pub charset: Option<CharsetDecision>,
    pub archive_id: String,
    pub diagnostics: Vec<Diagnostic>,
}

impl ExtractionResult {
    pub fn has(&self, code: DiagnosticCode) -> bool {
        self.diagnostics.iter().any(|d| d.code == code)
    }

    pub fn diagnostic(&self, code: DiagnosticCode) -> Option<&Diagnostic> {
        self.diagnostics.iter().find(|d| d.code == code)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExtractOptions {
    /// Fail with [`ExtractError::Undecodable`] instead of decoding with
    /// replacement characters.
    pub strict_decode: bool,
}

/// Returns `body` without its `0x00` bytes, and how many were removed.
pub fn strip_null_bytes(body: &[u8]) -> (Vec<u8>, usize) {
    let scrubbed: Vec<u8> = body.iter().copied().filter(|&b| b != 0).collect();
    let removed = body.len() - scrubbed.len();
    (scrubbed, removed)
}

pub fn extract(outcome: &FetchOutcome, rules: &RuleSet) -> Result<ExtractionResult, ExtractError> {
    extract_with(outcome, rules, ExtractOptions::default())
}

pub fn extract_with(
    outcome: &FetchOutcome,
    rules: &RuleSet,
    options: ExtractOptions,
) -> Result<ExtractionResult, ExtractError> {
    if !outcome.is_success() {
        return Err(ExtractError::NonSuccessStatus {
            status: outcome.status,
        });
    }
    let rule = match_archive(&outcome.final_uri, rules).unwrap_or(rules.fallback());
    let mut result = ExtractionResult {
        text: String::new(),
        charset: None,
        archive_id: rule.archive_id.clone(),
        diagnostics: Vec::new(),
    };

    let media_type = outcome
        .header("content-type")
        .map(|v| parse_content_type(v).0);
    match media_type.as_deref() {
        Some(t) if HTML_MEDIA_TYPES.contains(&t) => {}
        other => {
            result.diagnostics.push(Diagnostic::new(
                DiagnosticCode::UnsupportedMediaType,
                match other {
                    Some(t) => format!("media type {t} is not extracted"),
                    None => "response has no Content-Type".to_string(),
                },
            ));
            return Ok(result);
        }
    }

    let (body, nulls) = strip_null_bytes(&outcome.body);
    if nulls > 0 {
        result.diagnostics.push(Diagnostic {
            code: DiagnosticCode::NullBytesRemoved,
            detail: "null bytes removed before parsing".into(),
            count: Some(nulls as u64),
        });
    }

    let (decision, decoded) = match detect_charset(&outcome.headers, &body) {
        Ok(decision) => {
            let decoded = decision
                .decode(&body)
                .expect("detect_charset only returns charsets that decode the body");
            if decision.source == CharsetSource::FallbackUtf8 {
                result.diagnostics.push(Diagnostic::new(
                    DiagnosticCode::CharsetFallback,
                    "declared charset failed to decode; used UTF-8",
                ));
            }
            (decision, decoded)
        }
        Err(err) if options.strict_decode => return Err(err),
        Err(ExtractError::Undecodable { charset }) => {
            result.diagnostics.push(Diagnostic::new(
                DiagnosticCode::CharsetUndecodable,
                format!("neither {charset} nor UTF-8 decodes the body; invalid sequences replaced"),
            ));
            let (decoded, _) = UTF_8.decode_without_bom_handling(&body);
            (
                CharsetDecision {
                    charset: "utf-8".into(),
                    source: CharsetSource::FallbackUtf8,
                },
                decoded.into_owned(),
            )
        }
        Err(err) => return Err(err),
    };
    result.charset = Some(decision);
    let decoded = decoded.strip_prefix('\u{feff}').unwrap_or(&decoded);

    if let Some(diag) = noscript::detect_in_text(decoded) {
        if diag.code == DiagnosticCode::NoscriptCorruption {
            return Err(ExtractError::NoscriptCorruption {
                detail: diag.detail,
            });
        }
        result.diagnostics.push(diag);
    }

    if let Ok(final_uri) = url::Url::parse(&outcome.final_uri) {
        match scan_meta_refresh_text(decoded, &final_uri) {
            RefreshScan::Absent => {}
            RefreshScan::Found(refresh) => result.diagnostics.push(Diagnostic::new(
                DiagnosticCode::MetaRefreshIgnored,
                match refresh.target {
                    Some(t) => format!("refresh after {}s to {t} not followed", refresh.delay),
                    None => format!("self-refresh after {}s", refresh.delay),
                },
            )),
            RefreshScan::Unparseable(content) => result.diagnostics.push(Diagnostic::new(
                DiagnosticCode::MetaRefreshIgnored,
                format!("unparseable refresh content {content:?}"),
            )),
        }
    }

    let mut document = Document::parse(decoded);
    sanitize_dom(&mut document, rule, &body);
    let raw_text = extract_text(&document);
    let (raw_text, stripped) = strip_prefixes(&raw_text, rule, &body);
    if stripped {
        result.diagnostics.push(Diagnostic::new(
            DiagnosticCode::PrefixStripped,
            format!("removed {} text prefix", rule.archive_id),
        ));
    }
    result.text = normalize_whitespace(&raw_text);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::builtin_rules;
    use chrono::Utc;

    fn outcome(uri: &str, content_type: Option<&str>, body: &[u8]) -> FetchOutcome {
        FetchOutcome {
            request_uri: uri.into(),
            final_uri: uri.into(),
            chain: Vec::new(),
            status: 200,
            headers: content_type
                .map(|ct| vec![("Content-Type".to_string(), ct.to_string())])
                .unwrap_or_default(),
            body: body.to_vec(),
            fetched_at: Utc::now(),
            attempts: 1,
        }
    }

    #[test]
    fn null_scrub() {
        assert_eq!(
            strip_null_bytes(b"<\0h\0t\0m\0l\0>"),
            (b"<html>".to_vec(), 5)
        );
        assert_eq!(strip_null_bytes(b"abc"), (b"abc".to_vec(), 0));
        assert_eq!(strip_null_bytes(&[0; 4]), (Vec::new(), 4));
    }

    #[test]
    fn pdf_is_unsupported() {
        let result = extract(
            &outcome(
                "http://example.org/a.pdf",
                Some("application/pdf"),
                b"%PDF-1.4",
            ),
            &builtin_rules(),
        )
        .unwrap();
        assert_eq!(result.text, "");
        assert_eq!(result.charset, None);
        assert!(result.has(DiagnosticCode::UnsupportedMediaType));
    }

    #[test]
    fn missing_content_type_is_unsupported() {
        let result = extract(
            &outcome("http://example.org/", None, b"<p>x</p>"),
            &builtin_rules(),
        )
        .unwrap();
        assert!(result.has(DiagnosticCode::UnsupportedMediaType));
    }

    #[test]
    fn non_success_refused() {
        let mut o = outcome("http://example.org/", Some("text/html"), b"<p>gone</p>");
        o.status = 404;
        assert!(matches!(
            extract(&o, &builtin_rules()),
            Err(ExtractError::NonSuccessStatus { status: 404 })
        ));
    }

    #[test]
    fn lenient_and_strict_decoding() {
        let o = outcome("http://example.org/", Some("text/html"), b"<p>a\xffb</p>");
        let lenient = extract(&o, &builtin_rules()).unwrap();
        assert_eq!(lenient.text, "a\u{fffd}b");
        assert!(lenient.has(DiagnosticCode::CharsetUndecodable));
        assert!(!lenient.has(DiagnosticCode::CharsetFallback));
        let strict = extract_with(
            &o,
            &builtin_rules(),
            ExtractOptions {
                strict_decode: true,
            },
        );
        assert!(matches!(strict, Err(ExtractError::Undecodable { .. })));
    }

    #[test]
    fn self_refresh_noted() {
        let o = outcome(
            "http://example.org/",
            Some("text/html"),
            br#"<head><meta http-equiv="refresh" content="300"></head><p>x</p>"#,
        );
        let result = extract(&o, &builtin_rules()).unwrap();
        assert_eq!(result.text, "x");
        assert!(result.has(DiagnosticCode::MetaRefreshIgnored));
    }

    #[test]
    fn diagnostics_serialize_as_documented() {
        let diag = Diagnostic {
            code: DiagnosticCode::NullBytesRemoved,
            detail: "d".into(),
            count: Some(3),
        };
        assert_eq!(
            serde_json::to_string(&[diag]).unwrap(),
            r#"[{"code":"null-bytes-removed","detail":"d","count":3}]"#
        );
    }
}
