use std::sync::OnceLock;

use encoding_rs::{Encoding, UTF_8};
use regex::bytes::Regex;
use serde::{Deserialize, Serialize};

use super::ExtractError;
use crate::acquisition::header_value;

/// Which step of the charset algorithm produced the decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CharsetSource {
    ContentTypeHeader,
    XmlDeclaration,
    DefaultUtf8,
    FallbackUtf8,
}

impl CharsetSource {
    pub fn as_str(self) -> &'static str {
        match self {
            CharsetSource::ContentTypeHeader => "content-type-header",
            CharsetSource::XmlDeclaration => "xml-declaration",
            CharsetSource::DefaultUtf8 => "default-utf8",
            CharsetSource::FallbackUtf8 => "fallback-utf8",
        }
    }
}

impl std::fmt::Display for CharsetSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharsetDecision {
    /// Lowercased label as declared, or `utf-8`.
    pub charset: String,
    pub source: CharsetSource,
}

impl CharsetDecision {
    fn utf8(source: CharsetSource) -> Self {
        Self {
            charset: "utf-8".into(),
            source,
        }
    }

    /// Decodes `body` with the decided charset, without replacement.
    pub fn decode(&self, body: &[u8]) -> Option<String> {
        let encoding = Encoding::for_label(self.charset.as_bytes())?;
        decode_strict(encoding, body)
    }
}

/// Splits a `Content-Type` value into lowercased media type and charset.
pub fn parse_content_type(header_value: &str) -> (String, Option<String>) {
    let mut parts = header_value.split(';');
    let media_type = parts.next().unwrap_or("").trim().to_ascii_lowercase();
    let charset = parts.find_map(|param| {
        let (name, value) = param.split_once('=')?;
        if !name.trim().eq_ignore_ascii_case("charset") {
            return None;
        }
        let value = value.trim().trim_matches(|c| c == '"' || c == '\'').trim();
        (!value.is_empty()).then(|| value.to_ascii_lowercase())
    });
    (media_type, charset)
}

fn xml_declaration() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r#"\A(?-u:\xEF\xBB\xBF)?[ \t\r\n]*<\?xml[ \t\r\n][^>]*?encoding[ \t\r\n]*=[ \t\r\n]*["']([A-Za-z0-9._:-]+)["']"#)
            .expect("xml declaration pattern")
    })
}

/// Encoding named by a leading `<?xml ... encoding="..."?>` declaration.
pub(crate) fn xml_encoding(body: &[u8]) -> Option<String> {
    xml_declaration()
        .captures(body)
        .and_then(|c| c.get(1))
        .map(|m| String::from_utf8_lossy(m.as_bytes()).to_ascii_lowercase())
}

/// Chooses the charset for an HTML body.
///
/// 1. The `Content-Type` charset if present, otherwise UTF-8.
/// 2. For XHTML, an XML declaration's encoding overrides it.
/// 3. If decoding with that charset fails, UTF-8.
/// 4. If UTF-8 also fails, [`ExtractError::Undecodable`].
///
/// An unknown label counts as a failed decode.
pub fn detect_charset(
    headers: &[(String, String)],
    body: &[u8],
) -> Result<CharsetDecision, ExtractError> {
    let mut decision =
        match header_value(headers, "content-type").and_then(|v| parse_content_type(v).1) {
            Some(charset) => CharsetDecision {
                charset,
                source: CharsetSource::ContentTypeHeader,
            },
            None => CharsetDecision::utf8(CharsetSource::DefaultUtf8),
        };
    if let Some(charset) = xml_encoding(body) {
        decision = CharsetDecision {
            charset,
            source: CharsetSource::XmlDeclaration,
        };
    }
    if decision.decode(body).is_some() {
        return Ok(decision);
    }
    if decode_strict(UTF_8, body).is_some() {
        return Ok(CharsetDecision::utf8(CharsetSource::FallbackUtf8));
    }
    Err(ExtractError::Undecodable {
        charset: decision.charset,
    })
}

fn decode_strict(encoding: &'static Encoding, body: &[u8]) -> Option<String> {
    encoding
        .decode_without_bom_handling_and_without_replacement(body)
        .map(|text| text.into_owned())
}
