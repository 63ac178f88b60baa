//! Hand-written oracle for the charset algorithm.
//!
//! The document's true encoding is Shift_JIS. Each axis varies one input:
//! the `Content-Type` charset (correct, wrong, absent), a leading XML
//! declaration (correct, different, absent) and the body (valid Shift_JIS
//! that is invalid UTF-8, or UTF-8 that is invalid Shift_JIS). Expected
//! decisions are written out per cell, not computed.

/// `日本語` in Shift_JIS. Not valid UTF-8.
pub const SJIS_TEXT: &[u8] = &[0x93, 0xFA, 0x96, 0x7B, 0x8C, 0xEA];
/// `à` in UTF-8. Not valid Shift_JIS (0xA0 is unmapped).
pub const UTF8_TEXT: &[u8] = &[0xC3, 0xA0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeaderCharset {
    Correct,
    Wrong,
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XmlDeclaration {
    Correct,
    Different,
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Body {
    Valid,
    Invalid,
}

/// The decision a cell must produce: `(charset, source)`, or undecodable
/// with the charset that was tried.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expected {
    Decision(&'static str, &'static str),
    Undecodable(&'static str),
}

#[derive(Debug, Clone, Copy)]
pub struct CharsetCell {
    pub header: HeaderCharset,
    pub xml: XmlDeclaration,
    pub body: Body,
    pub expected: Expected,
}

impl CharsetCell {
    pub fn headers(&self) -> Vec<(String, String)> {
        let value = match self.header {
            HeaderCharset::Correct => "text/html; charset=shift_jis",
            HeaderCharset::Wrong => "text/html; charset=utf-8",
            HeaderCharset::Absent => "text/html",
        };
        vec![("Content-Type".into(), value.into())]
    }

    pub fn body(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self.xml {
            XmlDeclaration::Correct => {
                out.extend_from_slice(b"<?xml version=\"1.0\" encoding=\"shift_jis\"?>\n")
            }
            XmlDeclaration::Different => {
                out.extend_from_slice(b"<?xml version=\"1.0\" encoding=\"utf-8\"?>\n")
            }
            XmlDeclaration::Absent => {}
        }
        out.extend_from_slice(b"<html><body><p>");
        out.extend_from_slice(match self.body {
            Body::Valid => SJIS_TEXT,
            Body::Invalid => UTF8_TEXT,
        });
        out.extend_from_slice(b"</p></body></html>");
        out
    }

    pub fn label(&self) -> String {
        format!(
            "header={:?} xml={:?} body={:?}",
            self.header, self.xml, self.body
        )
    }
}

const fn cell(
    header: HeaderCharset,
    xml: XmlDeclaration,
    body: Body,
    expected: Expected,
) -> CharsetCell {
    CharsetCell {
        header,
        xml,
        body,
        expected,
    }
}

pub fn charset_matrix() -> Vec<CharsetCell> {
    use Body::*;
    use Expected::*;
    use HeaderCharset as H;
    use XmlDeclaration as X;
    vec![
        cell(
            H::Correct,
            X::Correct,
            Valid,
            Decision("shift_jis", "xml-declaration"),
        ),
        cell(
            H::Correct,
            X::Correct,
            Invalid,
            Decision("utf-8", "fallback-utf8"),
        ),
        cell(H::Correct, X::Different, Valid, Undecodable("utf-8")),
        cell(
            H::Correct,
            X::Different,
            Invalid,
            Decision("utf-8", "xml-declaration"),
        ),
        cell(
            H::Correct,
            X::Absent,
            Valid,
            Decision("shift_jis", "content-type-header"),
        ),
        cell(
            H::Correct,
            X::Absent,
            Invalid,
            Decision("utf-8", "fallback-utf8"),
        ),
        cell(
            H::Wrong,
            X::Correct,
            Valid,
            Decision("shift_jis", "xml-declaration"),
        ),
        cell(
            H::Wrong,
            X::Correct,
            Invalid,
            Decision("utf-8", "fallback-utf8"),
        ),
        cell(H::Wrong, X::Different, Valid, Undecodable("utf-8")),
        cell(
            H::Wrong,
            X::Different,
            Invalid,
            Decision("utf-8", "xml-declaration"),
        ),
        cell(H::Wrong, X::Absent, Valid, Undecodable("utf-8")),
        cell(
            H::Wrong,
            X::Absent,
            Invalid,
            Decision("utf-8", "content-type-header"),
        ),
        cell(
            H::Absent,
            X::Correct,
            Valid,
            Decision("shift_jis", "xml-declaration"),
        ),
        cell(
            H::Absent,
            X::Correct,
            Invalid,
            Decision("utf-8", "fallback-utf8"),
        ),
        cell(H::Absent, X::Different, Valid, Undecodable("utf-8")),
        cell(
            H::Absent,
            X::Different,
            Invalid,
            Decision("utf-8", "xml-declaration"),
        ),
        cell(H::Absent, X::Absent, Valid, Undecodable("utf-8")),
        cell(
            H::Absent,
            X::Absent,
            Invalid,
            Decision("utf-8", "default-utf8"),
        ),
    ]
}
