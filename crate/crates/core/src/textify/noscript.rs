use std::sync::OnceLock;

use regex::Regex;

use super::{Diagnostic, DiagnosticCode};
use crate::html::{tokenize, HtmlToken};

/// Elements whose end tag a strict parser needs to close them; opening one
/// inside `noscript` and closing it outside leaves the tree unrecoverable.
const STRUCTURAL: &[&str] = &[
    "table",
    "thead",
    "tbody",
    "tfoot",
    "tr",
    "td",
    "th",
    "caption",
    "colgroup",
    "div",
    "form",
    "ul",
    "ol",
    "dl",
    "blockquote",
    "center",
    "select",
    "textarea",
    "iframe",
    "object",
    "section",
    "article",
    "nav",
    "header",
    "footer",
    "aside",
    "main",
];

fn faux_tag() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"</?[A-Za-z][^<>]*>").expect("faux tag pattern"))
}

/// Checks `noscript` regions for the two presentation hazards.
///
/// `noscript-corruption` when a region ends (or the document ends) with a
/// structural element it opened still unclosed. `faux-noscript-tags` when a
/// region's text holds entity-encoded tags, which extraction emits as text.
pub fn detect_noscript_corruption(body: &[u8]) -> Option<Diagnostic> {
    detect_in_text(&String::from_utf8_lossy(body))
}

pub(crate) fn detect_in_text(text: &str) -> Option<Diagnostic> {
    let mut depth = 0usize;
    let mut opened: Vec<String> = Vec::new();
    let mut faux = 0usize;
    let mut sample: Option<String> = None;

    let corrupt = |tag: &str| Diagnostic {
        code: DiagnosticCode::NoscriptCorruption,
        detail: format!("<{tag}> opened inside noscript is never closed there"),
        count: None,
    };

    for token in tokenize(text) {
        match token {
            HtmlToken::Start { name, .. } if name == "noscript" => depth += 1,
            HtmlToken::End { name } if name == "noscript" && depth > 0 => {
                depth -= 1;
                if depth == 0 {
                    if let Some(tag) = opened.first() {
                        return Some(corrupt(tag));
                    }
                }
            }
            HtmlToken::Start { name, .. } if depth > 0 && STRUCTURAL.contains(&name.as_str()) => {
                opened.push(name);
            }
            HtmlToken::End { name } if depth > 0 => {
                if let Some(pos) = opened.iter().rposition(|t| *t == name) {
                    opened.truncate(pos);
                }
            }
            HtmlToken::Text(text) if depth > 0 => {
                for m in faux_tag().find_iter(&text) {
                    faux += 1;
                    sample.get_or_insert_with(|| m.as_str().to_string());
                }
            }
            _ => {}
        }
    }
    if let Some(tag) = opened.first() {
        return Some(corrupt(tag));
    }
    (faux > 0).then(|| Diagnostic {
        code: DiagnosticCode::FauxNoscriptTags,
        detail: format!(
            "entity-encoded markup inside noscript, first: {}",
            sample.unwrap_or_default()
        ),
        count: Some(faux as u64),
    })
}
