//! Content-level redirect detection: JavaScript redirect pages, `meta`
//! refresh, and framesets.

use url::Url;

use super::JsRedirectPattern;
use crate::html::{tokenize, HtmlToken};

/// Scans `body` with each pattern in order; the first capture wins.
///
/// The captured target is unescaped for the two forms these pages use
/// (`\/` inside script strings, `&amp;` inside attributes) and resolved
/// against `base_uri`.
pub fn detect_js_redirect(
    body: &[u8],
    base_uri: &Url,
    patterns: &[JsRedirectPattern],
) -> Option<Url> {
    patterns.iter().find_map(|pattern| {
        let raw = pattern.capture(body)?;
        let target = String::from_utf8_lossy(raw)
            .trim()
            .replace("\\/", "/")
            .replace("&amp;", "&");
        if target.is_empty() {
            return None;
        }
        base_uri.join(&target).ok()
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaRefresh {
    pub delay: u64,
    /// `None` means reload the current page.
    pub target: Option<Url>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefreshScan {
    Absent,
    Found(MetaRefresh),
    /// A refresh `meta` whose `content` could not be parsed.
    Unparseable(String),
}

/// First `<meta http-equiv="refresh">` in the document, if any.
pub fn detect_meta_refresh(body: &[u8], base_uri: &Url) -> Option<MetaRefresh> {
    match scan_meta_refresh(body, base_uri) {
        RefreshScan::Found(refresh) => Some(refresh),
        _ => None,
    }
}

pub fn scan_meta_refresh(body: &[u8], base_uri: &Url) -> RefreshScan {
    scan_meta_refresh_text(&String::from_utf8_lossy(body), base_uri)
}

pub(crate) fn scan_meta_refresh_text(text: &str, base_uri: &Url) -> RefreshScan {
    let content = tokenize(text).into_iter().find_map(|token| match &token {
        HtmlToken::Start { name, .. }
            if name == "meta"
                && token
                    .attr("http-equiv")
                    .is_some_and(|v| v.trim().eq_ignore_ascii_case("refresh")) =>
        {
            Some(token.attr("content").unwrap_or("").to_string())
        }
        _ => None,
    });
    let Some(content) = content else {
        return RefreshScan::Absent;
    };
    match parse_refresh_content(&content) {
        Some((delay, None)) => RefreshScan::Found(MetaRefresh {
            delay,
            target: None,
        }),
        Some((delay, Some(url))) => match base_uri.join(&url) {
            Ok(target) => RefreshScan::Found(MetaRefresh {
                delay,
                target: Some(target),
            }),
            Err(_) => RefreshScan::Unparseable(content),
        },
        None => RefreshScan::Unparseable(content),
    }
}

/// Parses `N`, `N; url=U`, `N;URL='U'`, `N, U` forms.
fn parse_refresh_content(content: &str) -> Option<(u64, Option<String>)> {
    let is_ws = |c: char| c.is_ascii_whitespace();
    let s = content.trim_start_matches(is_ws);
    let digits_end = s.find(|c: char| !c.is_ascii_digit()).unwrap_or(s.len());
    let (digits, rest) = s.split_at(digits_end);
    if digits.is_empty() && !rest.starts_with('.') {
        return None;
    }
    let delay = digits.bytes().fold(0u64, |acc, d| {
        acc.saturating_mul(10).saturating_add(u64::from(d - b'0'))
    });
    let rest = rest.trim_start_matches(|c: char| c.is_ascii_digit() || c == '.');
    if rest.is_empty() {
        return Some((delay, None));
    }
    if !rest.starts_with(|c: char| is_ws(c) || c == ';' || c == ',') {
        return None;
    }
    let rest = rest.trim_start_matches(is_ws);
    let rest = rest
        .strip_prefix([';', ','])
        .unwrap_or(rest)
        .trim_start_matches(is_ws);
    if rest.is_empty() {
        return Some((delay, None));
    }
    let mut url = rest;
    if rest.len() >= 3 && rest[..3].eq_ignore_ascii_case("url") {
        let after = rest[3..].trim_start_matches(is_ws);
        if let Some(after_eq) = after.strip_prefix('=') {
            url = after_eq.trim_start_matches(is_ws);
        }
    }
    if let Some(quote) = url.chars().next().filter(|c| *c == '"' || *c == '\'') {
        url = &url[1..];
        if let Some(end) = url.find(quote) {
            url = &url[..end];
        }
    }
    let url = url.trim_matches(is_ws);
    if url.is_empty() {
        Some((delay, None))
    } else {
        Some((delay, Some(url.to_string())))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    /// Empty when the frame has no `name` attribute.
    pub name: String,
    pub src: String,
}

/// Frames of a top-level `<frameset>`, in document order.
///
/// Returns `None` when the document has no frameset, or when a `<body>`
/// start tag appears before one.
pub fn detect_frameset(body: &[u8]) -> Option<Vec<Frame>> {
    let text = String::from_utf8_lossy(body);
    let mut depth = 0usize;
    let mut frames = None::<Vec<Frame>>;
    for token in tokenize(&text) {
        match &token {
            HtmlToken::Start { name, .. } if name == "body" && frames.is_none() => return None,
            HtmlToken::Start { name, .. } if name == "frameset" => {
                depth += 1;
                frames.get_or_insert_with(Vec::new);
            }
            HtmlToken::End { name } if name == "frameset" && depth > 0 => {
                depth -= 1;
                if depth == 0 {
                    break;
                }
            }
            HtmlToken::Start { name, .. } if name == "frame" && depth > 0 => {
                if let Some(frames) = frames.as_mut() {
                    frames.push(Frame {
                        name: token.attr("name").unwrap_or("").to_string(),
                        src: token.attr("src").unwrap_or("").to_string(),
                    });
                }
            }
            _ => {}
        }
    }
    frames
}
