//! Dereferencing memento URIs to their final content.
//!
//! A plain `GET` is not enough for every archive. The resolver follows, in
//! priority order on each response:
//!
//! 1. HTTP 3xx with a `Location` header,
//! 2. Wayback-style JavaScript redirect pages ([`detect_js_redirect`]),
//! 3. `meta` refresh with a target other than the current page,
//! 4. framesets, following the frame named by the archive rule's
//!    `frame_select` with the resolution's cookie session.
//!
//! Every hop is recorded as a [`RedirectStep`]. Requests pass through a
//! per-host [`RateGate`] and transient failures (timeouts, 5xx) are retried
//! with exponential backoff.

mod detect;
mod fetcher;
mod gate;
mod policy;
mod session;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub(crate) use detect::scan_meta_refresh_text;
pub use detect::{
    detect_frameset, detect_js_redirect, detect_meta_refresh, scan_meta_refresh, Frame,
    MetaRefresh, RefreshScan,
};
pub use fetcher::{resolve, Fetcher, RawResponse};
pub use gate::RateGate;
pub use policy::{FetchPolicy, JsRedirectPattern, DEFAULT_JS_REDIRECT_PATTERNS};
pub use session::CookieJar;

#[derive(Debug, thiserror::Error)]
pub enum FetchError {
    #[error("invalid URI `{uri}`: {reason}")]
    InvalidUri { uri: String, reason: String },
    #[error("invalid fetch policy: {0}")]
    InvalidPolicy(String),
    #[error("network error fetching {uri}: {message}")]
    Network { uri: String, message: String },
    #[error("gave up on {uri} after {attempts} attempts: {last}")]
    TooManyRetries {
        uri: String,
        attempts: u32,
        last: String,
    },
    #[error("redirect limit of {limit} exceeded at {uri}")]
    RedirectLimit {
        uri: String,
        limit: u32,
        chain: Vec<RedirectStep>,
    },
    #[error("redirect loop: {kind} to {to_uri} seen twice")]
    RedirectLoop { kind: RedirectKind, to_uri: String },
    #[error("frameset at {uri} has {frames} frames and none is selected")]
    FrameAmbiguous { uri: String, frames: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RedirectKind {
    Http,
    JsPage,
    MetaRefresh,
    Frame,
}

impl RedirectKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RedirectKind::Http => "http",
            RedirectKind::JsPage => "js-page",
            RedirectKind::MetaRefresh => "meta-refresh",
            RedirectKind::Frame => "frame",
        }
    }
}

impl std::fmt::Display for RedirectKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One hop of a dereference chain. `to_uri` is always absolute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedirectStep {
    pub kind: RedirectKind,
    #[serde(rename = "from")]
    pub from_uri: String,
    #[serde(rename = "to")]
    pub to_uri: String,
    /// HTTP status of the response that carried the redirect.
    pub status: Option<u16>,
    /// Refresh delay in seconds, for `meta-refresh` steps.
    pub delay: Option<u64>,
}

/// The full dereference of a memento URI.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchOutcome {
    pub request_uri: String,
    pub final_uri: String,
    pub chain: Vec<RedirectStep>,
    pub status: u16,
    /// Response headers of the final response, duplicates preserved.
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
    pub fetched_at: DateTime<Utc>,
    /// Requests issued over the whole resolution, retries included.
    pub attempts: u32,
}

impl FetchOutcome {
    /// First header with this name, compared case-insensitively.
    pub fn header(&self, name: &str) -> Option<&str> {
        header_value(&self.headers, name)
    }

    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }
}

pub(crate) fn header_value<'a>(headers: &'a [(String, String)], name: &str) -> Option<&'a str> {
    headers
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .map(|(_, v)| v.as_str())
}
