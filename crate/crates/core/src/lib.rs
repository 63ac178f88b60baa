//! Memento acquisition and cross-archive text extraction.
//!
//! `memharvest-core` dereferences memento URIs through every redirect
//! mechanism web archives use (HTTP 3xx, Wayback JavaScript redirect pages,
//! `meta` refresh, and WebCite-style framesets backed by a session cookie),
//! and turns the resulting payload into whitespace-normalized text that can
//! be compared byte-for-byte across archives.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`rules`]: declarative archive knowledge (banner elements to drop,
//!   text prefixes, frame selection) keyed by archive host.
//! - [`acquisition`]: the HTTP resolver, rate gate and redirect detectors.
//! - [`textify`]: null scrub, charset decision, strict DOM parse,
//!   sanitization and text normalization.
//! - [`store`]: content-addressed on-disk persistence and run manifests.
//!
//! ```no_run
//! use memharvest_core::{extract, resolve, builtin_rules, FetchPolicy};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let outcome = resolve(
//!     "http://web.archive.org/web/20081126132802/http://www.bnl.gov/",
//!     &FetchPolicy::default(),
//! )?;
//! let result = extract(&outcome, &builtin_rules())?;
//! println!("{}", result.text);
//! # Ok(())
//! # }
//! ```

pub mod acquisition;
mod html;
pub mod rules;
pub mod store;
pub mod textify;

pub use acquisition::{
    detect_frameset, detect_js_redirect, detect_meta_refresh, resolve, CookieJar, FetchError,
    FetchOutcome, FetchPolicy, Fetcher, Frame, JsRedirectPattern, MetaRefresh, RateGate,
    RawResponse, RedirectKind, RedirectStep,
};
pub use rules::{
    builtin_rules, load_rules, match_archive, ArchiveRule, ElementSelector, RuleCondition, RuleSet,
    RulesError, StripRule,
};
pub use store::{
    key_for_uri, EntryMeta, Manifest, ManifestRecord, ManifestWriter, OutcomeClass, Store,
    StoreEntry, StoreError, StoreKey,
};
pub use textify::{
    detect_charset, detect_noscript_corruption, extract, extract_text, extract_with,
    normalize_whitespace, parse_content_type, sanitize_dom, strip_null_bytes, strip_prefixes,
    CharsetDecision, CharsetSource, Diagnostic, DiagnosticCode, Document, ExtractError,
    ExtractOptions, ExtractionResult,
};
