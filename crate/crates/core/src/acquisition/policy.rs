use std::time::Duration;

use regex::bytes::Regex;

use super::FetchError;

/// Marker + capture patterns for Wayback JavaScript redirect pages.
///
/// These pages report "Got an HTTP 302 response at crawl time", show the
/// original target, and navigate after a delay. The first pattern takes the
/// "Impatient?" link, the second the script's `document.location.href`
/// assignment (with `\/` escapes).
pub const DEFAULT_JS_REDIRECT_PATTERNS: &[&str] = &[
    r#"(?s)Got an HTTP \d{3} response at crawl time.*?<p class="impatient"><a href="([^"]+)""#,
    r#"(?s)document\.location\.href\s*=\s*"([^"]+)".*?Got an HTTP \d{3} response at crawl time"#,
];

/// A JS-redirect pattern: the regex must match the page and its first
/// capture group holds the (possibly relative) target.
#[derive(Debug, Clone)]
pub struct JsRedirectPattern(Regex);

impl JsRedirectPattern {
    pub fn new(pattern: &str) -> Result<Self, FetchError> {
        let regex = Regex::new(pattern)
            .map_err(|e| FetchError::InvalidPolicy(format!("js redirect pattern: {e}")))?;
        if regex.captures_len() < 2 {
            return Err(FetchError::InvalidPolicy(format!(
                "js redirect pattern `{pattern}` has no capture group"
            )));
        }
        Ok(Self(regex))
    }

    pub fn as_str(&self) -> &str {
        self.0.as_str()
    }

    pub(crate) fn capture<'b>(&self, body: &'b [u8]) -> Option<&'b [u8]> {
        self.0
            .captures(body)
            .and_then(|c| c.get(1))
            .map(|m| m.as_bytes())
    }

    pub fn defaults() -> Vec<Self> {
        DEFAULT_JS_REDIRECT_PATTERNS
            .iter()
            .map(|p| Self::new(p).expect("default pattern compiles"))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct FetchPolicy {
    pub max_redirects: u32,
    /// Requests per second per host; fractional rates are allowed.
    pub per_host_rate: f64,
    pub retry_attempts: u32,
    /// Delay before retry `n` is `retry_backoff_base * 2^(n-1)`.
    pub retry_backoff_base: Duration,
    pub request_timeout: Duration,
    pub js_redirect_patterns: Vec<JsRedirectPattern>,
    pub user_agent: String,
}

impl Default for FetchPolicy {
    fn default() -> Self {
        Self {
            max_redirects: 10,
            per_host_rate: 1.0,
            retry_attempts: 3,
            retry_backoff_base: Duration::from_secs(2),
            request_timeout: Duration::from_secs(60),
            js_redirect_patterns: JsRedirectPattern::defaults(),
            user_agent: concat!("memharvest/", env!("CARGO_PKG_VERSION")).to_string(),
        }
    }
}

impl FetchPolicy {
    pub fn validate(&self) -> Result<(), FetchError> {
        if self.max_redirects < 1 {
            return Err(FetchError::InvalidPolicy(
                "max_redirects must be >= 1".into(),
            ));
        }
        if !(self.per_host_rate.is_finite() && self.per_host_rate > 0.0) {
            return Err(FetchError::InvalidPolicy(
                "per_host_rate must be > 0".into(),
            ));
        }
        if self.request_timeout.is_zero() {
            return Err(FetchError::InvalidPolicy(
                "request_timeout must be > 0".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn backoff(&self, failed_attempts: u32) -> Duration {
        let exp = failed_attempts.saturating_sub(1).min(16);
        self.retry_backoff_base.saturating_mul(1 << exp)
    }

    pub(crate) fn min_interval(&self) -> Duration {
        Duration::from_secs_f64(1.0 / self.per_host_rate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let policy = FetchPolicy::default();
        policy.validate().unwrap();
        assert_eq!(policy.max_redirects, 10);
        assert_eq!(policy.retry_attempts, 3);
        assert_eq!(policy.request_timeout, Duration::from_secs(60));
        assert_eq!(
            policy.js_redirect_patterns.len(),
            DEFAULT_JS_REDIRECT_PATTERNS.len()
        );
    }

    #[test]
    fn invariants_enforced() {
        let bad = FetchPolicy {
            max_redirects: 0,
            ..FetchPolicy::default()
        };
        assert!(bad.validate().is_err());
        for rate in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            let bad = FetchPolicy {
                per_host_rate: rate,
                ..FetchPolicy::default()
            };
            assert!(bad.validate().is_err(), "rate {rate}");
        }
    }

    #[test]
    fn backoff_is_exponential() {
        let policy = FetchPolicy::default();
        assert_eq!(policy.backoff(1), Duration::from_secs(2));
        assert_eq!(policy.backoff(2), Duration::from_secs(4));
        assert_eq!(policy.backoff(3), Duration::from_secs(8));
    }

    #[test]
    fn pattern_needs_capture_group() {
        assert!(JsRedirectPattern::new("Got an HTTP").is_err());
        assert!(JsRedirectPattern::new("(unclosed").is_err());
        assert!(JsRedirectPattern::new(r#"href="([^"]+)""#).is_ok());
    }
}
