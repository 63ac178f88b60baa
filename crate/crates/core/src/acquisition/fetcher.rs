use std::collections::HashSet;
use std::sync::Arc;
use std::thread;

use chrono::{DateTime, SubsecRound, Utc};
use reqwest::blocking::Client;
use reqwest::header::{COOKIE, SET_COOKIE, USER_AGENT};
use url::Url;

use super::detect::{detect_frameset, detect_js_redirect, scan_meta_refresh, RefreshScan};
use super::{
    header_value, CookieJar, FetchError, FetchOutcome, FetchPolicy, RateGate, RedirectKind,
    RedirectStep,
};
use crate::rules::{builtin_rules, RuleSet};

/// One HTTP response, redirects not followed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawResponse {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
    /// Requests issued to obtain this response, retries included.
    pub attempts: u32,
}

impl RawResponse {
    pub fn header(&self, name: &str) -> Option<&str> {
        header_value(&self.headers, name)
    }
}

/// HTTP client bound to a policy, a rule set and a rate gate.
///
/// A `Fetcher` is shared by all workers of a run; each [`Fetcher::resolve`]
/// call gets a fresh [`CookieJar`].
#[derive(Debug, Clone)]
pub struct Fetcher {
    client: Client,
    policy: FetchPolicy,
    rules: Arc<RuleSet>,
    gate: Arc<RateGate>,
}

impl Fetcher {
    /// Uses the process-wide [`RateGate::global`].
    pub fn new(policy: FetchPolicy, rules: Arc<RuleSet>) -> Result<Self, FetchError> {
        Self::with_gate(policy, rules, RateGate::global())
    }

    pub fn with_gate(
        policy: FetchPolicy,
        rules: Arc<RuleSet>,
        gate: Arc<RateGate>,
    ) -> Result<Self, FetchError> {
        policy.validate()?;
        let client = Client::builder()
            .redirect(reqwest::redirect::Policy::none())
            .timeout(policy.request_timeout)
            .build()
            .map_err(|e| FetchError::InvalidPolicy(format!("http client: {e}")))?;
        Ok(Self {
            client,
            policy,
            rules,
            gate,
        })
    }

    pub fn policy(&self) -> &FetchPolicy {
        &self.policy
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    /// Issues a single `GET`, retrying transient failures.
    ///
    /// Timeouts and 5xx responses are transient; anything else, including
    /// 4xx, is returned as is. `Set-Cookie` headers are recorded in `session`.
    pub fn fetch_once(
        &self,
        uri: &Url,
        session: &mut CookieJar,
    ) -> Result<RawResponse, FetchError> {
        let host = uri.host_str().ok_or_else(|| FetchError::InvalidUri {
            uri: uri.to_string(),
            reason: "no host".into(),
        })?;
        let gate_key = format!("{host}:{}", uri.port_or_known_default().unwrap_or(0));
        let mut attempts = 0u32;
        loop {
            attempts += 1;
            self.gate.wait(&gate_key, self.policy.min_interval());

            let mut request = self
                .client
                .get(uri.as_str())
                .header(USER_AGENT, &self.policy.user_agent);
            if let Some(cookies) = session.header_for(host) {
                request = request.header(COOKIE, cookies);
            }

            let failure = match request.send() {
                Ok(response) => {
                    let status = response.status().as_u16();
                    let headers: Vec<(String, String)> = response
                        .headers()
                        .iter()
                        .map(|(name, value)| {
                            (
                                name.as_str().to_string(),
                                String::from_utf8_lossy(value.as_bytes()).into_owned(),
                            )
                        })
                        .collect();
                    for value in response.headers().get_all(SET_COOKIE) {
                        session.record(host, &String::from_utf8_lossy(value.as_bytes()));
                    }
                    match response.bytes() {
                        Ok(_) if status >= 500 => format!("HTTP {status}"),
                        Ok(body) => {
                            return Ok(RawResponse {
                                status,
                                headers,
                                body: body.to_vec(),
                                attempts,
                            })
                        }
                        Err(e) if e.is_timeout() => format!("timed out reading body: {e}"),
                        Err(e) => return Err(network_error(uri, &e)),
                    }
                }
                Err(e) if e.is_timeout() => format!("timed out: {e}"),
                Err(e) => return Err(network_error(uri, &e)),
            };

            if attempts > self.policy.retry_attempts {
                return Err(FetchError::TooManyRetries {
                    uri: uri.to_string(),
                    attempts,
                    last: failure,
                });
            }
            thread::sleep(self.policy.backoff(attempts));
        }
    }

    /// Follows every redirect mechanism until a final payload.
    pub fn resolve(&self, uri: &str) -> Result<FetchOutcome, FetchError> {
        let request_uri = parse_http_uri(uri)?;
        let mut session = CookieJar::new();
        let mut chain: Vec<RedirectStep> = Vec::new();
        let mut seen: HashSet<(RedirectKind, String)> = HashSet::new();
        let mut current = request_uri;
        let mut attempts = 0u32;

        loop {
            let response = self.fetch_once(&current, &mut session)?;
            attempts += response.attempts;

            let Some((kind, target, delay)) = self.next_hop(&current, &response)? else {
                return Ok(FetchOutcome {
                    request_uri: uri.to_string(),
                    final_uri: if chain.is_empty() {
                        uri.to_string()
                    } else {
                        current.to_string()
                    },
                    chain,
                    status: response.status,
                    headers: response.headers,
                    body: response.body,
                    fetched_at: now_seconds(),
                    attempts,
                });
            };

            if !seen.insert((kind, target.to_string())) {
                return Err(FetchError::RedirectLoop {
                    kind,
                    to_uri: target.to_string(),
                });
            }
            if chain.len() as u32 >= self.policy.max_redirects {
                return Err(FetchError::RedirectLimit {
                    uri: current.to_string(),
                    limit: self.policy.max_redirects,
                    chain,
                });
            }
            chain.push(RedirectStep {
                kind,
                from_uri: current.to_string(),
                to_uri: target.to_string(),
                status: Some(response.status),
                delay,
            });
            current = target;
        }
    }

    fn next_hop(
        &self,
        current: &Url,
        response: &RawResponse,
    ) -> Result<Option<(RedirectKind, Url, Option<u64>)>, FetchError> {
        if (300..400).contains(&response.status) {
            return Ok(response
                .header("location")
                .and_then(|loc| current.join(loc.trim()).ok())
                .map(|target| (RedirectKind::Http, target, None)));
        }
        if !(200..300).contains(&response.status) {
            return Ok(None);
        }
        let body = &response.body;
        if let Some(target) = detect_js_redirect(body, current, &self.policy.js_redirect_patterns) {
            return Ok(Some((RedirectKind::JsPage, target, None)));
        }
        if let RefreshScan::Found(refresh) = scan_meta_refresh(body, current) {
            if let Some(target) = refresh.target.filter(|t| !same_document(t, current)) {
                return Ok(Some((
                    RedirectKind::MetaRefresh,
                    target,
                    Some(refresh.delay),
                )));
            }
        }
        if let Some(frames) = detect_frameset(body) {
            if frames.is_empty() {
                return Ok(None);
            }
            let rule = self
                .rules
                .match_host(current.host_str().unwrap_or_default());
            let chosen = match &rule.frame_select {
                Some(name) => frames.iter().find(|f| &f.name == name),
                None => None,
            };
            let chosen = match (chosen, frames.len()) {
                (Some(frame), _) => frame,
                (None, 1) => &frames[0],
                (None, n) => {
                    return Err(FetchError::FrameAmbiguous {
                        uri: current.to_string(),
                        frames: n,
                    })
                }
            };
            let target = current
                .join(&chosen.src)
                .map_err(|e| FetchError::InvalidUri {
                    uri: chosen.src.clone(),
                    reason: e.to_string(),
                })?;
            return Ok(Some((RedirectKind::Frame, target, None)));
        }
        Ok(None)
    }
}

/// Resolves `uri` with the builtin rules and the process-wide rate gate.
pub fn resolve(uri: &str, policy: &FetchPolicy) -> Result<FetchOutcome, FetchError> {
    Fetcher::new(policy.clone(), Arc::new(builtin_rules()))?.resolve(uri)
}

fn parse_http_uri(uri: &str) -> Result<Url, FetchError> {
    let invalid = |reason: String| FetchError::InvalidUri {
        uri: uri.to_string(),
        reason,
    };
    let parsed = Url::parse(uri).map_err(|e| invalid(e.to_string()))?;
    if !matches!(parsed.scheme(), "http" | "https") {
        return Err(invalid("scheme must be http or https".into()));
    }
    if parsed.host_str().is_none() {
        return Err(invalid("no host".into()));
    }
    Ok(parsed)
}

fn same_document(a: &Url, b: &Url) -> bool {
    let mut a = a.clone();
    let mut b = b.clone();
    a.set_fragment(None);
    b.set_fragment(None);
    a == b
}

fn network_error(uri: &Url, err: &reqwest::Error) -> FetchError {
    let mut message = err.to_string();
    let mut source = std::error::Error::source(err);
    while let Some(inner) = source {
        message.push_str(": ");
        message.push_str(&inner.to_string());
        source = inner.source();
    }
    FetchError::Network {
        uri: uri.to_string(),
        message,
    }
}

fn now_seconds() -> DateTime<Utc> {
    Utc::now().trunc_subsecs(0)
}
