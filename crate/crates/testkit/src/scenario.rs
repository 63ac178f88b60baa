use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("route {path}: {reason}")]
    InvalidRoute { path: String, reason: String },
}

/// One scripted response. `{{base}}` in headers and body is replaced with
/// the server's base URL (`http://127.0.0.1:PORT`) when served.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptedResponse {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
    pub delay: Duration,
}

impl ScriptedResponse {
    pub fn new(status: u16) -> Self {
        Self {
            status,
            headers: Vec::new(),
            body: Vec::new(),
            delay: Duration::ZERO,
        }
    }

    /// 200 with `Content-Type: text/html; charset=utf-8`.
    pub fn html(body: impl Into<Vec<u8>>) -> Self {
        Self::new(200)
            .header("Content-Type", "text/html; charset=utf-8")
            .body(body)
    }

    pub fn redirect(status: u16, location: &str) -> Self {
        Self::new(status).header("Location", location)
    }

    pub fn header(mut self, name: &str, value: &str) -> Self {
        self.headers.push((name.to_string(), value.to_string()));
        self
    }

    pub fn body(mut self, body: impl Into<Vec<u8>>) -> Self {
        self.body = body.into();
        self
    }

    pub fn delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }
}

/// Responses for one path, consumed in order; the last one repeats.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    /// Request target to match: a path, optionally with `?query`.
    pub path: String,
    /// `name=value`; the route only matches requests carrying this cookie.
    pub when_cookie: Option<String>,
    pub responses: Vec<ScriptedResponse>,
}

impl Route {
    pub fn new(path: &str, responses: Vec<ScriptedResponse>) -> Self {
        Self {
            path: path.to_string(),
            when_cookie: None,
            responses,
        }
    }

    pub fn when_cookie(mut self, pair: &str) -> Self {
        self.when_cookie = Some(pair.to_string());
        self
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |reason: &str| ScenarioError::InvalidRoute {
            path: self.path.clone(),
            reason: reason.to_string(),
        };
        if !self.path.starts_with('/') {
            return Err(invalid("path must start with /"));
        }
        if self.responses.is_empty() {
            return Err(invalid("no responses"));
        }
        if let Some(pair) = &self.when_cookie {
            if !pair.contains('=') {
                return Err(invalid("when_cookie must be name=value"));
            }
        }
        Ok(())
    }
}

/// Answer with `status` to any request arriving while more than
/// `per_second` requests (this one included) arrived in the last second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateTrip {
    pub per_second: u32,
    pub status: u16,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Scenario {
    pub routes: Vec<Route>,
    pub rate_trip: Option<RateTrip>,
}

impl Scenario {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn route(mut self, route: Route) -> Self {
        self.routes.push(route);
        self
    }

    pub fn rate_trip(mut self, per_second: u32, status: u16) -> Self {
        self.rate_trip = Some(RateTrip { per_second, status });
        self
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.routes.iter().try_for_each(Route::validate)
    }

    /// Parses a scenario file; `body_file` paths are relative to `base_dir`.
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, ScenarioError> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        let mut routes = Vec::with_capacity(file.routes.len());
        for route in file.routes {
            let mut responses = Vec::with_capacity(route.responses.len());
            for r in route.responses {
                let body = match (r.body, r.body_file) {
                    (Some(_), Some(_)) => {
                        return Err(ScenarioError::InvalidRoute {
                            path: route.path,
                            reason: "give body or body_file, not both".into(),
                        })
                    }
                    (Some(inline), None) => inline.into_bytes(),
                    (None, Some(file)) => {
                        let path = base_dir.join(file);
                        fs::read(&path).map_err(|source| ScenarioError::Io { path, source })?
                    }
                    (None, None) => Vec::new(),
                };
                responses.push(ScriptedResponse {
                    status: r.status,
                    headers: r.headers,
                    body,
                    delay: Duration::from_millis(r.delay_ms),
                });
            }
            routes.push(Route {
                path: route.path,
                when_cookie: route.when_cookie,
                responses,
            });
        }
        let scenario = Scenario {
            routes,
            rate_trip: file.rate_trip,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    routes: Vec<RouteFile>,
    #[serde(default)]
    rate_trip: Option<RateTrip>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RouteFile {
    path: String,
    #[serde(default)]
    when_cookie: Option<String>,
    responses: Vec<ResponseFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ResponseFile {
    status: u16,
    #[serde(default)]
    headers: Vec<(String, String)>,
    #[serde(default)]
    body: Option<String>,
    #[serde(default)]
    body_file: Option<PathBuf>,
    #[serde(default)]
    delay_ms: u64,
}
