use std::collections::VecDeque;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use tiny_http::{Header, Request, Response, Server};

use crate::scenario::{Route, Scenario, ScriptedResponse};

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("cannot bind replay server: {0}")]
    Bind(String),
    #[error(transparent)]
    Scenario(#[from] crate::scenario::ScenarioError),
}

/// One request as the server saw it, recorded on arrival.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub at: Instant,
    pub method: String,
    /// Request target as sent: path plus query.
    pub url: String,
    pub cookie: Option<String>,
    pub user_agent: Option<String>,
    pub status: u16,
    pub rate_tripped: bool,
}

struct Shared {
    base_url: String,
    routes: Vec<Route>,
    cursors: Vec<AtomicUsize>,
    trip: Option<crate::scenario::RateTrip>,
    arrivals: Mutex<VecDeque<Instant>>,
    log: Mutex<Vec<LogEntry>>,
}

/// A running replay server. Dropping it stops the server.
pub struct ReplayServer {
    addr: SocketAddr,
    server: Arc<Server>,
    shared: Arc<Shared>,
    acceptor: Option<JoinHandle<()>>,
}

/// Serves `scenario` on an ephemeral port of 127.0.0.1.
///
/// Requests are matched against routes in order: first on the full request
/// target, then on the path without query. A route with `when_cookie` only
/// matches requests carrying that cookie. Unmatched requests get 404.
pub fn serve(scenario: Scenario) -> Result<ReplayServer, ServeError> {
    scenario.validate()?;
    let server = Server::http("127.0.0.1:0").map_err(|e| ServeError::Bind(e.to_string()))?;
    let addr = server
        .server_addr()
        .to_ip()
        .ok_or_else(|| ServeError::Bind("not an IP listener".into()))?;
    let server = Arc::new(server);
    let shared = Arc::new(Shared {
        base_url: format!("http://{addr}"),
        cursors: scenario
            .routes
            .iter()
            .map(|_| AtomicUsize::new(0))
            .collect(),
        routes: scenario.routes,
        trip: scenario.rate_trip,
        arrivals: Mutex::new(VecDeque::new()),
        log: Mutex::new(Vec::new()),
    });

    let acceptor = {
        let server = Arc::clone(&server);
        let shared = Arc::clone(&shared);
        thread::spawn(move || {
            while let Ok(request) = server.recv() {
                let shared = Arc::clone(&shared);
                thread::spawn(move || handle(&shared, request));
            }
        })
    };
    Ok(ReplayServer {
        addr,
        server,
        shared,
        acceptor: Some(acceptor),
    })
}

impl ReplayServer {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// `http://127.0.0.1:PORT`, no trailing slash.
    pub fn base_url(&self) -> &str {
        &self.shared.base_url
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{path}", self.shared.base_url)
    }

    /// Snapshot of the request log so far, in arrival order.
    pub fn log(&self) -> Vec<LogEntry> {
        self.shared
            .log
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .clone()
    }

    /// Stops accepting requests and returns the full log.
    pub fn shutdown(mut self) -> Vec<LogEntry> {
        self.stop();
        self.log()
    }

    fn stop(&mut self) {
        self.server.unblock();
        if let Some(acceptor) = self.acceptor.take() {
            let _ = acceptor.join();
        }
    }
}

impl Drop for ReplayServer {
    fn drop(&mut self) {
        self.stop();
    }
}

fn header(request: &Request, name: &'static str) -> Option<String> {
    request
        .headers()
        .iter()
        .find(|h| h.field.equiv(name))
        .map(|h| h.value.as_str().to_string())
}

fn has_cookie(cookie_header: Option<&str>, pair: &str) -> bool {
    cookie_header.is_some_and(|h| h.split(';').any(|c| c.trim() == pair))
}

fn handle(shared: &Shared, request: Request) {
    let now = Instant::now();
    let url = request.url().to_string();
    let cookie = header(&request, "Cookie");

    let tripped = shared.trip.is_some_and(|trip| {
        let mut arrivals = shared.arrivals.lock().unwrap_or_else(|e| e.into_inner());
        arrivals.push_back(now);
        while arrivals
            .front()
            .is_some_and(|t| now.duration_since(*t) >= Duration::from_secs(1))
        {
            arrivals.pop_front();
        }
        arrivals.len() > trip.per_second as usize
    });

    let scripted = if tripped {
        let status = shared.trip.map_or(429, |t| t.status);
        ScriptedResponse::new(status).body("rate limit exceeded")
    } else {
        match find_route(shared, &url, cookie.as_deref()) {
            Some(index) => {
                let responses = &shared.routes[index].responses;
                let n = shared.cursors[index].fetch_add(1, Ordering::SeqCst);
                responses[n.min(responses.len() - 1)].clone()
            }
            None => ScriptedResponse::new(404)
                .header("Content-Type", "text/plain")
                .body("no route"),
        }
    };

    shared
        .log
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .push(LogEntry {
            at: now,
            method: request.method().to_string(),
            url,
            cookie,
            user_agent: header(&request, "User-Agent"),
            status: scripted.status,
            rate_tripped: tripped,
        });

    if !scripted.delay.is_zero() {
        thread::sleep(scripted.delay);
    }
    let body = substitute(&scripted.body, shared.base_url.as_bytes());
    let mut response = Response::from_data(body).with_status_code(scripted.status);
    for (name, value) in &scripted.headers {
        let value = value.replace(BASE_PLACEHOLDER, &shared.base_url);
        if let Ok(h) = Header::from_bytes(name.as_bytes(), value.as_bytes()) {
            response = response.with_header(h);
        }
    }
    let _ = request.respond(response);
}

fn find_route(shared: &Shared, url: &str, cookie: Option<&str>) -> Option<usize> {
    let applies = |route: &Route| {
        route
            .when_cookie
            .as_deref()
            .map_or(true, |pair| has_cookie(cookie, pair))
    };
    let path = url.split_once('?').map_or(url, |(p, _)| p);
    shared
        .routes
        .iter()
        .position(|r| r.path == url && applies(r))
        .or_else(|| {
            shared
                .routes
                .iter()
                .position(|r| r.path == path && applies(r))
        })
}

pub const BASE_PLACEHOLDER: &str = "{{base}}";

fn substitute(body: &[u8], base: &[u8]) -> Vec<u8> {
    let needle = BASE_PLACEHOLDER.as_bytes();
    let mut out = Vec::with_capacity(body.len());
    let mut rest = body;
    while let Some(pos) = rest.windows(needle.len()).position(|w| w == needle) {
        out.extend_from_slice(&rest[..pos]);
        out.extend_from_slice(base);
        rest = &rest[pos + needle.len()..];
    }
    out.extend_from_slice(rest);
    out
}
