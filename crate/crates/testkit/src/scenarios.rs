//! Ready-made scenarios for the acquisition pathologies.
//!
//! Paths are listed with the fixture they serve; `{{base}}` marks absolute
//! URLs pointing back at the server.

use std::time::Duration;

use crate::corpus::{pathological, wrapped, Wrapper};
use crate::scenario::{Route, Scenario, ScriptedResponse};

/// Cookie name the WebCite scenario uses for its session.
pub const WEBCITE_COOKIE: &str = "webcite_session";

/// The two snapshot IDs served by [`webcite`], with the base document each
/// one's main frame shows.
pub const WEBCITE_SNAPSHOTS: &[(&str, &str)] = &[("6BToD7SUd", "b1"), ("5rRjzl9dY", "b3")];

fn base_html(name: &str) -> ScriptedResponse {
    ScriptedResponse::html(wrapped(name, Wrapper::Plain))
}

/// `/start` 302 → `/moved` 301 (absolute) → `/final` 200 (b1).
pub fn http_chain() -> Scenario {
    Scenario::new()
        .route(Route::new(
            "/start",
            vec![ScriptedResponse::redirect(302, "/moved")],
        ))
        .route(Route::new(
            "/moved",
            vec![ScriptedResponse::redirect(301, "{{base}}/final")],
        ))
        .route(Route::new("/final", vec![base_html("b1")]))
}

pub const JS_CHAIN_START: &str = "/web/20081126132802/http://www.bnl.gov/bnlweb/pubaf/pr/05-38";
pub const JS_CHAIN_MIDDLE: &str =
    "/web/20081126132802/http://www.bnl.gov/bnlweb/pubaf/pr/PR_display.asp?prID=05-38";
pub const JS_CHAIN_FINAL: &str =
    "/web/20081127000000/http://www.bnl.gov/bnlweb/pubaf/pr/2005/bnlpr041805.htm";

/// A Wayback JavaScript redirect page leading to another one, then content
/// (b1). Both redirect pages are served with status 200.
pub fn js_chain() -> Scenario {
    Scenario::new()
        .route(Route::new(
            JS_CHAIN_START,
            vec![ScriptedResponse::html(pathological("js-redirect-1.html"))],
        ))
        .route(Route::new(
            JS_CHAIN_MIDDLE,
            vec![ScriptedResponse::html(pathological("js-redirect-2.html"))],
        ))
        .route(Route::new(JS_CHAIN_FINAL, vec![base_html("b1")]))
}

/// `/moved.html` refreshes to `/landing.html` (b2); `/scores.html`
/// refreshes itself.
pub fn meta_refresh() -> Scenario {
    Scenario::new()
        .route(Route::new(
            "/moved.html",
            vec![ScriptedResponse::html(pathological("meta-refresh.html"))],
        ))
        .route(Route::new("/landing.html", vec![base_html("b2")]))
        .route(Route::new(
            "/scores.html",
            vec![ScriptedResponse::html(pathological(
                "meta-refresh-self.html",
            ))],
        ))
}

/// WebCite: each snapshot URL serves the frameset and sets a session
/// cookie; `/mainframe.php` shows the snapshot named by the cookie, or a
/// "no session" page without one.
pub fn webcite() -> Scenario {
    let mut scenario = Scenario::new();
    for (id, _) in WEBCITE_SNAPSHOTS {
        scenario = scenario.route(Route::new(
            &format!("/{id}"),
            vec![
                ScriptedResponse::html(pathological("webcite-frameset.html"))
                    .header("Set-Cookie", &format!("{WEBCITE_COOKIE}={id}; path=/")),
            ],
        ));
    }
    for (id, base) in WEBCITE_SNAPSHOTS {
        scenario = scenario.route(
            Route::new("/mainframe.php", vec![base_html(base)])
                .when_cookie(&format!("{WEBCITE_COOKIE}={id}")),
        );
    }
    scenario
        .route(Route::new(
            "/mainframe.php",
            vec![ScriptedResponse::html(pathological(
                "webcite-nosession.html",
            ))],
        ))
        .route(Route::new(
            "/topframe.php",
            vec![ScriptedResponse::html(pathological(
                "webcite-topframe.html",
            ))],
        ))
}

/// `/r/0` → `/r/1` → … → `/r/{hops}`, which serves b1. Resolving `/r/0`
/// takes exactly `hops` redirects.
pub fn redirect_chain(hops: u32) -> Scenario {
    let mut scenario = Scenario::new();
    for i in 0..hops {
        scenario = scenario.route(Route::new(
            &format!("/r/{i}"),
            vec![ScriptedResponse::redirect(302, &format!("/r/{}", i + 1))],
        ));
    }
    scenario.route(Route::new(&format!("/r/{hops}"), vec![base_html("b1")]))
}

/// `/flaky` answers 503 `failures` times, then 200 (b1).
pub fn flaky(failures: usize) -> Scenario {
    let mut responses = vec![ScriptedResponse::new(503).body("temporarily unavailable"); failures];
    responses.push(base_html("b1"));
    Scenario::new().route(Route::new("/flaky", responses))
}

/// `/slow` delays each response by `delay`.
pub fn slow(delay: Duration) -> Scenario {
    Scenario::new().route(Route::new("/slow", vec![base_html("b1").delay(delay)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Scenario as S;

    #[test]
    fn committed_webcite_file_matches() {
        let path = crate::corpus::fixture_dir().join("scenarios/webcite.json");
        assert_eq!(S::load(&path).unwrap(), webcite());
    }

    #[test]
    fn scenarios_validate() {
        for s in [
            http_chain(),
            js_chain(),
            meta_refresh(),
            webcite(),
            redirect_chain(3),
            flaky(2),
        ] {
            s.validate().unwrap();
        }
    }
}
