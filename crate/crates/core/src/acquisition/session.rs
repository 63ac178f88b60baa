/// Cookies received during one resolution.
///
/// Values are opaque; a cookie is replayed to the host that set it. Each
/// resolution owns its own jar, so concurrent resolutions never share
/// session state.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CookieJar {
    cookies: Vec<StoredCookie>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct StoredCookie {
    host: String,
    name: String,
    value: String,
}

impl CookieJar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.cookies.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cookies.len()
    }

    /// Records one `Set-Cookie` header value received from `host`.
    pub fn record(&mut self, host: &str, set_cookie: &str) {
        let mut parts = set_cookie.split(';');
        let Some((name, value)) = parts.next().and_then(|nv| nv.split_once('=')) else {
            return;
        };
        let name = name.trim();
        if name.is_empty() {
            return;
        }
        let expired = parts.any(|attr| {
            let attr = attr.trim();
            attr.split_once('=').is_some_and(|(k, v)| {
                k.trim().eq_ignore_ascii_case("max-age") && v.trim().starts_with(['0', '-'])
            })
        });
        let host = host.to_ascii_lowercase();
        self.cookies.retain(|c| !(c.host == host && c.name == name));
        if !expired {
            self.cookies.push(StoredCookie {
                host,
                name: name.to_string(),
                value: value.trim().to_string(),
            });
        }
    }

    /// `Cookie` header value for a request to `host`, if any cookies apply.
    pub fn header_for(&self, host: &str) -> Option<String> {
        let host = host.to_ascii_lowercase();
        let pairs: Vec<String> = self
            .cookies
            .iter()
            .filter(|c| c.host == host)
            .map(|c| format!("{}={}", c.name, c.value))
            .collect();
        (!pairs.is_empty()).then(|| pairs.join("; "))
    }
}
