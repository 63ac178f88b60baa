//! Archive-specific boilerplate rules.
//!
//! Each web archive decorates its mementos differently: a toolbar `div`, a
//! banner with an `[ARCHIVED CONTENT] ` title prefix, a header and a
//! hashtag sidebar, or a frameset that hides the content entirely. A
//! [`RuleSet`] captures that knowledge as data so a new archive only needs a
//! rule file, not code.
//!
//! Rules are matched by hostname glob, first match wins, and a
//! [`RuleSet::fallback`] rule (no strips, no prefixes) covers every other
//! archive. Script and style removal is unconditional and not expressed here.

use serde::{Deserialize, Serialize};
use url::Url;

/// Title prefix added by the UK Government Web Archive and PRONI.
pub const ARCHIVED_CONTENT_PREFIX: &str = "[ARCHIVED CONTENT] ";

/// Identifier of the rule returned when no host pattern matches.
pub const FALLBACK_ARCHIVE_ID: &str = "fallback";

#[derive(Debug, thiserror::Error)]
pub enum RulesError {
    #[error("rule file parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate archive_id `{0}` in rule file")]
    DuplicateArchiveId(String),
    #[error("invalid rule `{archive_id}`: {reason}")]
    InvalidRule { archive_id: String, reason: String },
    #[error("invalid URI `{uri}`: {reason}")]
    InvalidUri { uri: String, reason: String },
}

/// Selects elements by tag name and one exact attribute value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementSelector {
    tag_name: String,
    attribute: String,
    value: String,
}

impl ElementSelector {
    pub fn new(
        tag_name: impl Into<String>,
        attribute: impl Into<String>,
        value: impl Into<String>,
    ) -> Result<Self, String> {
        let tag_name = tag_name.into();
        let attribute = attribute.into();
        for (what, name) in [("tag", &tag_name), ("attribute", &attribute)] {
            if name.is_empty() {
                return Err(format!("selector {what} name is empty"));
            }
            if name
                .bytes()
                .any(|b| !b.is_ascii() || b.is_ascii_uppercase())
            {
                return Err(format!(
                    "selector {what} name `{name}` must be ASCII lowercase"
                ));
            }
        }
        Ok(Self {
            tag_name,
            attribute,
            value: value.into(),
        })
    }

    pub fn tag_name(&self) -> &str {
        &self.tag_name
    }

    pub fn attribute(&self) -> &str {
        &self.attribute
    }

    pub fn value(&self) -> &str {
        &self.value
    }

    /// Case-sensitive, exact comparison of the attribute value.
    pub fn matches(&self, tag_name: &str, attribute_value: Option<&str>) -> bool {
        tag_name == self.tag_name && attribute_value == Some(self.value.as_str())
    }
}

/// Gate evaluated against the raw response body before a strip applies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleCondition {
    Always,
    /// Holds when the body contains `<meta property="P" content="C"` verbatim.
    MetaProperty {
        property: String,
        content: String,
    },
}

impl RuleCondition {
    pub fn holds(&self, raw_body: &[u8]) -> bool {
        match self {
            RuleCondition::Always => true,
            RuleCondition::MetaProperty { property, content } => {
                let marker = format!(r#"<meta property="{property}" content="{content}""#);
                contains(raw_body, marker.as_bytes())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripRule {
    pub condition: RuleCondition,
    pub selector: ElementSelector,
}

/// Hostname glob. `*` stands for one or more whole labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HostPattern(String);

impl HostPattern {
    pub fn new(pattern: impl Into<String>) -> Result<Self, String> {
        let pattern = pattern.into().to_ascii_lowercase();
        if pattern.is_empty() {
            return Err("host pattern is empty".into());
        }
        if pattern.split('.').any(|label| label.is_empty()) {
            return Err(format!("host pattern `{pattern}` has an empty label"));
        }
        if pattern
            .split('.')
            .any(|label| label != "*" && label.contains('*'))
        {
            return Err(format!(
                "host pattern `{pattern}`: `*` must stand alone as a label"
            ));
        }
        Ok(Self(pattern))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn matches(&self, host: &str) -> bool {
        let host = host.trim_end_matches('.').to_ascii_lowercase();
        let pattern: Vec<&str> = self.0.split('.').collect();
        let labels: Vec<&str> = host.split('.').collect();
        glob_labels(&pattern, &labels)
    }
}

fn glob_labels(pattern: &[&str], labels: &[&str]) -> bool {
    match pattern.split_first() {
        None => labels.is_empty(),
        Some((&"*", rest)) => (1..=labels.len()).any(|n| glob_labels(rest, &labels[n..])),
        Some((label, rest)) => match labels.split_first() {
            Some((first, tail)) => first == label && glob_labels(rest, tail),
            None => false,
        },
    }
}

/// Everything known about one archive's presentation of mementos.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchiveRule {
    pub archive_id: String,
    pub host_patterns: Vec<HostPattern>,
    pub strip: Vec<StripRule>,
    pub text_prefixes: Vec<String>,
    pub frame_select: Option<String>,
    pub notes: String,
}

impl ArchiveRule {
    pub fn fallback() -> Self {
        Self {
            archive_id: FALLBACK_ARCHIVE_ID.to_string(),
            host_patterns: Vec::new(),
            strip: Vec::new(),
            text_prefixes: Vec::new(),
            frame_select: None,
            notes: "Archives whose additions are only scripts and stylesheets.".into(),
        }
    }

    pub fn matches_host(&self, host: &str) -> bool {
        self.host_patterns.iter().any(|p| p.matches(host))
    }

    /// Whether the archive's banner is present in `raw_body`.
    ///
    /// The banner marker is the value of any strip selector whose condition
    /// holds; prefixes are only removed from text when this is true.
    pub fn gate_satisfied(&self, raw_body: &[u8]) -> bool {
        self.strip.iter().any(|s| {
            s.condition.holds(raw_body) && contains(raw_body, s.selector.value().as_bytes())
        })
    }

    fn validate(&self) -> Result<(), RulesError> {
        let invalid = |reason: &str| RulesError::InvalidRule {
            archive_id: self.archive_id.clone(),
            reason: reason.to_string(),
        };
        if self.archive_id.trim().is_empty() {
            return Err(invalid("archive_id is empty"));
        }
        if self.text_prefixes.iter().any(String::is_empty) {
            return Err(invalid("text prefixes must be non-empty"));
        }
        for s in &self.strip {
            if let RuleCondition::MetaProperty { property, content } = &s.condition {
                if property.is_empty() || content.is_empty() {
                    return Err(invalid(
                        "meta-property condition needs non-empty property and content",
                    ));
                }
            }
        }
        if matches!(&self.frame_select, Some(f) if f.is_empty()) {
            return Err(invalid("frame_select is empty"));
        }
        Ok(())
    }
}

/// Ordered archive rules plus the catch-all fallback.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    rules: Vec<ArchiveRule>,
    fallback: ArchiveRule,
}

impl Default for RuleSet {
    fn default() -> Self {
        builtin_rules()
    }
}

impl RuleSet {
    /// Builds a rule set from explicit rules. `archive_id`s must be unique.
    pub fn new(rules: Vec<ArchiveRule>) -> Result<Self, RulesError> {
        for (i, rule) in rules.iter().enumerate() {
            rule.validate()?;
            if rules[..i].iter().any(|r| r.archive_id == rule.archive_id) {
                return Err(RulesError::DuplicateArchiveId(rule.archive_id.clone()));
            }
        }
        Ok(Self {
            rules,
            fallback: ArchiveRule::fallback(),
        })
    }

    pub fn rules(&self) -> &[ArchiveRule] {
        &self.rules
    }

    pub fn fallback(&self) -> &ArchiveRule {
        &self.fallback
    }

    pub fn get(&self, archive_id: &str) -> Option<&ArchiveRule> {
        self.rules.iter().find(|r| r.archive_id == archive_id)
    }

    /// First rule whose host patterns match `host`, else the fallback.
    pub fn match_host(&self, host: &str) -> &ArchiveRule {
        self.rules
            .iter()
            .find(|r| r.matches_host(host))
            .unwrap_or(&self.fallback)
    }

    pub fn match_uri(&self, uri: &str) -> Result<&ArchiveRule, RulesError> {
        let invalid = |reason: &str| RulesError::InvalidUri {
            uri: uri.to_string(),
            reason: reason.to_string(),
        };
        let parsed = Url::parse(uri).map_err(|e| invalid(&e.to_string()))?;
        if !matches!(parsed.scheme(), "http" | "https") {
            return Err(invalid("scheme must be http or https"));
        }
        let host = parsed.host_str().ok_or_else(|| invalid("no host"))?;
        Ok(self.match_host(host))
    }

    /// Parses a rule document and merges it over this set.
    ///
    /// A rule whose `archive_id` already exists replaces it in place; new
    /// rules are placed ahead of the existing ones, in document order, so
    /// they win host-pattern ties.
    pub fn merged_with(&self, document: &str) -> Result<Self, RulesError> {
        let user = parse_document(document)?;
        let mut merged = self.rules.clone();
        let mut fresh = Vec::new();
        for rule in user {
            match merged.iter_mut().find(|r| r.archive_id == rule.archive_id) {
                Some(slot) => *slot = rule,
                None => fresh.push(rule),
            }
        }
        fresh.extend(merged);
        RuleSet::new(fresh)
    }

    /// Serializes the ordered rules (not the fallback) in rule-file format.
    pub fn to_json(&self) -> String {
        let file = RuleFile {
            rules: self.rules.iter().map(RuleRecord::from).collect(),
        };
        serde_json::to_string_pretty(&file).expect("rule records always serialize")
    }
}

/// The archives whose additions need more than script/style removal.
pub fn builtin_rules() -> RuleSet {
    let always = |tag: &str, attr: &str, value: &str| StripRule {
        condition: RuleCondition::Always,
        selector: ElementSelector::new(tag, attr, value).expect("builtin selector"),
    };
    let archive_is_meta = RuleCondition::MetaProperty {
        property: "og:site_name".into(),
        content: "archive.is".into(),
    };
    let hosts = |globs: &[&str]| {
        globs
            .iter()
            .map(|g| HostPattern::new(*g).expect("builtin host glob"))
            .collect::<Vec<_>>()
    };

    let rules = vec![
        ArchiveRule {
            archive_id: "uk-national-archives".into(),
            host_patterns: hosts(&["webarchive.nationalarchives.gov.uk"]),
            // Both spellings are seen in the wild.
            strip: vec![
                always("div", "id", "webArchiveInfobox"),
                always("div", "id", "webarchiveInfobox"),
            ],
            text_prefixes: vec![ARCHIVED_CONTENT_PREFIX.into()],
            frame_select: None,
            notes: "UK Government Web Archive banner.".into(),
        },
        ArchiveRule {
            archive_id: "proni".into(),
            host_patterns: hosts(&["webarchive.proni.gov.uk"]),
            strip: vec![always("div", "id", "PRONIBANNER")],
            text_prefixes: vec![ARCHIVED_CONTENT_PREFIX.into()],
            frame_select: None,
            notes: "Public Record Office of Northern Ireland banner and sidebar.".into(),
        },
        ArchiveRule {
            archive_id: "archive-is".into(),
            host_patterns: hosts(&[
                "archive.is",
                "archive.today",
                "archive.ph",
                "archive.li",
                "archive.vn",
                "archive.fo",
                "archive.md",
            ]),
            strip: vec![
                StripRule {
                    condition: archive_is_meta.clone(),
                    selector: ElementSelector::new("div", "id", "HEADER").expect("builtin"),
                },
                StripRule {
                    condition: archive_is_meta,
                    selector: ElementSelector::new("table", "id", "hashtags").expect("builtin"),
                },
            ],
            text_prefixes: Vec::new(),
            frame_select: None,
            notes: "Header and hashtag sidebar; only stripped when the page declares itself \
                    an archive.is capture, since original pages may use id=HEADER."
                .into(),
        },
        ArchiveRule {
            archive_id: "webcite".into(),
            host_patterns: hosts(&["webcitation.org", "*.webcitation.org"]),
            strip: Vec::new(),
            text_prefixes: Vec::new(),
            frame_select: Some("main".into()),
            notes: "Serves every memento through the same frameset; the `main` frame \
                    returns content chosen by the session cookie."
                .into(),
        },
        ArchiveRule {
            archive_id: "wayback".into(),
            host_patterns: hosts(&[
                "web.archive.org",
                "wayback.archive.org",
                "*.archive.org",
                "wayback.*",
                "webarchive.*",
            ]),
            strip: vec![always("div", "id", "wm-ipp")],
            text_prefixes: Vec::new(),
            frame_select: None,
            notes: "Wayback toolbar.".into(),
        },
    ];
    RuleSet::new(rules).expect("builtin rules are valid")
}

/// Parses a rule document merged over [`builtin_rules`].
pub fn load_rules(document: &str) -> Result<RuleSet, RulesError> {
    builtin_rules().merged_with(document)
}

/// Rule for the archive serving `uri`, or the fallback.
pub fn match_archive<'a>(uri: &str, ruleset: &'a RuleSet) -> Result<&'a ArchiveRule, RulesError> {
    ruleset.match_uri(uri)
}

fn contains(haystack: &[u8], needle: &[u8]) -> bool {
    needle.is_empty() || haystack.windows(needle.len()).any(|w| w == needle)
}

// --- rule file format -------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    rules: Vec<RuleRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleRecord {
    archive_id: String,
    #[serde(default)]
    hosts: Vec<String>,
    #[serde(default)]
    strip: Vec<StripRecord>,
    #[serde(default)]
    prefixes: Vec<String>,
    #[serde(default)]
    frame_select: Option<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    notes: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StripRecord {
    #[serde(default)]
    when: WhenRecord,
    tag: String,
    attr: String,
    value: String,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum WhenRecord {
    #[default]
    Always,
    MetaProperty {
        property: String,
        content: String,
    },
}

impl From<&ArchiveRule> for RuleRecord {
    fn from(rule: &ArchiveRule) -> Self {
        RuleRecord {
            archive_id: rule.archive_id.clone(),
            hosts: rule
                .host_patterns
                .iter()
                .map(|h| h.as_str().to_string())
                .collect(),
            strip: rule
                .strip
                .iter()
                .map(|s| StripRecord {
                    when: match &s.condition {
                        RuleCondition::Always => WhenRecord::Always,
                        RuleCondition::MetaProperty { property, content } => {
                            WhenRecord::MetaProperty {
                                property: property.clone(),
                                content: content.clone(),
                            }
                        }
                    },
                    tag: s.selector.tag_name().to_string(),
                    attr: s.selector.attribute().to_string(),
                    value: s.selector.value().to_string(),
                })
                .collect(),
            prefixes: rule.text_prefixes.clone(),
            frame_select: rule.frame_select.clone(),
            notes: rule.notes.clone(),
        }
    }
}

impl RuleRecord {
    fn into_rule(self) -> Result<ArchiveRule, RulesError> {
        let archive_id = self.archive_id;
        let invalid = |reason: String| RulesError::InvalidRule {
            archive_id: archive_id.clone(),
            reason,
        };
        let host_patterns = self
            .hosts
            .into_iter()
            .map(HostPattern::new)
            .collect::<Result<Vec<_>, _>>()
            .map_err(invalid)?;
        let strip = self
            .strip
            .into_iter()
            .map(|s| {
                Ok(StripRule {
                    condition: match s.when {
                        WhenRecord::Always => RuleCondition::Always,
                        WhenRecord::MetaProperty { property, content } => {
                            RuleCondition::MetaProperty { property, content }
                        }
                    },
                    selector: ElementSelector::new(s.tag, s.attr, s.value).map_err(invalid)?,
                })
            })
            .collect::<Result<Vec<_>, RulesError>>()?;
        let rule = ArchiveRule {
            archive_id: archive_id.clone(),
            host_patterns,
            strip,
            text_prefixes: self.prefixes,
            frame_select: self.frame_select,
            notes: self.notes,
        };
        rule.validate()?;
        Ok(rule)
    }
}

fn parse_document(document: &str) -> Result<Vec<ArchiveRule>, RulesError> {
    if document.trim().is_empty() {
        return Ok(Vec::new());
    }
    let file: RuleFile = serde_json::from_str(document).map_err(|e| RulesError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut rules: Vec<ArchiveRule> = Vec::with_capacity(file.rules.len());
    for record in file.rules {
        let rule = record.into_rule()?;
        if rules.iter().any(|r| r.archive_id == rule.archive_id) {
            return Err(RulesError::DuplicateArchiveId(rule.archive_id));
        }
        rules.push(rule);
    }
    Ok(rules)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn has_selector(set: &RuleSet, tag: &str, attr: &str, value: &str) -> bool {
        set.rules()
            .iter()
            .flat_map(|r| &r.strip)
            .any(|s| s.selector.matches(tag, Some(value)) && s.selector.attribute() == attr)
    }

    #[test]
    fn builtin_covers_known_archives() {
        let set = builtin_rules();
        assert!(has_selector(&set, "div", "id", "wm-ipp"));
        assert!(has_selector(&set, "div", "id", "webArchiveInfobox"));
        assert!(has_selector(&set, "div", "id", "webarchiveInfobox"));
        assert!(has_selector(&set, "div", "id", "PRONIBANNER"));
        assert!(has_selector(&set, "div", "id", "HEADER"));
        assert!(has_selector(&set, "table", "id", "hashtags"));
        assert!(set
            .rules()
            .iter()
            .any(|r| r.frame_select.as_deref() == Some("main")));
        assert!(set.fallback().strip.is_empty());
        assert!(set.fallback().text_prefixes.is_empty());
        for id in ["uk-national-archives", "proni"] {
            assert_eq!(
                set.get(id).unwrap().text_prefixes,
                vec!["[ARCHIVED CONTENT] "]
            );
        }
    }

    #[test]
    fn archive_is_strips_are_gated_on_meta() {
        let set = builtin_rules();
        let rule = set.get("archive-is").unwrap();
        for s in &rule.strip {
            assert_eq!(
                s.condition,
                RuleCondition::MetaProperty {
                    property: "og:site_name".into(),
                    content: "archive.is".into()
                }
            );
        }
        let cond = &rule.strip[0].condition;
        assert!(cond.holds(br#"<head><meta property="og:site_name" content="archive.is"/>"#));
        assert!(!cond.holds(br#"<meta content="archive.is" property="og:site_name">"#));
        assert!(!cond.holds(b"<div id=\"HEADER\">"));
    }

    #[test]
    fn match_archive_examples() {
        let set = builtin_rules();
        let id = |uri: &str| match_archive(uri, &set).unwrap().archive_id.clone();
        assert_eq!(
            id("http://web.archive.org/web/20081126132802/http://www.bnl.gov/bnlweb/pubaf/pr/PR_display.asp?prID=05-38"),
            "wayback"
        );
        assert_eq!(
            id("http://webarchive.proni.gov.uk/20111214024729/http://eur-lex.europa.eu/LexUriServ/LexUriServ.do%3Furi=CELEX:32008L0056:EN:NOT"),
            "proni"
        );
        assert_eq!(
            id("http://webarchive.nationalarchives.gov.uk/20120405114247/http://www.decc.gov.uk/"),
            "uk-national-archives"
        );
        assert_eq!(
            id("http://archive.is/19961226114737/http://www.rsinc.com/"),
            "archive-is"
        );
        assert_eq!(id("http://www.webcitation.org/6BToD7SUd"), "webcite");
        assert_eq!(
            id("https://wayback.archive-it.org/1234/20100101/http://a/"),
            "wayback"
        );
        assert_eq!(id("http://example.org/page"), FALLBACK_ARCHIVE_ID);
    }

    #[test]
    fn match_archive_rejects_bad_uris() {
        let set = builtin_rules();
        assert!(matches!(
            match_archive("not a uri", &set),
            Err(RulesError::InvalidUri { .. })
        ));
        assert!(matches!(
            match_archive("mailto:someone@example.org", &set),
            Err(RulesError::InvalidUri { .. })
        ));
        assert!(matches!(
            match_archive("file:///etc/passwd", &set),
            Err(RulesError::InvalidUri { .. })
        ));
    }

    #[test]
    fn host_glob_semantics() {
        let p = HostPattern::new("*.archive.org").unwrap();
        assert!(p.matches("web.archive.org"));
        assert!(p.matches("a.b.archive.org"));
        assert!(p.matches("WEB.Archive.org"));
        assert!(!p.matches("archive.org"));
        assert!(!p.matches("archive.org.evil.com"));
        let p = HostPattern::new("wayback.*").unwrap();
        assert!(p.matches("wayback.vefsafn.is"));
        assert!(!p.matches("wayback"));
        let p = HostPattern::new("a.*.c").unwrap();
        assert!(p.matches("a.b.c"));
        assert!(p.matches("a.b.b.c"));
        assert!(!p.matches("a.c"));
        assert!(HostPattern::new("we*b.org").is_err());
        assert!(HostPattern::new("a..b").is_err());
    }

    #[test]
    fn first_match_wins_in_list_order() {
        let rule = |id: &str| ArchiveRule {
            archive_id: id.into(),
            host_patterns: vec![HostPattern::new("*.example.org").unwrap()],
            ..ArchiveRule::fallback()
        };
        let ab = RuleSet::new(vec![rule("a"), rule("b")]).unwrap();
        let ba = RuleSet::new(vec![rule("b"), rule("a")]).unwrap();
        assert_eq!(ab.match_host("x.example.org").archive_id, "a");
        assert_eq!(ba.match_host("x.example.org").archive_id, "b");
    }

    #[test]
    fn empty_document_is_builtin() {
        assert_eq!(load_rules("").unwrap(), builtin_rules());
        assert_eq!(load_rules("  \n").unwrap(), builtin_rules());
        assert_eq!(load_rules(r#"{"rules": []}"#).unwrap(), builtin_rules());
    }

    #[test]
    fn redefining_wayback_replaces_builtin() {
        let doc = r#"{"rules": [{
            "archive_id": "wayback",
            "hosts": ["web.archive.org"],
            "strip": [
                {"when": {"kind": "always"}, "tag": "div", "attr": "id", "value": "wm-ipp"},
                {"when": {"kind": "always"}, "tag": "div", "attr": "id", "value": "donato"}
            ],
            "prefixes": [],
            "frame_select": null
        }]}"#;
        let set = load_rules(doc).unwrap();
        let wayback = set.get("wayback").unwrap();
        let values: Vec<_> = wayback.strip.iter().map(|s| s.selector.value()).collect();
        assert_eq!(values, vec!["wm-ipp", "donato"]);
        assert_eq!(set.rules().len(), builtin_rules().rules().len());
        // Replacement keeps the builtin's position.
        assert_eq!(set.rules().last().unwrap().archive_id, "wayback");
    }

    #[test]
    fn new_rules_take_priority() {
        let doc = r#"{"rules": [{"archive_id": "local", "hosts": ["web.archive.org"], "frame_select": "main"}]}"#;
        let set = load_rules(doc).unwrap();
        assert_eq!(set.rules()[0].archive_id, "local");
        assert_eq!(
            set.match_uri("http://web.archive.org/web/1/http://a/")
                .unwrap()
                .archive_id,
            "local"
        );
    }

    #[test]
    fn duplicate_archive_id_rejected() {
        let doc = r#"{"rules": [{"archive_id": "x", "hosts": ["a.org"]}, {"archive_id": "x", "hosts": ["b.org"]}]}"#;
        assert!(matches!(load_rules(doc), Err(RulesError::DuplicateArchiveId(id)) if id == "x"));
    }

    #[test]
    fn malformed_documents_report_position() {
        let err = load_rules("{\n  \"rules\": [\n    {\"archive_id\": }\n  ]\n}").unwrap_err();
        match err {
            RulesError::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
        let unknown = r#"{"rules": [{"archive_id": "x", "hostz": []}]}"#;
        assert!(matches!(load_rules(unknown), Err(RulesError::Parse { .. })));
        let unknown_when = r#"{"rules": [{"archive_id": "x", "strip": [{"when": {"kind": "sometimes"}, "tag": "div", "attr": "id", "value": "v"}]}]}"#;
        assert!(matches!(
            load_rules(unknown_when),
            Err(RulesError::Parse { .. })
        ));
    }

    #[test]
    fn invalid_rules_rejected() {
        let empty_prefix = r#"{"rules": [{"archive_id": "x", "prefixes": [""]}]}"#;
        assert!(matches!(
            load_rules(empty_prefix),
            Err(RulesError::InvalidRule { .. })
        ));
        let upper_tag = r#"{"rules": [{"archive_id": "x", "strip": [{"tag": "DIV", "attr": "id", "value": "v"}]}]}"#;
        assert!(matches!(
            load_rules(upper_tag),
            Err(RulesError::InvalidRule { .. })
        ));
        let empty_meta = r#"{"rules": [{"archive_id": "x", "strip": [{"when": {"kind": "meta-property", "property": "", "content": "c"}, "tag": "div", "attr": "id", "value": "v"}]}]}"#;
        assert!(matches!(
            load_rules(empty_meta),
            Err(RulesError::InvalidRule { .. })
        ));
    }

    #[test]
    fn serialized_rules_parse_back_equal() {
        let doc = r#"{"rules": [{"archive_id": "local", "hosts": ["*.local.test"], "prefixes": ["[OLD] "], "notes": "n"}]}"#;
        let set = load_rules(doc).unwrap();
        assert_eq!(load_rules(&set.to_json()).unwrap(), set);
        let builtin = builtin_rules();
        assert_eq!(load_rules(&builtin.to_json()).unwrap(), builtin);
    }

    #[test]
    fn prefix_gate_uses_selector_markers() {
        let set = builtin_rules();
        let uk = set.get("uk-national-archives").unwrap();
        assert!(uk.gate_satisfied(b"<div id=\"webArchiveInfobox\">"));
        assert!(uk.gate_satisfied(b"<div id=\"webarchiveInfobox\">"));
        assert!(!uk.gate_satisfied(b"<div id=\"content\">"));
        let proni = set.get("proni").unwrap();
        assert!(proni.gate_satisfied(b"<div id=\"PRONIBANNER\">"));
        assert!(!set.fallback().gate_satisfied(b"PRONIBANNER"));
    }
}
