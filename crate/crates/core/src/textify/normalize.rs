use crate::rules::ArchiveRule;

fn is_separator(c: char) -> bool {
    c.is_whitespace() || c.is_control()
}

/// Collapses every run of whitespace to a single `\n` and trims both ends.
///
/// Whitespace is Unicode `White_Space` (so NBSP included) plus control
/// characters, which some HTML editors leave in documents.
pub fn normalize_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for token in text.split(is_separator).filter(|t| !t.is_empty()) {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(token);
    }
    out
}

/// Removes one registered prefix from the start of extracted text.
///
/// Applies only when the rule's banner is present in `raw_body`. Leading
/// whitespace before the prefix (what a parser keeps between `<head>` and
/// `<title>`) is skipped; the prefix itself must match exactly.
pub fn strip_prefixes(text: &str, rule: &ArchiveRule, raw_body: &[u8]) -> (String, bool) {
    if rule.text_prefixes.is_empty() || !rule.gate_satisfied(raw_body) {
        return (text.to_string(), false);
    }
    let rest = text.trim_start_matches(is_separator);
    let lead = &text[..text.len() - rest.len()];
    for prefix in &rule.text_prefixes {
        if let Some(stripped) = rest.strip_prefix(prefix.as_str()) {
            return (format!("{lead}{stripped}"), true);
        }
    }
    (text.to_string(), false)
}
