use html5ever::tendril::TendrilSink;
use html5ever::tree_builder::TreeBuilderOpts;
use html5ever::{parse_document, serialize, ParseOpts};
use markup5ever_rcdom::{Handle, NodeData, RcDom, SerializableHandle};

use crate::rules::ArchiveRule;

/// A parsed HTML document.
///
/// Parsing follows the HTML tree-construction algorithm with scripting
/// disabled, so `noscript` content is parsed as markup like any other
/// element and every input yields a single well-formed tree.
pub struct Document {
    dom: RcDom,
}

impl std::fmt::Debug for Document {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Document").finish_non_exhaustive()
    }
}

impl Document {
    pub fn parse(html: &str) -> Self {
        let opts = ParseOpts {
            tree_builder: TreeBuilderOpts {
                scripting_enabled: false,
                ..Default::default()
            },
            ..Default::default()
        };
        let dom = parse_document(RcDom::default(), opts).one(html);
        Self { dom }
    }

    /// All text nodes in document order, concatenated.
    pub fn text_content(&self) -> String {
        let mut out = String::new();
        collect_text(&self.dom.document, &mut out);
        out
    }

    /// Serializes the tree back to HTML.
    pub fn to_html(&self) -> String {
        let mut out = Vec::new();
        let handle: SerializableHandle = self.dom.document.clone().into();
        serialize(&mut out, &handle, Default::default()).expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("serializer emits UTF-8")
    }
}

fn collect_text(node: &Handle, out: &mut String) {
    if let NodeData::Text { contents } = &node.data {
        out.push_str(&contents.borrow());
    }
    for child in node.children.borrow().iter() {
        collect_text(child, out);
    }
}

/// Removes `script` and `style` subtrees, then the rule's archive elements.
///
/// A strip applies only when its condition holds for `raw_body`.
pub fn sanitize_dom(document: &mut Document, rule: &ArchiveRule, raw_body: &[u8]) {
    let active: Vec<_> = rule
        .strip
        .iter()
        .filter(|s| s.condition.holds(raw_body))
        .map(|s| &s.selector)
        .collect();
    remove_matching(&document.dom.document, &|node| {
        let NodeData::Element { name, attrs, .. } = &node.data else {
            return false;
        };
        let tag = name.local.as_ref();
        if tag == "script" || tag == "style" {
            return true;
        }
        let attrs = attrs.borrow();
        active.iter().any(|selector| {
            let value = attrs
                .iter()
                .find(|a| a.name.local.as_ref() == selector.attribute())
                .map(|a| a.value.as_ref());
            selector.matches(tag, value)
        })
    });
}

fn remove_matching(node: &Handle, doomed: &dyn Fn(&Handle) -> bool) {
    node.children.borrow_mut().retain(|child| {
        if doomed(child) {
            child.parent.set(None);
            false
        } else {
            true
        }
    });
    for child in node.children.borrow().iter() {
        remove_matching(child, doomed);
    }
}

/// Raw, unnormalized text of a sanitized document.
pub fn extract_text(document: &Document) -> String {
    document.text_content()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::builtin_rules;

    fn text_of(html: &str, archive: &str) -> String {
        let rules = builtin_rules();
        let rule = rules.get(archive).unwrap_or(rules.fallback());
        let mut doc = Document::parse(html);
        sanitize_dom(&mut doc, rule, html.as_bytes());
        extract_text(&doc)
    }

    #[test]
    fn concatenates_text_nodes() {
        assert_eq!(Document::parse("<p>a<b>b</b>c</p>").text_content(), "abc");
    }

    #[test]
    fn empty_after_sanitizing() {
        assert_eq!(
            text_of("<script>x()</script><style>p{}</style>", "fallback"),
            ""
        );
    }

    #[test]
    fn scripts_and_styles_anywhere() {
        let html = "<html><head><title>T</title></head><body><p>a</p><script>var s;</script><div><style>.x{}</style>b</div></body></html>";
        assert_eq!(text_of(html, "fallback"), "Tab");
    }

    #[test]
    fn wayback_toolbar_removed() {
        let html = r#"<body><div id="wm-ipp" lang="en"><p>Toolbar</p></div><p>Content</p></body>"#;
        assert_eq!(text_of(html, "wayback"), "Content");
    }

    #[test]
    fn archive_is_header_needs_meta() {
        let bare = r#"<body><div id="HEADER">Saved from</div><p>Body</p></body>"#;
        assert_eq!(text_of(bare, "archive-is"), "Saved fromBody");
        let marked = r#"<head><meta property="og:site_name" content="archive.is"/></head><body><div id="HEADER">Saved from</div><p>Body</p><table id="hashtags"><tr><td>Top</td></tr></table></body>"#;
        assert_eq!(text_of(marked, "archive-is"), "Body");
    }

    #[test]
    fn entities_decoded() {
        assert_eq!(
            Document::parse("<p>caf&eacute; &lt;b&gt; &amp;</p>").text_content(),
            "café <b> &"
        );
    }

    #[test]
    fn noscript_content_is_text() {
        assert_eq!(
            Document::parse("<body><noscript><p>Enable JS</p></noscript></body>").text_content(),
            "Enable JS"
        );
    }
}
