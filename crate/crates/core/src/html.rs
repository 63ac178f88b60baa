//! Flat token scan over HTML text, used by the content-level detectors
//! (meta refresh, framesets, noscript corruption) that must look at markup
//! as written rather than at the tree a parser would repair it into.

use std::cell::RefCell;

use html5ever::tendril::StrTendril;
use html5ever::tokenizer::states::RawKind;
use html5ever::tokenizer::{
    BufferQueue, TagKind, Token, TokenSink, TokenSinkResult, Tokenizer, TokenizerOpts,
};
use html5ever::TokenizerResult;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum HtmlToken {
    Start {
        name: String,
        attrs: Vec<(String, String)>,
    },
    End {
        name: String,
    },
    Text(String),
}

impl HtmlToken {
    pub(crate) fn attr(&self, attr: &str) -> Option<&str> {
        match self {
            HtmlToken::Start { attrs, .. } => attrs
                .iter()
                .find(|(name, _)| name == attr)
                .map(|(_, v)| v.as_str()),
            _ => None,
        }
    }
}

#[derive(Default)]
struct Collector {
    tokens: RefCell<Vec<HtmlToken>>,
}

impl TokenSink for Collector {
    type Handle = ();

    fn process_token(&self, token: Token, _line: u64) -> TokenSinkResult<()> {
        let mut tokens = self.tokens.borrow_mut();
        match token {
            Token::TagToken(tag) => {
                let name = tag.name.to_string();
                match tag.kind {
                    TagKind::StartTag => {
                        let raw = raw_kind(&name);
                        tokens.push(HtmlToken::Start {
                            name,
                            attrs: tag
                                .attrs
                                .iter()
                                .map(|a| (a.name.local.to_string(), a.value.to_string()))
                                .collect(),
                        });
                        if !tag.self_closing {
                            if let Some(result) = raw {
                                return result;
                            }
                        }
                    }
                    TagKind::EndTag => tokens.push(HtmlToken::End { name }),
                }
            }
            Token::CharacterTokens(text) => match tokens.last_mut() {
                Some(HtmlToken::Text(prev)) => prev.push_str(&text),
                _ => tokens.push(HtmlToken::Text(text.to_string())),
            },
            _ => {}
        }
        TokenSinkResult::Continue
    }
}

/// Content models that switch the tokenizer out of the data state. `noscript`
/// is absent: documents are treated as if scripting were disabled.
fn raw_kind(name: &str) -> Option<TokenSinkResult<()>> {
    match name {
        "script" => Some(TokenSinkResult::RawData(RawKind::ScriptData)),
        "style" | "xmp" | "iframe" | "noembed" | "noframes" => {
            Some(TokenSinkResult::RawData(RawKind::Rawtext))
        }
        "title" | "textarea" => Some(TokenSinkResult::RawData(RawKind::Rcdata)),
        "plaintext" => Some(TokenSinkResult::Plaintext),
        _ => None,
    }
}

pub(crate) fn tokenize(text: &str) -> Vec<HtmlToken> {
    let tokenizer = Tokenizer::new(Collector::default(), TokenizerOpts::default());
    let input = BufferQueue::default();
    input.push_back(StrTendril::from_slice(text));
    while let TokenizerResult::Script(()) = tokenizer.feed(&input) {}
    tokenizer.end();
    tokenizer.sink.tokens.take()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn script_content_is_text() {
        let tokens = tokenize("<script>if (a < b) { x = '<table>'; }</script><p>x</p>");
        assert!(matches!(&tokens[0], HtmlToken::Start { name, .. } if name == "script"));
        assert!(matches!(&tokens[1], HtmlToken::Text(t) if t.contains("<table>")));
        assert!(matches!(&tokens[2], HtmlToken::End { name } if name == "script"));
    }

    #[test]
    fn entities_are_decoded_in_text_and_attributes() {
        let tokens = tokenize(r#"<a href="/x?a=1&amp;b=2">&lt;b&gt;</a>"#);
        assert_eq!(tokens[0].attr("href"), Some("/x?a=1&b=2"));
        assert_eq!(tokens[1], HtmlToken::Text("<b>".into()));
    }

    #[test]
    fn tag_names_lowercased() {
        let tokens = tokenize("<META HTTP-EQUIV=Refresh CONTENT=5>");
        assert_eq!(tokens[0].attr("http-equiv"), Some("Refresh"));
    }
}
