//! Whitespace tokenization with optional sentence-final period stripping.
//!
//! The tokenizer splits on Unicode whitespace only. It deliberately keeps all
//! other punctuation attached to its token; the one configurable fix is
//! removing a single trailing `.` from a token, which repairs the common
//! "last word of a sentence" artifact without touching abbreviations more
//! than once.

/// How text and dictionary entries are turned into tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenizerConfig {
    /// Remove a single trailing `.` from tokens longer than one character.
    pub strip_trailing_period: bool,
    /// Lowercase tokens. Spans still point at the original text.
    pub lowercase: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            strip_trailing_period: false,
            lowercase: true,
        }
    }
}

/// A tokenized text: the tokens plus the byte span each one came from.
///
/// Spans are `(start, end)` byte offsets into the source text, exclusive of
/// any stripped trailing period, so slicing the source at a span yields the
/// token before lowercasing.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
    pub spans: Vec<(usize, usize)>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Split `text` on Unicode whitespace.
///
/// Empty input yields an empty sequence. Spans always refer to byte offsets
/// in `text`.
pub fn tokenize(text: &str, config: &TokenizerConfig) -> TokenSequence {
    let mut tokens = Vec::new();
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;

    let mut push = |start: usize, end: usize| {
        let mut end = end;
        if config.strip_trailing_period {
            let raw = &text[start..end];
            if raw.ends_with('.') && raw.chars().count() > 1 {
                end -= 1;
            }
        }
        let raw = &text[start..end];
        tokens.push(if config.lowercase {
            raw.to_lowercase()
        } else {
            raw.to_string()
        });
        spans.push((start, end));
    };

    for (i, ch) in text.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                push(s, i);
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        push(s, text.len());
    }

    TokenSequence { tokens, spans }
}

/// Remove a single trailing `.` from `token` if present and the token is
/// longer than one character. `"."` itself is returned unchanged.
pub fn strip_trailing_period(token: &str) -> &str {
    if token.ends_with('.') && token.chars().count() > 1 {
        &token[..token.len() - 1]
    } else {
        token
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(strip: bool) -> TokenizerConfig {
        TokenizerConfig {
            strip_trailing_period: strip,
            lowercase: true,
        }
    }

    #[test]
    fn keeps_attached_period_by_default() {
        let seq = tokenize("Code of honor.", &cfg(false));
        assert_eq!(seq.tokens, vec!["code", "of", "honor."]);
    }

    #[test]
    fn strips_trailing_period_when_enabled() {
        let seq = tokenize("Code of honor.", &cfg(true));
        assert_eq!(seq.tokens, vec!["code", "of", "honor"]);
    }

    #[test]
    fn empty_text_yields_empty_sequence() {
        assert!(tokenize("", &cfg(false)).is_empty());
        assert!(tokenize(" \t\n", &cfg(true)).is_empty());
    }

    #[test]
    fn spans_point_at_original_text() {
        let text = "Code of honor.";
        let seq = tokenize(text, &cfg(true));
        let raw: Vec<&str> = seq.spans.iter().map(|&(s, e)| &text[s..e]).collect();
        assert_eq!(raw, vec!["Code", "of", "honor"]);
    }

    #[test]
    fn strip_examples() {
        assert_eq!(strip_trailing_period("honor."), "honor");
        assert_eq!(strip_trailing_period("honor"), "honor");
        assert_eq!(strip_trailing_period("e.g."), "e.g");
        assert_eq!(strip_trailing_period("."), ".");
        assert_eq!(strip_trailing_period(".."), ".");
    }

    #[test]
    fn strip_handles_multibyte_tokens() {
        assert_eq!(strip_trailing_period("é."), "é");
    }

    #[test]
    fn case_preserved_when_lowercase_disabled() {
        let seq = tokenize(
            "Code OF honor",
            &TokenizerConfig {
                strip_trailing_period: false,
                lowercase: false,
            },
        );
        assert_eq!(seq.tokens, vec!["Code", "OF", "honor"]);
    }

    proptest! {
        #[test]
        fn tokens_are_nonempty_and_spans_increase(text in "\\PC{0,60}") {
            for strip in [false, true] {
                let seq = tokenize(&text, &cfg(strip));
                prop_assert_eq!(seq.tokens.len(), seq.spans.len());
                let mut prev_end = 0usize;
                for (tok, &(s, e)) in seq.tokens.iter().zip(&seq.spans) {
                    prop_assert!(!tok.is_empty());
                    prop_assert!(s < e);
                    prop_assert!(s >= prev_end);
                    prev_end = e;
                }
            }
        }

        #[test]
        fn spans_roundtrip_to_raw_tokens(text in "\\PC{0,60}") {
            let seq = tokenize(&text, &cfg(true));
            for (tok, &(s, e)) in seq.tokens.iter().zip(&seq.spans) {
                prop_assert_eq!(&text[s..e].to_lowercase(), tok);
            }
        }

        #[test]
        fn strip_config_matches_per_token_strip(text in "\\PC{0,60}") {
            let kept = tokenize(&text, &cfg(false));
            let stripped = tokenize(&text, &cfg(true));
            let expect: Vec<String> = kept
                .tokens
                .iter()
                .map(|t| strip_trailing_period(t).to_string())
                .collect();
            prop_assert_eq!(stripped.tokens, expect);
        }

        #[test]
        fn strip_is_idempotent_for_single_trailing_period(tok in "[a-z]{1,8}\\.?") {
            let once = strip_trailing_period(&tok);
            prop_assert_eq!(strip_trailing_period(once), once);
        }
    }
}
