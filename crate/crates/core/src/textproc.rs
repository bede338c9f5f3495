//! Text normalization, tokenization and n-gram extraction.

use serde::{Deserialize, Serialize};

/// Punctuation split off the end of words by the rule-based tokenizer.
const TRAILING_PUNCT: &[char] = &['.', ',', '!', '?', ';', ':'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenizerMode {
    /// Split on whitespace only. Used for the already-tokenized training data.
    Pretokenized,
    /// Whitespace split, then trailing `. , ! ? ; :` become separate tokens.
    #[default]
    RuleBased,
}

impl std::str::FromStr for TokenizerMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pretokenized" => Ok(TokenizerMode::Pretokenized),
            "rule_based" => Ok(TokenizerMode::RuleBased),
            other => Err(format!("unknown tokenizer mode {other:?}")),
        }
    }
}

impl std::fmt::Display for TokenizerMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TokenizerMode::Pretokenized => "pretokenized",
            TokenizerMode::RuleBased => "rule_based",
        })
    }
}

/// Ordered tokens of one text. Tokens are non-empty and contain no whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSeq(pub Vec<String>);

impl TokenSeq {
    /// `normalize` followed by `tokenize`.
    pub fn analyze(text: &str, mode: TokenizerMode) -> Self {
        tokenize(&normalize(text), mode)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn join(&self) -> String {
        self.0.join(" ")
    }
}

impl From<Vec<String>> for TokenSeq {
    fn from(tokens: Vec<String>) -> Self {
        TokenSeq(tokens)
    }
}

impl<'a> From<&[&'a str]> for TokenSeq {
    fn from(tokens: &[&'a str]) -> Self {
        TokenSeq(tokens.iter().map(|t| t.to_string()).collect())
    }
}

/// Delete every `"` and lowercase with the Unicode simple (1:1) mapping.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars().filter(|&c| c != '"') {
        let mut lower = c.to_lowercase();
        if lower.len() == 1 {
            out.extend(lower.next());
        } else {
            // Only U+0130 expands under the full mapping; its simple mapping is 'i'.
            out.push(simple_lowercase_multi(c));
        }
    }
    out
}

fn simple_lowercase_multi(c: char) -> char {
    match c {
        '\u{0130}' => 'i',
        other => other,
    }
}

pub fn tokenize(text: &str, mode: TokenizerMode) -> TokenSeq {
    let words = text.split_whitespace();
    let tokens = match mode {
        TokenizerMode::Pretokenized => words.map(str::to_string).collect(),
        TokenizerMode::RuleBased => {
            let mut tokens = Vec::new();
            for word in words {
                let stem = word.trim_end_matches(TRAILING_PUNCT);
                if !stem.is_empty() {
                    tokens.push(stem.to_string());
                }
                tokens.extend(word[stem.len()..].chars().map(String::from));
            }
            tokens
        }
    };
    TokenSeq(tokens)
}

/// All contiguous n-grams for `n = 1..=max_n`, grouped by `n` then start
/// position, tokens joined by a single space.
pub fn extract_ngrams(tokens: &TokenSeq, max_n: usize) -> Vec<String> {
    let toks = tokens.tokens();
    let mut out = Vec::new();
    for n in 1..=max_n {
        if toks.len() < n {
            break;
        }
        out.extend(toks.windows(n).map(|w| w.join(" ")));
    }
    out
}
