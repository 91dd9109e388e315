use std::collections::BTreeSet;

use rust_stemmers::{Algorithm, Stemmer};

/// Text preprocessing settings. The default lowercases, splits on
/// non-alphanumeric characters and applies neither stopping nor stemming.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    /// Split on every non-alphanumeric character; otherwise on whitespace.
    pub split_non_alnum: bool,
    pub stopwords: BTreeSet<String>,
    /// English Porter stemming, applied after stopword removal.
    pub stem: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            lowercase: true,
            split_non_alnum: true,
            stopwords: BTreeSet::new(),
            stem: false,
        }
    }
}

impl TokenizerConfig {
    /// Parses a stopword list: one word per line, `#` comments allowed.
    pub fn stopwords_from_str(text: &str) -> BTreeSet<String> {
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect()
    }
}

/// Stateless tokenizer; cloning is cheap once constructed.
pub struct Tokenizer {
    config: TokenizerConfig,
    stemmer: Option<Stemmer>,
}

impl Tokenizer {
    pub fn new(config: TokenizerConfig) -> Self {
        let stemmer = config.stem.then(|| Stemmer::create(Algorithm::English));
        Self { config, stemmer }
    }

    pub fn config(&self) -> &TokenizerConfig {
        &self.config
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let pieces: Vec<&str> = if self.config.split_non_alnum {
            text.split(|c: char| !c.is_alphanumeric())
                .filter(|p| !p.is_empty())
                .collect()
        } else {
            text.split_whitespace().collect()
        };
        pieces
            .into_iter()
            .map(|p| {
                if self.config.lowercase {
                    p.to_lowercase()
                } else {
                    p.to_string()
                }
            })
            .filter(|t| !self.config.stopwords.contains(t))
            .map(|t| match &self.stemmer {
                Some(s) => s.stem(&t).into_owned(),
                None => t,
            })
            .collect()
    }
}

/// One-shot convenience wrapper around [`Tokenizer`].
pub fn tokenize(text: &str, config: &TokenizerConfig) -> Vec<String> {
    Tokenizer::new(config.clone()).tokenize(text)
}
