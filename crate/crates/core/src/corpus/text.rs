use std::collections::HashSet;

use rust_stemmers::{Algorithm, Stemmer};

const ENGLISH_STOPWORDS: &str = include_str!("../../data/english_stopwords.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StemmerKind {
    /// Porter2 (Snowball English).
    Porter,
    Identity,
}

#[derive(Debug, Clone)]
pub struct PreprocessConfig {
    pub stop_words: HashSet<String>,
    pub stemmer: StemmerKind,
}

impl PreprocessConfig {
    /// Bundled English stop list with the Porter stemmer.
    pub fn english() -> Self {
        PreprocessConfig {
            stop_words: parse_stop_words(ENGLISH_STOPWORDS),
            stemmer: StemmerKind::Porter,
        }
    }

    /// No stop words, no stemming: only lowercasing and tokenization.
    pub fn identity() -> Self {
        PreprocessConfig {
            stop_words: HashSet::new(),
            stemmer: StemmerKind::Identity,
        }
    }

    pub fn with_stop_words(mut self, list: &str) -> Self {
        self.stop_words = parse_stop_words(list);
        self
    }
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self::english()
    }
}

fn parse_stop_words(list: &str) -> HashSet<String> {
    list.split_whitespace().map(str::to_lowercase).collect()
}

/// Lowercases, splits on non-alphanumeric characters, drops stop words and stems.
pub fn preprocess(raw_text: &str, config: &PreprocessConfig) -> Vec<String> {
    let stemmer = match config.stemmer {
        StemmerKind::Porter => Some(Stemmer::create(Algorithm::English)),
        StemmerKind::Identity => None,
    };
    raw_text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .filter(|t| !config.stop_words.contains(t))
        .map(|t| match &stemmer {
            Some(s) => s.stem(&t).into_owned(),
            None => t,
        })
        .collect()
}
