use std::collections::HashMap;

use log::debug;

use super::Document;
use crate::error::{Error, Result};

/// Ordered word list; a word's position is its index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new(words: Vec<String>) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::InvalidInput("vocabulary must contain at least one word".into()));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate vocabulary word {w:?}")));
            }
        }
        Ok(Vocabulary { words, index })
    }

    /// K.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, index: usize) -> &str {
        &self.words[index]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

/// Keeps the `max_size` most frequent tokens, ordered by descending count and
/// then lexicographically.
pub fn build_vocabulary<I, L, S>(token_lists: I, max_size: usize) -> Result<Vocabulary>
where
    I: IntoIterator<Item = L>,
    L: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    if max_size == 0 {
        return Err(Error::InvalidInput("max_size must be at least 1".into()));
    }
    let mut freq: HashMap<String, u64> = HashMap::new();
    for list in token_lists {
        for t in list {
            *freq.entry(t.as_ref().to_string()).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, u64)> = freq.into_iter().collect();
    ranked.sort_by(|(wa, ca), (wb, cb)| cb.cmp(ca).then_with(|| wa.cmp(wb)));
    ranked.truncate(max_size);
    debug!("vocabulary: kept {} words", ranked.len());
    Vocabulary::new(ranked.into_iter().map(|(w, _)| w).collect())
}

/// Counts in-vocabulary tokens; out-of-vocabulary tokens are dropped.
pub fn vectorize<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> Document {
    let mut counts = vec![0u32; vocab.len()];
    for t in tokens {
        if let Some(k) = vocab.get(t.as_ref()) {
            counts[k] += 1;
        }
    }
    Document::from_counts(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(words: &[&str]) -> Vocabulary {
        Vocabulary::new(words.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn keeps_most_frequent() {
        let lists = vec![vec!["a", "b", "a"], vec!["c", "a", "b"]];
        assert_eq!(build_vocabulary(lists, 2).unwrap().words(), &["a", "b"]);
    }

    #[test]
    fn ties_break_lexicographically() {
        let lists = vec![vec!["b", "a", "b", "a"]];
        assert_eq!(build_vocabulary(lists.clone(), 1).unwrap().words(), &["a"]);
        assert_eq!(build_vocabulary(lists, 5).unwrap().words(), &["a", "b"]);
    }

    #[test]
    fn zero_max_size_is_rejected() {
        assert!(build_vocabulary(vec![vec!["a"]], 0).is_err());
    }

    #[test]
    fn duplicate_words_are_rejected() {
        assert!(Vocabulary::new(vec!["a".into(), "a".into()]).is_err());
        assert!(Vocabulary::new(vec![]).is_err());
    }

    #[test]
    fn index_inverts_word_list() {
        let vocab = v(&["x", "y", "z"]);
        for (i, w) in vocab.words().iter().enumerate() {
            assert_eq!(vocab.get(w), Some(i));
        }
    }

    #[test]
    fn vectorize_counts_and_drops_oov() {
        let vocab = v(&["a", "b", "c"]);
        let d = vectorize(&["a", "b", "a", "q"], &vocab);
        assert_eq!(d.counts(), &[2, 1, 0]);
        assert_eq!(d.length(), 3);
        assert!(vectorize(&["z"], &v(&["a", "b"])).is_empty());
    }
}
