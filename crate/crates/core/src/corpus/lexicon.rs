use std::collections::BTreeMap;
use std::path::Path;

use super::Vocabulary;
use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

/// Word → (neutral, positive, negative) weights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SentimentLexicon {
    entries: BTreeMap<String, [f64; 3]>,
}

impl SentimentLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: impl Into<String>, weights: [f64; 3]) -> Result<()> {
        let word = word.into();
        validate(&weights).map_err(|m| Error::InvalidInput(format!("{word}: {m}")))?;
        self.entries.insert(word, weights);
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading lexicon {}", path.display()), e))?;
        Self::parse(&text, path)
    }

    /// Parses `token w_neutral w_positive w_negative` lines. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lex = Self::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(err(format!("expected 4 fields, found {}", fields.len())));
            }
            let mut w = [0.0; 3];
            for (slot, f) in w.iter_mut().zip(&fields[1..]) {
                *slot = f
                    .parse()
                    .map_err(|_| err(format!("weight {f:?} is not a number")))?;
            }
            validate(&w).map_err(err)?;
            lex.entries.insert(fields[0].to_string(), w);
        }
        Ok(lex)
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(w, [n, p, q])| format!("{w} {n} {p} {q}\n"))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weights(&self, word: &str) -> Option<[f64; 3]> {
        self.entries.get(word).copied()
    }

    /// Positive or negative when that weight beats the other polar weight and
    /// is not outweighed by neutrality; `None` otherwise.
    pub fn polarity(&self, word: &str) -> Option<Polarity> {
        let [neutral, pos, neg] = self.weights(word)?;
        if pos > neg && pos > neutral {
            Some(Polarity::Positive)
        } else if neg > pos && neg > neutral {
            Some(Polarity::Negative)
        } else {
            None
        }
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn count(&self, polarity: Polarity) -> usize {
        self.words().filter(|w| self.polarity(w) == Some(polarity)).count()
    }

    /// Polarity of every vocabulary index.
    pub fn polarity_map(&self, vocab: &Vocabulary) -> Vec<Option<Polarity>> {
        vocab.words().iter().map(|w| self.polarity(w)).collect()
    }
}

fn validate(w: &[f64; 3]) -> std::result::Result<(), String> {
    if w.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(format!("weights {w:?} must lie in [0, 1]"));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(format!("weights sum to {sum}, expected 1"));
    }
    Ok(())
}

/// Vocabulary indices shared with a lexicon, split by polarity.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LexiconIntersection {
    pub shared: Vec<usize>,
    pub positive: Vec<usize>,
    pub negative: Vec<usize>,
}

impl LexiconIntersection {
    pub fn counts(&self) -> (usize, usize, usize) {
        (self.shared.len(), self.positive.len(), self.negative.len())
    }
}

pub fn lexicon_intersection(vocab: &Vocabulary, lex: &SentimentLexicon) -> LexiconIntersection {
    let mut out = LexiconIntersection::default();
    for (k, w) in vocab.words().iter().enumerate() {
        if lex.weights(w).is_none() {
            continue;
        }
        out.shared.push(k);
        match lex.polarity(w) {
            Some(Polarity::Positive) => out.positive.push(k),
            Some(Polarity::Negative) => out.negative.push(k),
            None => {}
        }
    }
    out
}
