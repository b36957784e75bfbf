use std::fmt::Write as _;

use crate::corpus::{Document, Polarity, SentimentLexicon, Vocabulary, NEGATIVE, POSITIVE};
use crate::error::{Error, Result};
use crate::model::{Mode, ModelParams};

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub label: usize,
    pub probs: Vec<f64>,
}

/// p(s | h) evaluated at the hidden probabilities p(h | v); the label is the
/// most probable class, lowest index on ties.
pub fn classify_sentiment(params: &ModelParams, doc: &Document) -> Result<Classification> {
    if params.mode() != Mode::Joint {
        return Err(Error::Mode {
            expected: "joint",
            hint: "classification needs a model trained with a sentiment layer",
        });
    }
    let h = params.hidden_given_v(doc)?;
    let probs = params.sentiment_softmax(h.as_slice().unwrap())?.to_vec();
    let mut label = 0;
    for (l, &p) in probs.iter().enumerate() {
        if p > probs[label] {
            label = l;
        }
    }
    Ok(Classification { label, probs })
}

/// Lexicon word-count classifier.
#[derive(Debug, Clone)]
pub struct CountBaseline {
    polarity: Vec<Option<Polarity>>,
    tie: usize,
}

impl CountBaseline {
    /// Ties go to the negative class.
    pub fn new(vocab: &Vocabulary, lex: &SentimentLexicon) -> Self {
        CountBaseline {
            polarity: lex.polarity_map(vocab),
            tie: NEGATIVE,
        }
    }

    pub fn with_tie_label(mut self, label: usize) -> Self {
        self.tie = label;
        self
    }

    pub fn predict(&self, doc: &Document) -> usize {
        let (mut pos, mut neg) = (0u64, 0u64);
        for (k, n) in doc.nonzeros() {
            match self.polarity.get(k).copied().flatten() {
                Some(Polarity::Positive) => pos += n as u64,
                Some(Polarity::Negative) => neg += n as u64,
                None => {}
            }
        }
        match pos.cmp(&neg) {
            std::cmp::Ordering::Greater => POSITIVE,
            std::cmp::Ordering::Less => NEGATIVE,
            std::cmp::Ordering::Equal => self.tie,
        }
    }
}

/// Token-weighted majority of positive over negative lexicon words.
pub fn count_baseline(doc: &Document, vocab: &Vocabulary, lex: &SentimentLexicon) -> usize {
    CountBaseline::new(vocab, lex).predict(doc)
}

/// Fraction of documents whose prediction equals their gold label.
pub fn accuracy(predicted: &[usize], docs: &[Document]) -> Result<f64> {
    if predicted.len() != docs.len() || docs.is_empty() {
        return Err(Error::InvalidInput("accuracy needs one prediction per document".into()));
    }
    let mut right = 0usize;
    for (p, d) in predicted.iter().zip(docs) {
        let gold = d
            .sentiment
            .ok_or_else(|| Error::InvalidInput("accuracy needs gold sentiment labels".into()))?;
        right += usize::from(*p == gold);
    }
    Ok(right as f64 / docs.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationRow {
    pub doc_id: usize,
    pub gold: Option<usize>,
    pub predicted: usize,
    pub probs: Vec<f64>,
}

/// `doc_id,gold,predicted,prob_pos,prob_neg` (or `prob_0..` for other class
/// counts). Missing gold labels are written as `-`.
pub fn classification_csv(rows: &[ClassificationRow]) -> String {
    let s = rows.first().map_or(2, |r| r.probs.len());
    let mut out = String::from("doc_id,gold,predicted");
    if s == 2 {
        out.push_str(",prob_pos,prob_neg");
    } else {
        for l in 0..s {
            let _ = write!(out, ",prob_{l}");
        }
    }
    out.push('\n');
    for r in rows {
        let gold = r.gold.map_or("-".to_string(), |g| g.to_string());
        let _ = write!(out, "{},{},{}", r.doc_id, gold, r.predicted);
        for p in &r.probs {
            let _ = write!(out, ",{p}");
        }
        out.push('\n');
    }
    out
}
