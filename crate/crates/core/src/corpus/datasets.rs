use log::info;
use rand::seq::SliceRandom;

use super::{Corpus, Document, Polarity, SentimentLexicon, NEGATIVE, POSITIVE};
use crate::error::{Error, Result};
use crate::rng::{self, Stream};

/// Topic labels of the merged review corpus, in source order.
pub const MRMDS_TOPICS: [&str; 5] = ["movie", "book", "dvd", "electronics", "kitchen"];

/// Labels each document by the majority polarity of its lexicon words,
/// weighted by counts. Documents with equal positive and negative counts
/// (including none at all) are dropped.
pub fn derive_sentiment_tags(corpus: &Corpus, lex: &SentimentLexicon) -> Corpus {
    let polarity = lex.polarity_map(corpus.vocabulary());
    let mut docs = Vec::new();
    let mut split = Vec::new();
    let mut dropped = 0usize;
    for (doc, &s) in corpus.documents().iter().zip(corpus.splits()) {
        let (pos, neg) = polarity_counts(doc, &polarity);
        let label = match pos.cmp(&neg) {
            std::cmp::Ordering::Greater => POSITIVE,
            std::cmp::Ordering::Less => NEGATIVE,
            std::cmp::Ordering::Equal => {
                dropped += 1;
                continue;
            }
        };
        docs.push(doc.clone().with_sentiment(label));
        split.push(s);
    }
    info!("sentiment tagging: labeled {}, dropped {dropped} ties", docs.len());
    Corpus::new(corpus.vocabulary().clone(), docs, split)
        .expect("documents already validated against this vocabulary")
}

/// Token-weighted (positive, negative) lexicon counts.
pub(crate) fn polarity_counts(doc: &Document, polarity: &[Option<Polarity>]) -> (u64, u64) {
    let mut pos = 0u64;
    let mut neg = 0u64;
    for (k, c) in doc.nonzeros() {
        match polarity[k] {
            Some(Polarity::Positive) => pos += c as u64,
            Some(Polarity::Negative) => neg += c as u64,
            None => {}
        }
    }
    (pos, neg)
}

/// Class sizes for the merged review corpus.
#[derive(Debug, Clone, Copy)]
pub struct MrmdsSpec {
    /// Documents of each sentiment class in every source.
    pub per_class: usize,
    /// Of those, how many go to the training split.
    pub train_per_class: usize,
}

impl Default for MrmdsSpec {
    fn default() -> Self {
        MrmdsSpec {
            per_class: 1000,
            train_per_class: 750,
        }
    }
}

/// Merges the movie-review corpus with the four product-review corpora into
/// one five-topic corpus with a split stratified by topic and sentiment.
///
/// Source splits are ignored; every source document is pooled and
/// re-partitioned under `seed`.
pub fn build_mrmds(mr: &Corpus, mds_parts: [&Corpus; 4], spec: MrmdsSpec, seed: u64) -> Result<Corpus> {
    if spec.train_per_class > spec.per_class {
        return Err(Error::InvalidInput(format!(
            "train_per_class {} exceeds per_class {}",
            spec.train_per_class, spec.per_class
        )));
    }
    let sources = std::iter::once(mr).chain(mds_parts);
    let vocab = mr.vocabulary().clone();
    let mut rng = rng::stream(seed, Stream::Split);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (topic, (name, source)) in MRMDS_TOPICS.iter().zip(sources).enumerate() {
        if source.vocabulary() != &vocab {
            return Err(Error::InvalidInput(format!(
                "{name} corpus does not share the merge vocabulary"
            )));
        }
        for (label, label_name) in [(POSITIVE, "positive"), (NEGATIVE, "negative")] {
            let mut docs: Vec<&Document> = source
                .documents()
                .iter()
                .filter(|d| d.sentiment == Some(label))
                .collect();
            if docs.len() != spec.per_class {
                let deficit = spec.per_class as i64 - docs.len() as i64;
                return Err(Error::InvalidInput(format!(
                    "{name} corpus has {} {label_name} documents, needs {} (deficit {deficit})",
                    docs.len(),
                    spec.per_class
                )));
            }
            docs.shuffle(&mut rng);
            for (i, d) in docs.into_iter().enumerate() {
                let d = d.clone().with_topic(topic);
                if i < spec.train_per_class {
                    train.push(d);
                } else {
                    test.push(d);
                }
            }
        }
    }
    Corpus::from_parts(vocab, train, test)
}
