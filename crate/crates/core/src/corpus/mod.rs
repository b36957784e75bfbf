//! Documents, vocabularies, sentiment lexicons and corpus construction.

mod datasets;
pub mod io;
mod lexicon;
mod synth;
mod text;
mod vocab;

pub use datasets::{build_mrmds, derive_sentiment_tags, MrmdsSpec, MRMDS_TOPICS};
pub use lexicon::{lexicon_intersection, LexiconIntersection, Polarity, SentimentLexicon};
pub use synth::{synth_corpus, synth_lexicon, SynthSpec};
pub use text::{preprocess, PreprocessConfig, StemmerKind};
pub use vocab::{build_vocabulary, vectorize, Vocabulary};

use crate::error::{Error, Result};

/// Sentiment index of the positive class.
pub const POSITIVE: usize = 0;
/// Sentiment index of the negative class.
pub const NEGATIVE: usize = 1;

/// A bag-of-words document: word counts over a fixed vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    counts: Vec<u32>,
    length: u32,
    pub sentiment: Option<usize>,
    pub topic: Option<usize>,
}

impl Document {
    pub fn from_counts(counts: Vec<u32>) -> Self {
        let length = counts.iter().sum();
        Document {
            counts,
            length,
            sentiment: None,
            topic: None,
        }
    }

    /// Builds a document of size `k` from word indices (order is discarded).
    pub fn from_word_indices(k: usize, words: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut counts = vec![0u32; k];
        for w in words {
            *counts
                .get_mut(w)
                .ok_or_else(|| Error::dim(format!("word index {w} outside vocabulary of {k}")))? += 1;
        }
        Ok(Self::from_counts(counts))
    }

    pub fn with_sentiment(mut self, label: usize) -> Self {
        self.sentiment = Some(label);
        self
    }

    pub fn with_topic(mut self, topic: usize) -> Self {
        self.topic = Some(topic);
        self
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn vocab_size(&self) -> usize {
        self.counts.len()
    }

    /// Total number of words D.
    pub fn length(&self) -> usize {
        self.length as usize
    }

    /// True when no in-vocabulary word survived vectorization.
    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    /// `(word index, count)` for every word present.
    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| (k, c))
    }

    /// Word indices with multiplicity, in ascending index order.
    pub fn word_indices(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.length());
        for (k, c) in self.nonzeros() {
            out.extend(std::iter::repeat(k).take(c as usize));
        }
        out
    }

    /// Regenerates a token list from the counts.
    pub fn detokenize(&self, vocab: &Vocabulary) -> Vec<String> {
        self.word_indices()
            .into_iter()
            .map(|k| vocab.word(k).to_string())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

/// Documents over a shared vocabulary, each assigned to the train or test split.
#[derive(Debug, Clone)]
pub struct Corpus {
    vocabulary: Vocabulary,
    documents: Vec<Document>,
    split: Vec<Split>,
}

impl Corpus {
    pub fn new(vocabulary: Vocabulary, documents: Vec<Document>, split: Vec<Split>) -> Result<Self> {
        if documents.len() != split.len() {
            return Err(Error::dim(format!(
                "{} documents but {} split assignments",
                documents.len(),
                split.len()
            )));
        }
        let k = vocabulary.len();
        if let Some((i, d)) = documents.iter().enumerate().find(|(_, d)| d.vocab_size() != k) {
            return Err(Error::dim(format!(
                "document {i} has {} counts, vocabulary has {k} words",
                d.vocab_size()
            )));
        }
        Ok(Corpus {
            vocabulary,
            documents,
            split,
        })
    }

    /// Corpus from separate train and test document lists.
    pub fn from_parts(vocabulary: Vocabulary, train: Vec<Document>, test: Vec<Document>) -> Result<Self> {
        let split = std::iter::repeat(Split::Train)
            .take(train.len())
            .chain(std::iter::repeat(Split::Test).take(test.len()))
            .collect();
        let mut documents = train;
        documents.extend(test);
        Self::new(vocabulary, documents, split)
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn splits(&self) -> &[Split] {
        &self.split
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn train(&self) -> Vec<&Document> {
        self.select(Split::Train)
    }

    pub fn test(&self) -> Vec<&Document> {
        self.select(Split::Test)
    }

    fn select(&self, which: Split) -> Vec<&Document> {
        self.documents
            .iter()
            .zip(&self.split)
            .filter(|(_, &s)| s == which)
            .map(|(d, _)| d)
            .collect()
    }

    pub fn into_parts(self) -> (Vocabulary, Vec<Document>, Vec<Split>) {
        (self.vocabulary, self.documents, self.split)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn length_is_sum_of_counts() {
        let d = Document::from_counts(vec![2, 0, 3]);
        assert_eq!(d.length(), 5);
        assert_eq!(d.nonzeros().collect::<Vec<_>>(), vec![(0, 2), (2, 3)]);
        assert!(Document::from_counts(vec![0, 0]).is_empty());
    }

    #[test]
    fn corpus_rejects_mismatched_documents() {
        let v = Vocabulary::new(vec!["a".into(), "b".into()]).unwrap();
        let err = Corpus::from_parts(v, vec![Document::from_counts(vec![1, 2, 3])], vec![]);
        assert!(matches!(err, Err(Error::Dimension(_))));
    }

    #[test]
    fn train_and_test_partition_documents() {
        let v = Vocabulary::new(vec!["a".into()]).unwrap();
        let c = Corpus::from_parts(
            v,
            vec![Document::from_counts(vec![1]), Document::from_counts(vec![2])],
            vec![Document::from_counts(vec![3])],
        )
        .unwrap();
        assert_eq!(c.train().len() + c.test().len(), c.len());
        assert_eq!(c.test()[0].length(), 3);
    }

    proptest! {
        #[test]
        fn detokenize_then_vectorize_round_trips(counts in prop::collection::vec(0u32..5, 1..8)) {
            let words: Vec<String> = (0..counts.len()).map(|i| format!("w{i}")).collect();
            let vocab = Vocabulary::new(words).unwrap();
            let doc = Document::from_counts(counts);
            let again = vectorize(&doc.detokenize(&vocab), &vocab);
            prop_assert_eq!(again.counts(), doc.counts());
        }
    }
}
