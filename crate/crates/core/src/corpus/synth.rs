use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, WeightedIndex};

use super::{Corpus, Document, SentimentLexicon, Split, Vocabulary};
use crate::error::{Error, Result};
use crate::rng::{self, Stream};

/// Parameters of a synthetic topic/sentiment mixture.
///
/// The vocabulary is cut into one block of sentiment-bearing words per class
/// (the first `sentiment_fraction` of the words) and one block per topic (the
/// rest). A document of topic `t` and class `l` draws its words i.i.d. with
/// weight `1 + topic_strength` on topic-`t` words, `1 + skew` on class-`l`
/// words and `1` elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub vocab_size: usize,
    pub sentiments: usize,
    pub topics: usize,
    pub docs_per_class: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub skew: f64,
    pub topic_strength: f64,
    pub sentiment_fraction: f64,
    pub test_fraction: f64,
    /// Share of each polar block listed in [`synth_lexicon`].
    pub lexicon_coverage: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            vocab_size: 200,
            sentiments: 2,
            topics: 2,
            docs_per_class: 300,
            min_len: 20,
            max_len: 40,
            skew: 4.0,
            topic_strength: 4.0,
            sentiment_fraction: 0.2,
            test_fraction: 1.0 / 3.0,
            lexicon_coverage: 0.2,
        }
    }
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.topics == 0 || self.vocab_size < self.topics {
            return bad(format!(
                "vocabulary of {} cannot hold {} topics",
                self.vocab_size, self.topics
            ));
        }
        if self.sentiments == 0 || self.docs_per_class == 0 {
            return bad("need at least one sentiment class and one document per class".into());
        }
        if self.min_len == 0 || self.min_len > self.max_len {
            return bad(format!("invalid length range [{}, {}]", self.min_len, self.max_len));
        }
        if !(0.0..=1.0).contains(&self.test_fraction) || !(0.0..=1.0).contains(&self.lexicon_coverage) {
            return bad("fractions must lie in [0, 1]".into());
        }
        if !(0.0..1.0).contains(&self.sentiment_fraction) || self.skew < 0.0 || self.topic_strength < 0.0 {
            return bad("invalid sentiment_fraction, skew or topic_strength".into());
        }
        if self.vocab_size - self.sentiment_words() < self.topics {
            return bad(format!(
                "only {} topic words left for {} topics",
                self.vocab_size - self.sentiment_words(),
                self.topics
            ));
        }
        Ok(())
    }

    fn sentiment_block(&self) -> usize {
        (self.vocab_size as f64 * self.sentiment_fraction / self.sentiments as f64).floor() as usize
    }

    fn sentiment_words(&self) -> usize {
        self.sentiment_block() * self.sentiments
    }

    /// Sentiment class owning word `k`, if any.
    pub fn sentiment_of(&self, k: usize) -> Option<usize> {
        let block = self.sentiment_block();
        (block > 0 && k < self.sentiment_words()).then(|| k / block)
    }

    /// Topic owning word `k`, if any.
    pub fn topic_of(&self, k: usize) -> Option<usize> {
        let start = self.sentiment_words();
        if k < start {
            return None;
        }
        let region = self.vocab_size - start;
        Some(((k - start) * self.topics / region).min(self.topics - 1))
    }

    /// Unnormalized word weights for topic `t` and class `l`.
    pub fn word_weights(&self, topic: usize, class: usize) -> Vec<f64> {
        (0..self.vocab_size)
            .map(|k| {
                let mut w = 1.0;
                if self.topic_of(k) == Some(topic) {
                    w += self.topic_strength;
                }
                if self.sentiment_of(k) == Some(class) {
                    w += self.skew;
                }
                w
            })
            .collect()
    }

    pub fn vocabulary(&self) -> Vocabulary {
        let words = (0..self.vocab_size)
            .map(|k| match (self.sentiment_of(k), self.topic_of(k)) {
                (Some(l), _) => format!("s{l}_{k:04}"),
                (_, Some(t)) => format!("t{t}_{k:04}"),
                _ => unreachable!("every word belongs to a sentiment or topic block"),
            })
            .collect();
        Vocabulary::new(words).expect("synthetic words are unique")
    }
}

/// Samples a labeled corpus from the mixture. Topics cycle within each class,
/// so every class sees the same topic proportions; the test split is drawn
/// per class.
pub fn synth_corpus(spec: &SynthSpec, seed: u64) -> Result<Corpus> {
    spec.validate()?;
    let mut sampler = rng::stream(seed, Stream::Synth);
    let mut split_rng = rng::stream(seed, Stream::Split);
    let n_test = (spec.docs_per_class as f64 * spec.test_fraction).round() as usize;

    let mut documents = Vec::with_capacity(spec.docs_per_class * spec.sentiments);
    let mut split = Vec::with_capacity(documents.capacity());
    for class in 0..spec.sentiments {
        let dists: Vec<WeightedIndex<f64>> = (0..spec.topics)
            .map(|t| WeightedIndex::new(spec.word_weights(t, class)).expect("weights are positive"))
            .collect();
        for i in 0..spec.docs_per_class {
            let topic = i % spec.topics;
            let len = sampler.gen_range(spec.min_len..=spec.max_len);
            let words = (0..len).map(|_| dists[topic].sample(&mut sampler));
            let doc = Document::from_word_indices(spec.vocab_size, words)?
                .with_sentiment(class)
                .with_topic(topic);
            documents.push(doc);
        }
        let mut order: Vec<usize> = (0..spec.docs_per_class).collect();
        order.shuffle(&mut split_rng);
        let mut class_split = vec![Split::Train; spec.docs_per_class];
        for &i in &order[..n_test] {
            class_split[i] = Split::Test;
        }
        split.extend(class_split);
    }
    Corpus::new(spec.vocabulary(), documents, split)
}

/// Lexicon listing the first `lexicon_coverage` share of the positive
/// (class 0) and negative (class 1) sentiment blocks.
pub fn synth_lexicon(spec: &SynthSpec) -> Result<SentimentLexicon> {
    spec.validate()?;
    let vocab = spec.vocabulary();
    let block = spec.sentiment_block();
    let take = (block as f64 * spec.lexicon_coverage).ceil() as usize;
    let mut lex = SentimentLexicon::new();
    for (class, weights) in [(0usize, [0.0, 1.0, 0.0]), (1, [0.0, 0.0, 1.0])] {
        if class >= spec.sentiments {
            break;
        }
        for k in class * block..class * block + take.min(block) {
            lex.insert(vocab.word(k), weights)?;
        }
    }
    Ok(lex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Polarity, NEGATIVE, POSITIVE};
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn small() -> SynthSpec {
        SynthSpec {
            vocab_size: 50,
            sentiments: 2,
            topics: 2,
            docs_per_class: 100,
            min_len: 20,
            max_len: 40,
            ..SynthSpec::default()
        }
    }

    #[test]
    fn balanced_labels_and_lengths() {
        let c = synth_corpus(&small(), 3).unwrap();
        assert_eq!(c.len(), 200);
        for label in 0..2 {
            assert_eq!(c.documents().iter().filter(|d| d.sentiment == Some(label)).count(), 100);
        }
        assert!(c.documents().iter().all(|d| (20..=40).contains(&d.length())));
        assert_eq!(c.test().len(), 2 * 33);
    }

    #[test]
    fn same_seed_same_corpus() {
        let a = synth_corpus(&small(), 11).unwrap();
        let b = synth_corpus(&small(), 11).unwrap();
        assert_eq!(a.documents(), b.documents());
        assert_eq!(a.splits(), b.splits());
        let c = synth_corpus(&small(), 12).unwrap();
        assert_ne!(a.documents(), c.documents());
    }

    #[test]
    fn infeasible_specs_are_rejected() {
        let spec = SynthSpec {
            vocab_size: 3,
            topics: 5,
            ..small()
        };
        assert!(synth_corpus(&spec, 0).is_err());
        let spec = SynthSpec {
            min_len: 0,
            ..small()
        };
        assert!(synth_corpus(&spec, 0).is_err());
    }

    #[test]
    fn zero_skew_classes_share_word_distribution() {
        let spec = SynthSpec {
            skew: 0.0,
            docs_per_class: 500,
            ..small()
        };
        let c = synth_corpus(&spec, 5).unwrap();
        let k = spec.vocab_size;
        let mut table = vec![vec![0f64; k]; 2];
        for d in c.documents() {
            for (w, n) in d.nonzeros() {
                table[d.sentiment.unwrap()][w] += n as f64;
            }
        }
        let rows: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
        assert!(rows.iter().all(|&r| r >= 10_000.0));
        let total: f64 = rows.iter().sum();
        let mut stat = 0.0;
        let mut dof = 0;
        for w in 0..k {
            let col = table[0][w] + table[1][w];
            if col == 0.0 {
                continue;
            }
            dof += 1;
            for r in 0..2 {
                let expected = rows[r] * col / total;
                stat += (table[r][w] - expected).powi(2) / expected;
            }
        }
        let p = 1.0 - ChiSquared::new((dof - 1) as f64).unwrap().cdf(stat);
        assert!(p > 0.01, "chi-squared p = {p}");
    }

    #[test]
    fn positive_skew_shifts_sentiment_words() {
        let spec = small();
        let c = synth_corpus(&spec, 2).unwrap();
        // share of class-`block` words among documents labeled `label`
        let share = |label: usize, block: usize| {
            let (mut hit, mut all) = (0u32, 0u32);
            for d in c.documents().iter().filter(|d| d.sentiment == Some(label)) {
                for (w, n) in d.nonzeros() {
                    all += n;
                    if spec.sentiment_of(w) == Some(block) {
                        hit += n;
                    }
                }
            }
            hit as f64 / all as f64
        };
        // weights 25 vs 5 out of 150
        assert!(share(0, 0) > 3.0 * share(0, 1));
        assert!(share(1, 1) > 3.0 * share(1, 0));
    }

    #[test]
    fn lexicon_covers_polar_blocks() {
        let spec = small();
        let lex = synth_lexicon(&spec).unwrap();
        let vocab = spec.vocabulary();
        assert_eq!(lex.count(Polarity::Positive), 1);
        assert_eq!(lex.count(Polarity::Negative), 1);
        for w in lex.words() {
            let k = vocab.get(w).unwrap();
            let expected = match lex.polarity(w).unwrap() {
                Polarity::Positive => POSITIVE,
                Polarity::Negative => NEGATIVE,
            };
            assert_eq!(spec.sentiment_of(k), Some(expected));
        }
    }
}
