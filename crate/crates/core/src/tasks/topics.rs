use std::fmt::Write as _;

use log::warn;

use crate::corpus::{lexicon_intersection, LexiconIntersection, Polarity, SentimentLexicon, Vocabulary, NEGATIVE, POSITIVE};
use crate::error::{Error, Result};
use crate::model::{Mode, ModelParams};

#[derive(Debug, Clone, PartialEq)]
pub struct TopicRow {
    pub topic: usize,
    pub positive_mass: f64,
    pub negative_mass: f64,
    pub tag: Option<Polarity>,
    /// Whether the sentiment-layer weights agree with the tag (tagged topics only).
    pub agrees: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicSentimentReport {
    pub per_topic: Vec<TopicRow>,
    /// Fraction of tagged topics whose sentiment weights agree with the tag.
    pub precision: f64,
    /// Topics tagged on each side: 5, or ⌊H/2⌋ for fewer than 10 hidden units.
    pub tagged_per_side: usize,
    /// All positive-minus-negative differences are equal, so the ordering is
    /// pure index order.
    pub degenerate: bool,
}

impl TopicSentimentReport {
    /// `topic,positive_mass,negative_mass,tag,agrees` rows and a `# precision=` line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("topic,positive_mass,negative_mass,tag,agrees\n");
        for r in &self.per_topic {
            let tag = match r.tag {
                Some(Polarity::Positive) => "positive",
                Some(Polarity::Negative) => "negative",
                None => "",
            };
            let agrees = r.agrees.map_or(String::new(), |a| a.to_string());
            let _ = writeln!(out, "{},{},{},{tag},{agrees}", r.topic, r.positive_mass, r.negative_mass);
        }
        let _ = writeln!(out, "# precision={}", self.precision);
        if self.degenerate {
            out.push_str("# degenerate=true\n");
        }
        out
    }
}

/// Step 1: Σ W_kj over the positive and over the negative shared words, per topic j.
pub fn topic_masses(params: &ModelParams, lex: &LexiconIntersection) -> Vec<(f64, f64)> {
    (0..params.hidden_size())
        .map(|j| {
            let pos = lex.positive.iter().map(|&k| params.w[[k, j]]).sum();
            let neg = lex.negative.iter().map(|&k| params.w[[k, j]]).sum();
            (pos, neg)
        })
        .collect()
}

/// Step 2: topics by positive minus negative mass, largest first, ties by index.
pub fn rank_topics(masses: &[(f64, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..masses.len()).collect();
    order.sort_by(|&i, &j| {
        let (di, dj) = (masses[i].0 - masses[i].1, masses[j].0 - masses[j].1);
        dj.total_cmp(&di).then(i.cmp(&j))
    });
    order
}

/// Step 3: the first `per_side` ranked topics are positive, the last `per_side` negative.
pub fn assign_tags(order: &[usize], per_side: usize) -> Vec<Option<Polarity>> {
    let mut tags = vec![None; order.len()];
    let per_side = per_side.min(order.len() / 2);
    for &j in &order[..per_side] {
        tags[j] = Some(Polarity::Positive);
    }
    for &j in &order[order.len() - per_side..] {
        tags[j] = Some(Polarity::Negative);
    }
    tags
}

/// Step 4: a positive tag agrees when U_pos,j > U_neg,j, a negative tag when U_neg,j > U_pos,j.
pub fn check_agreement(params: &ModelParams, tags: &[Option<Polarity>]) -> Vec<Option<bool>> {
    tags.iter()
        .enumerate()
        .map(|(j, t)| {
            let (up, un) = (params.u[[POSITIVE, j]], params.u[[NEGATIVE, j]]);
            t.map(|p| match p {
                Polarity::Positive => up > un,
                Polarity::Negative => un > up,
            })
        })
        .collect()
}

/// Tags hidden units as positive or negative topics from their weights on
/// lexicon words and scores the tags against the sentiment-layer weights.
pub fn topic_sentiment_report(
    params: &ModelParams,
    vocab: &Vocabulary,
    lex: &SentimentLexicon,
) -> Result<TopicSentimentReport> {
    if params.mode() != Mode::Joint || params.sentiment_size() < 2 {
        return Err(Error::Mode {
            expected: "joint",
            hint: "topic tagging compares against positive and negative sentiment weights",
        });
    }
    if vocab.len() != params.vocab_size() {
        return Err(Error::dim(format!(
            "vocabulary has {} words but the model has K = {}",
            vocab.len(),
            params.vocab_size()
        )));
    }
    let shared = lexicon_intersection(vocab, lex);
    if shared.positive.is_empty() || shared.negative.is_empty() {
        return Err(Error::InvalidInput(
            "the vocabulary shares no positive or no negative word with the lexicon".into(),
        ));
    }
    let h = params.hidden_size();
    let per_side = if h >= 10 { 5 } else { h / 2 };
    if h < 10 {
        warn!("only {h} hidden units: tagging {per_side} topics per side");
    }
    let masses = topic_masses(params, &shared);
    let order = rank_topics(&masses);
    let tags = assign_tags(&order, per_side);
    let agrees = check_agreement(params, &tags);
    let diffs: Vec<f64> = masses.iter().map(|(p, n)| p - n).collect();
    let degenerate = diffs.iter().all(|&d| d == diffs[0]);
    let tagged = agrees.iter().flatten().count();
    let precision = if tagged == 0 {
        0.0
    } else {
        agrees.iter().flatten().filter(|&&a| a).count() as f64 / tagged as f64
    };
    let per_topic = masses
        .iter()
        .enumerate()
        .map(|(j, &(positive_mass, negative_mass))| TopicRow {
            topic: j,
            positive_mass,
            negative_mass,
            tag: tags[j],
            agrees: agrees[j],
        })
        .collect();
    Ok(TopicSentimentReport {
        per_topic,
        precision,
        tagged_per_side: per_side,
        degenerate,
    })
}
