use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use log::warn;
use rayon::prelude::*;

use super::ais::{ais_log_z, ais_log_z_clamped, AisSettings};
use super::partition::{exact_log_z, exact_log_z_clamped, label_of, PartitionEstimate};
use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::model::{onehot, Mode, ModelParams};

/// How the sentiment layer of a joint model is treated when scoring p(v).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Conditioning {
    /// Sum the sentiment layer out: p(v) = Σ_s p(v, s).
    #[default]
    Marginal,
    /// Condition on each document's gold label: p(v | s).
    GoldLabel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    Exact,
    Ais(AisSettings),
}

/// Number of lengths estimated when bucketing is on.
pub const BUCKETS: usize = 32;

/// Up to `n` distinct integer lengths spaced geometrically over `[lo, hi]`.
pub fn bucket_lengths(lo: usize, hi: usize, n: usize) -> Vec<usize> {
    let lo = lo.max(1);
    if hi <= lo || n < 2 {
        return vec![lo, hi.max(lo)].into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let set: BTreeSet<usize> = (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp().round() as usize)
        .chain([lo, hi])
        .collect();
    set.into_iter().collect()
}

/// log Z by document length (and clamped sentiment, for gold-label scoring).
#[derive(Debug, Clone, Default)]
pub struct PartitionTable {
    entries: BTreeMap<(usize, Option<usize>), PartitionEstimate>,
    interpolate: bool,
}

impl PartitionTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, estimate: PartitionEstimate) {
        self.entries
            .insert((estimate.base_doc_length, estimate.sentiment), estimate);
    }

    pub fn entries(&self) -> impl Iterator<Item = &PartitionEstimate> {
        self.entries.values()
    }

    /// Estimates every length needed to score `docs`. With `bucketing`, only
    /// [`BUCKETS`] geometrically spaced lengths are estimated and the rest are
    /// linearly interpolated in log Z.
    pub fn build(
        params: &ModelParams,
        docs: &[Document],
        estimator: &Estimator,
        conditioning: Conditioning,
        bucketing: bool,
    ) -> Result<Self> {
        let lengths: BTreeSet<usize> = docs.iter().map(Document::length).filter(|&d| d > 0).collect();
        let mut targets: Vec<usize> = lengths.iter().copied().collect();
        if bucketing && targets.len() > BUCKETS {
            targets = bucket_lengths(targets[0], *targets.last().unwrap(), BUCKETS);
        }
        let clamps: Vec<Option<usize>> = match (params.mode(), conditioning) {
            (Mode::Joint, Conditioning::GoldLabel) => (0..params.sentiment_size()).map(Some).collect(),
            _ => vec![None],
        };
        let mut table = PartitionTable {
            entries: BTreeMap::new(),
            interpolate: bucketing,
        };
        for &d in &targets {
            for &clamp in &clamps {
                let est = match (estimator, clamp) {
                    (Estimator::Exact, None) => exact_log_z(params, d)?,
                    (Estimator::Exact, Some(l)) => exact_log_z_clamped(params, d, l)?,
                    (Estimator::Ais(s), None) => ais_log_z(params, d, s)?,
                    (Estimator::Ais(s), Some(l)) => ais_log_z_clamped(params, d, l, s)?,
                };
                table.insert(est);
            }
        }
        Ok(table)
    }

    pub fn log_z(&self, length: usize, sentiment: Option<usize>) -> Result<f64> {
        if let Some(e) = self.entries.get(&(length, sentiment)) {
            return Ok(e.log_z);
        }
        if !self.interpolate {
            return Err(Error::MissingLength(length));
        }
        let below = self
            .entries
            .range((0, sentiment)..(length, sentiment))
            .rev()
            .find(|((_, s), _)| *s == sentiment);
        let above = self
            .entries
            .range((length, sentiment)..)
            .find(|((_, s), _)| *s == sentiment);
        match (below, above) {
            (Some(((d0, _), e0)), Some(((d1, _), e1))) => {
                let t = (length - d0) as f64 / (d1 - d0) as f64;
                Ok(e0.log_z + t * (e1.log_z - e0.log_z))
            }
            _ => Err(Error::MissingLength(length)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerplexityReport {
    pub per_doc_log_p: Vec<f64>,
    pub doc_lengths: Vec<usize>,
    pub total_words: usize,
    pub perplexity: f64,
}

impl PerplexityReport {
    fn from_parts(per_doc_log_p: Vec<f64>, doc_lengths: Vec<usize>) -> Self {
        let total_words: usize = doc_lengths.iter().sum();
        let perplexity = (-per_doc_log_p.iter().sum::<f64>() / total_words as f64).exp();
        PerplexityReport {
            per_doc_log_p,
            doc_lengths,
            total_words,
            perplexity,
        }
    }

    /// `doc_id,length,log_p` rows followed by a `# perplexity=` summary line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("doc_id,length,log_p\n");
        for (i, (lp, d)) in self.per_doc_log_p.iter().zip(&self.doc_lengths).enumerate() {
            let _ = writeln!(out, "{i},{d},{lp}");
        }
        let _ = writeln!(out, "# perplexity={}", self.perplexity);
        out
    }
}

/// exp(−Σ log p(v_n) / Σ D_n) over the non-empty documents.
///
/// `log p(v)` is the probability of the document's word sequence:
/// `log Σ_s e^{F(v,s)} − log Z(D)` (or `F(v, s_gold) − log Z_s(D)` under
/// [`Conditioning::GoldLabel`]).
pub fn perplexity(
    params: &ModelParams,
    docs: &[Document],
    table: &PartitionTable,
    conditioning: Conditioning,
) -> Result<PerplexityReport> {
    let skipped = docs.iter().filter(|d| d.is_empty()).count();
    if skipped > 0 {
        warn!("perplexity: skipping {skipped} empty documents");
    }
    let scored: Vec<&Document> = docs.iter().filter(|d| !d.is_empty()).collect();
    if scored.is_empty() {
        return Err(Error::InvalidInput("no non-empty documents to score".into()));
    }
    let log_p = scored
        .par_iter()
        .map(|doc| doc_log_p(params, doc, table, conditioning))
        .collect::<Result<Vec<f64>>>()?;
    Ok(PerplexityReport::from_parts(
        log_p,
        scored.iter().map(|d| d.length()).collect(),
    ))
}

fn doc_log_p(params: &ModelParams, doc: &Document, table: &PartitionTable, conditioning: Conditioning) -> Result<f64> {
    match (params.mode(), conditioning) {
        (Mode::Joint, Conditioning::GoldLabel) => {
            let l = label_of(params, doc)?;
            let f = params.free_energy(doc, onehot(params.sentiment_size(), l).as_slice().unwrap())?;
            Ok(f - table.log_z(doc.length(), Some(l))?)
        }
        _ => Ok(params.marginal_free_energy(doc)? - table.log_z(doc.length(), None)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn docs() -> Vec<Document> {
        vec![
            Document::from_counts(vec![1, 0, 2]).with_sentiment(0),
            Document::from_counts(vec![0, 1, 0]).with_sentiment(1),
            Document::from_counts(vec![2, 1, 1]).with_sentiment(1),
        ]
    }

    #[test]
    fn zero_model_perplexity_is_vocab_size() {
        for s in [0, 2] {
            let p = ModelParams::zeros(3, 4, s);
            for cond in [Conditioning::Marginal, Conditioning::GoldLabel] {
                let t = PartitionTable::build(&p, &docs(), &Estimator::Exact, cond, false).unwrap();
                let r = perplexity(&p, &docs(), &t, cond).unwrap();
                assert_relative_eq!(r.perplexity, 3.0, max_relative = 1e-12);
                assert_eq!(r.total_words, 8);
            }
        }
    }

    #[test]
    fn report_fields_reproduce_perplexity() {
        let mut p = ModelParams::zeros(3, 2, 2);
        p.w[[0, 1]] = 0.7;
        p.a[2] = -0.3;
        let t = PartitionTable::build(&p, &docs(), &Estimator::Exact, Conditioning::Marginal, false).unwrap();
        let r = perplexity(&p, &docs(), &t, Conditioning::Marginal).unwrap();
        let again = (-r.per_doc_log_p.iter().sum::<f64>() / r.total_words as f64).exp();
        assert_eq!(again, r.perplexity);
        assert!(r.to_csv().starts_with("doc_id,length,log_p\n0,3,"));
    }

    #[test]
    fn missing_length_is_an_error() {
        let p = ModelParams::zeros(3, 2, 0);
        let t = PartitionTable::build(&p, &docs()[..1], &Estimator::Exact, Conditioning::Marginal, false).unwrap();
        assert!(matches!(
            perplexity(&p, &docs(), &t, Conditioning::Marginal),
            Err(Error::MissingLength(1))
        ));
    }

    #[test]
    fn repeated_document_scores_identically() {
        let mut p = ModelParams::zeros(3, 2, 2);
        p.w[[1, 0]] = -0.4;
        let d = vec![docs()[2].clone(), docs()[2].clone()];
        let t = PartitionTable::build(&p, &d, &Estimator::Exact, Conditioning::Marginal, false).unwrap();
        let r = perplexity(&p, &d, &t, Conditioning::Marginal).unwrap();
        assert_eq!(r.per_doc_log_p[0], r.per_doc_log_p[1]);
    }

    #[test]
    fn buckets_cover_range() {
        let b = bucket_lengths(10, 1000, 32);
        assert_eq!(b[0], 10);
        assert_eq!(*b.last().unwrap(), 1000);
        assert!(b.len() <= 34);
        assert_eq!(bucket_lengths(5, 5, 32), vec![5]);
    }

    #[test]
    fn interpolation_between_buckets() {
        let mut t = PartitionTable {
            interpolate: true,
            ..Default::default()
        };
        for (d, z) in [(10, 1.0), (20, 3.0)] {
            t.insert(PartitionEstimate {
                log_z: z,
                method: super::super::Method::Exact,
                ais_runs: 0,
                log_z_stderr: 0.0,
                base_doc_length: d,
                sentiment: None,
            });
        }
        assert_relative_eq!(t.log_z(15, None).unwrap(), 2.0);
        assert!(t.log_z(25, None).is_err());
    }
}
