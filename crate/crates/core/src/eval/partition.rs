use std::collections::BTreeMap;

use super::enumerate::{for_each_count_vector, log_multiplicity, num_count_vectors, ENUMERATION_BOUND};
use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::model::{onehot, Mode, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    Ais,
}

/// log Z for documents of one length.
///
/// The energy scales the hidden bias by D, so every length defines its own
/// normalizer. Z sums over word sequences (count vectors weighted by their
/// multinomial multiplicity), sentiment values and hidden states. With
/// `sentiment` set, the sentiment layer is clamped to that value and Z is the
/// normalizer of p(v | s).
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionEstimate {
    pub log_z: f64,
    pub method: Method,
    pub ais_runs: usize,
    pub log_z_stderr: f64,
    pub base_doc_length: usize,
    pub sentiment: Option<usize>,
}

/// Streaming log-sum-exp accumulator.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogSumExp {
    max: f64,
    sum: f64,
}

impl LogSumExp {
    pub(crate) fn new() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub(crate) fn add(&mut self, x: f64) {
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub(crate) fn value(&self) -> f64 {
        self.max + self.sum.ln()
    }
}

/// log Z of the all-zero model: every sequence, sentiment and hidden state has
/// weight one.
pub fn zero_model_log_z(k: usize, h: usize, s: usize, length: usize, clamped: bool) -> f64 {
    let sentiments = if s == 0 || clamped { 1.0 } else { s as f64 };
    length as f64 * (k as f64).ln() + sentiments.ln() + h as f64 * std::f64::consts::LN_2
}

pub(crate) fn check_bound(params: &ModelParams, length: usize, clamped: bool) -> Result<()> {
    let s = if clamped { 1 } else { params.sentiment_size().max(1) } as u128;
    let states = num_count_vectors(params.vocab_size(), length).saturating_mul(s);
    if states > ENUMERATION_BOUND {
        return Err(Error::EnumerationBound {
            states,
            bound: ENUMERATION_BOUND,
        });
    }
    Ok(())
}

/// Exact log Z(D) by enumerating count vectors; hidden units are summed out
/// analytically through the free energy.
pub fn exact_log_z(params: &ModelParams, length: usize) -> Result<PartitionEstimate> {
    exact(params, length, None)
}

/// Exact normalizer of p(v | s) for documents of length D.
pub fn exact_log_z_clamped(params: &ModelParams, length: usize, sentiment: usize) -> Result<PartitionEstimate> {
    if sentiment >= params.sentiment_size() {
        return Err(Error::dim(format!(
            "sentiment {sentiment} outside S = {}",
            params.sentiment_size()
        )));
    }
    exact(params, length, Some(sentiment))
}

fn exact(params: &ModelParams, length: usize, clamp: Option<usize>) -> Result<PartitionEstimate> {
    check_bound(params, length, clamp.is_some())?;
    let k = params.vocab_size();
    let s = params.sentiment_size();
    let labels: Vec<Vec<f64>> = match (params.mode(), clamp) {
        (Mode::Rs, _) => vec![vec![]],
        (Mode::Joint, Some(l)) => vec![onehot(s, l).to_vec()],
        (Mode::Joint, None) => (0..s).map(|l| onehot(s, l).to_vec()).collect(),
    };
    let mut acc = LogSumExp::new();
    let mut failure = None;
    for_each_count_vector(k, length, |counts| {
        let doc = Document::from_counts(counts.to_vec());
        let mult = log_multiplicity(counts);
        for sv in &labels {
            match params.free_energy(&doc, sv) {
                Ok(f) => acc.add(mult + f),
                Err(e) => failure = Some(e),
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(PartitionEstimate {
        log_z: acc.value(),
        method: Method::Exact,
        ais_runs: 0,
        log_z_stderr: 0.0,
        base_doc_length: length,
        sentiment: clamp,
    })
}

/// Σ_n log p(v_n, s_n) with exact partition functions. Joint models read each
/// document's sentiment label; RS models score p(v_n).
pub fn exact_log_likelihood(params: &ModelParams, docs: &[Document]) -> Result<f64> {
    let mut z_cache: BTreeMap<usize, f64> = BTreeMap::new();
    let mut total = 0.0;
    for doc in docs {
        let f = match params.mode() {
            Mode::Rs => params.free_energy(doc, &[])?,
            Mode::Joint => {
                let label = label_of(params, doc)?;
                params.free_energy(doc, onehot(params.sentiment_size(), label).as_slice().unwrap())?
            }
        };
        let log_z = match z_cache.get(&doc.length()) {
            Some(&z) => z,
            None => {
                let z = exact_log_z(params, doc.length())?.log_z;
                z_cache.insert(doc.length(), z);
                z
            }
        };
        total += f - log_z;
    }
    Ok(total)
}

pub(crate) fn label_of(params: &ModelParams, doc: &Document) -> Result<usize> {
    match doc.sentiment {
        Some(l) if l < params.sentiment_size() => Ok(l),
        Some(l) => Err(Error::dim(format!(
            "sentiment label {l} outside S = {}",
            params.sentiment_size()
        ))),
        None => Err(Error::InvalidInput("joint model needs a sentiment label on every document".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    #[test]
    fn zero_model_closed_form() {
        for (k, h, s, d) in [(3, 2, 2, 3), (4, 1, 0, 2), (2, 3, 3, 5)] {
            let p = ModelParams::zeros(k, h, s);
            let z = exact_log_z(&p, d).unwrap();
            assert_relative_eq!(z.log_z, zero_model_log_z(k, h, s, d, false), max_relative = 1e-12);
            assert_eq!(z.method, Method::Exact);
        }
    }

    #[test]
    fn two_word_hand_enumeration() {
        // sequences aa, ab, ba, bb weigh 1, 3, 3, 9
        let mut p = ModelParams::zeros(2, 0, 0);
        p.a = array![0.0, 3f64.ln()];
        assert_relative_eq!(exact_log_z(&p, 2).unwrap().log_z, 16f64.ln(), max_relative = 1e-14);
    }

    #[test]
    fn joint_z_is_sum_of_clamped_z() {
        let mut p = ModelParams::zeros(3, 2, 2);
        p.w = array![[0.3, -0.2], [0.1, 0.5], [-0.4, 0.2]];
        p.u = array![[0.7, -0.1], [-0.3, 0.4]];
        p.c = array![0.2, -0.5];
        p.b = array![0.1, -0.2];
        let z = exact_log_z(&p, 3).unwrap().log_z;
        let parts: Vec<f64> = (0..2).map(|l| exact_log_z_clamped(&p, 3, l).unwrap().log_z).collect();
        assert_relative_eq!(z, crate::model::log_sum_exp(&parts), max_relative = 1e-13);
    }

    #[test]
    fn bound_is_enforced() {
        let p = ModelParams::zeros(200, 2, 2);
        assert!(matches!(exact_log_z(&p, 30), Err(Error::EnumerationBound { .. })));
    }

    #[test]
    fn log_likelihood_needs_labels_for_joint_models() {
        let p = ModelParams::zeros(2, 1, 2);
        let d = Document::from_counts(vec![1, 1]);
        assert!(exact_log_likelihood(&p, &[d.clone()]).is_err());
        let ll = exact_log_likelihood(&p, &[d.with_sentiment(1)]).unwrap();
        // p(v, s) = 1 / (K^D S) for the zero model
        assert_relative_eq!(ll, -(4f64.ln() + 2f64.ln()), max_relative = 1e-12);
    }
}
