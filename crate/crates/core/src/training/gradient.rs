use std::collections::BTreeMap;

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::eval::enumerate::{for_each_count_vector, log_multiplicity};
use crate::eval::exact_log_z;
use crate::model::{onehot, sample_hidden, sample_sentiment, sigmoid, Mode, ModelParams};

/// One Δθ per parameter block, shaped like [`ModelParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub dw: Array2<f64>,
    pub du: Array2<f64>,
    pub da: Array1<f64>,
    pub db: Array1<f64>,
    pub dc: Array1<f64>,
}

impl GradientEstimate {
    pub fn zeros_like(params: &ModelParams) -> Self {
        GradientEstimate {
            dw: Array2::zeros(params.w.dim()),
            du: Array2::zeros(params.u.dim()),
            da: Array1::zeros(params.a.len()),
            db: Array1::zeros(params.b.len()),
            dc: Array1::zeros(params.c.len()),
        }
    }

    pub fn add_scaled(&mut self, other: &GradientEstimate, alpha: f64) {
        self.dw.scaled_add(alpha, &other.dw);
        self.du.scaled_add(alpha, &other.du);
        self.da.scaled_add(alpha, &other.da);
        self.db.scaled_add(alpha, &other.db);
        self.dc.scaled_add(alpha, &other.dc);
    }

    pub fn scale(&mut self, alpha: f64) {
        self.dw *= alpha;
        self.du *= alpha;
        self.da *= alpha;
        self.db *= alpha;
        self.dc *= alpha;
    }

    /// All entries, block by block (W, U, a, b, c), row-major.
    pub fn flatten(&self) -> Vec<f64> {
        self.dw
            .iter()
            .chain(self.du.iter())
            .chain(self.da.iter())
            .chain(self.db.iter())
            .chain(self.dc.iter())
            .copied()
            .collect()
    }

    /// Adds the sufficient statistics of (v, s) at hidden probabilities `h`.
    fn add_statistics(&mut self, doc: &Document, s: &[f64], h: &Array1<f64>, weight: f64) {
        for (k, n) in doc.nonzeros() {
            self.dw.row_mut(k).scaled_add(weight * n as f64, h);
            self.da[k] += weight * n as f64;
        }
        for (l, &sl) in s.iter().enumerate() {
            if sl != 0.0 {
                self.du.row_mut(l).scaled_add(weight * sl, h);
                self.dc[l] += weight * sl;
            }
        }
        self.db.scaled_add(weight * doc.length() as f64, h);
    }
}

fn hidden_probs(params: &ModelParams, doc: &Document, s: &[f64]) -> Result<Array1<f64>> {
    Ok(params.hidden_input(doc, s)?.mapv_into(sigmoid))
}

/// Positive and negative phase of one CD-k chain.
struct Phases {
    h_pos: Array1<f64>,
    doc_neg: Document,
    s_neg: Vec<f64>,
    h_neg: Array1<f64>,
}

fn run_chain<R: Rng + ?Sized>(params: &ModelParams, doc: &Document, s: &[f64], k: usize, rng: &mut R) -> Result<Phases> {
    if doc.is_empty() {
        return Err(Error::InvalidInput("cannot train on an empty document".into()));
    }
    if k == 0 {
        return Err(Error::InvalidInput("CD needs at least one Gibbs step".into()));
    }
    if params.mode() == Mode::Joint && s.iter().filter(|&&x| x != 0.0).count() != 1 {
        return Err(Error::InvalidInput("joint CD needs a one-hot sentiment vector".into()));
    }
    let h_pos = hidden_probs(params, doc, s)?;
    let mut h_sample = sample_hidden(h_pos.as_slice().unwrap(), rng);
    let mut doc_neg = doc.clone();
    let mut s_neg = s.to_vec();
    let mut h_neg = h_pos.clone();
    for step in 0..k {
        let h = h_sample.as_slice().unwrap();
        doc_neg = params.sample_document(h, doc.length(), rng)?;
        if params.mode() == Mode::Joint {
            let probs = params.sentiment_softmax(h)?;
            s_neg = sample_sentiment(probs.as_slice().unwrap(), rng).to_vec();
        }
        h_neg = hidden_probs(params, &doc_neg, &s_neg)?;
        if step + 1 < k {
            h_sample = sample_hidden(h_neg.as_slice().unwrap(), rng);
        }
    }
    Ok(Phases {
        h_pos,
        doc_neg,
        s_neg,
        h_neg,
    })
}

fn l1_distance(a: &Document, b: &Document) -> f64 {
    a.counts()
        .iter()
        .zip(b.counts())
        .map(|(&x, &y)| (x as f64 - y as f64).abs())
        .sum()
}

/// CD-k estimate of ∂ log p(v, s)/∂θ: data statistics at h⁺ = p(h | v, s)
/// minus reconstruction statistics at h⁻ after `k` Gibbs sweeps. Pass an empty
/// `s` for RS models.
pub fn cd_step<R: Rng + ?Sized>(
    params: &ModelParams,
    doc: &Document,
    s: &[f64],
    k: usize,
    rng: &mut R,
) -> Result<GradientEstimate> {
    Ok(cd_step_with_error(params, doc, s, k, rng)?.0)
}

pub(crate) fn cd_step_with_error<R: Rng + ?Sized>(
    params: &ModelParams,
    doc: &Document,
    s: &[f64],
    k: usize,
    rng: &mut R,
) -> Result<(GradientEstimate, f64)> {
    let ph = run_chain(params, doc, s, k, rng)?;
    let mut g = GradientEstimate::zeros_like(params);
    g.add_statistics(doc, s, &ph.h_pos, 1.0);
    g.add_statistics(&ph.doc_neg, &ph.s_neg, &ph.h_neg, -1.0);
    Ok((g, l1_distance(doc, &ph.doc_neg)))
}

/// One CD-k step applied in place, touching only the rows of W and U that the
/// data or the reconstruction activate. Returns the reconstruction error.
pub(crate) fn cd_update_sparse<R: Rng + ?Sized>(
    params: &mut ModelParams,
    doc: &Document,
    s: &[f64],
    k: usize,
    learning_rate: f64,
    rng: &mut R,
) -> Result<f64> {
    let ph = run_chain(params, doc, s, k, rng)?;
    let pos = doc.counts();
    let neg = ph.doc_neg.counts();
    for kk in 0..pos.len() {
        let (vp, vn) = (pos[kk] as f64, neg[kk] as f64);
        if vp == 0.0 && vn == 0.0 {
            continue;
        }
        let mut row = params.w.row_mut(kk);
        for (j, wkj) in row.iter_mut().enumerate() {
            *wkj += learning_rate * (vp * ph.h_pos[j] - vn * ph.h_neg[j]);
        }
        params.a[kk] += learning_rate * (vp - vn);
        if !params.a[kk].is_finite() || row.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { block: "W/a" });
        }
    }
    for l in 0..s.len() {
        let (sp, sn) = (s[l], ph.s_neg[l]);
        if sp == 0.0 && sn == 0.0 {
            continue;
        }
        let mut row = params.u.row_mut(l);
        for (j, ulj) in row.iter_mut().enumerate() {
            *ulj += learning_rate * (sp * ph.h_pos[j] - sn * ph.h_neg[j]);
        }
        params.c[l] += learning_rate * (sp - sn);
        if !params.c[l].is_finite() || row.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { block: "U/c" });
        }
    }
    let d = doc.length() as f64;
    for (j, bj) in params.b.iter_mut().enumerate() {
        *bj += learning_rate * (d * ph.h_pos[j] - d * ph.h_neg[j]);
    }
    if params.b.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { block: "b" });
    }
    Ok(l1_distance(doc, &ph.doc_neg))
}

/// θ ← θ + α·Δθ. Fails, leaving `params` untouched, if any result is not finite.
pub fn apply_update(params: &mut ModelParams, grad: &GradientEstimate, learning_rate: f64) -> Result<()> {
    if grad.dw.dim() != params.w.dim()
        || grad.du.dim() != params.u.dim()
        || grad.da.len() != params.a.len()
        || grad.db.len() != params.b.len()
        || grad.dc.len() != params.c.len()
    {
        return Err(Error::dim("gradient shape does not match parameters"));
    }
    let mut next = params.clone();
    next.w.scaled_add(learning_rate, &grad.dw);
    next.u.scaled_add(learning_rate, &grad.du);
    next.a.scaled_add(learning_rate, &grad.da);
    next.b.scaled_add(learning_rate, &grad.db);
    next.c.scaled_add(learning_rate, &grad.dc);
    if let Some(block) = next.first_non_finite() {
        return Err(Error::NonFinite { block });
    }
    *params = next;
    Ok(())
}

/// Exact ∂/∂θ Σ_n log p(v_n, s_n) (or Σ_n log p(v_n) for RS models) by
/// enumerating the model expectation for every document length. Joint models
/// read each document's sentiment label.
pub fn exact_gradient(params: &ModelParams, docs: &[Document]) -> Result<GradientEstimate> {
    let s = params.sentiment_size();
    let label_vec = |doc: &Document| -> Result<Vec<f64>> {
        match params.mode() {
            Mode::Rs => Ok(Vec::new()),
            Mode::Joint => match doc.sentiment {
                Some(l) if l < s => Ok(onehot(s, l).to_vec()),
                _ => Err(Error::InvalidInput("joint gradient needs a valid label on every document".into())),
            },
        }
    };
    let mut grad = GradientEstimate::zeros_like(params);
    let mut per_length: BTreeMap<usize, usize> = BTreeMap::new();
    for doc in docs {
        let sv = label_vec(doc)?;
        let h = hidden_probs(params, doc, &sv)?;
        grad.add_statistics(doc, &sv, &h, 1.0);
        *per_length.entry(doc.length()).or_default() += 1;
    }
    let labels: Vec<Vec<f64>> = match params.mode() {
        Mode::Rs => vec![Vec::new()],
        Mode::Joint => (0..s).map(|l| onehot(s, l).to_vec()).collect(),
    };
    for (&length, &n) in &per_length {
        let log_z = exact_log_z(params, length)?.log_z;
        let mut failure = None;
        for_each_count_vector(params.vocab_size(), length, |counts| {
            let doc = Document::from_counts(counts.to_vec());
            let mult = log_multiplicity(counts);
            for sv in &labels {
                let step = params
                    .free_energy(&doc, sv)
                    .and_then(|f| Ok((f, hidden_probs(params, &doc, sv)?)));
                match step {
                    Ok((f, h)) => {
                        let p = (mult + f - log_z).exp();
                        grad.add_statistics(&doc, sv, &h, -(n as f64) * p);
                    }
                    Err(e) => failure = Some(e),
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
    }
    Ok(grad)
}
