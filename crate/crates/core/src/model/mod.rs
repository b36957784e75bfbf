//! Replicated Softmax energy model with an optional sentiment layer.
//!
//! A document enters only through its count vector `v̂` and length `D`. The
//! energy of a joint state is
//!
//! ```text
//! E(v, s, h) = -v̂ᵀ W h - sᵀ U h - v̂ᵀ a - sᵀ c - D bᵀ h
//! ```
//!
//! with `W: K×H`, `U: S×H`. A model with `S = 0` is the plain Replicated
//! Softmax: the `U` and `c` terms vanish and every operation drops `s`.
//! The visible-bias term uses the counts `v̂`, the same vector that multiplies
//! `W`.

mod persist;

pub use persist::{load_params, read_params, save_params, write_params, MAGIC, VERSION};

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::corpus::Document;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Replicated Softmax, no sentiment layer.
    Rs,
    /// Replicated Softmax plus a softmax sentiment layer.
    Joint,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Rs => "rs",
            Mode::Joint => "joint",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rs" => Ok(Mode::Rs),
            "joint" => Ok(Mode::Joint),
            _ => Err(Error::InvalidInput(format!("unknown mode {s:?}, expected rs or joint"))),
        }
    }
}

/// θ = {W, U, a, b, c}. In RS mode `u` is `0×H` and `c` is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Visible↔hidden weights, K×H.
    pub w: Array2<f64>,
    /// Sentiment↔hidden weights, S×H.
    pub u: Array2<f64>,
    /// Visible bias, length K.
    pub a: Array1<f64>,
    /// Hidden bias, length H; scaled by the document length.
    pub b: Array1<f64>,
    /// Sentiment bias, length S.
    pub c: Array1<f64>,
}

impl ModelParams {
    /// All-zero parameters; `s = 0` gives an RS model.
    pub fn zeros(k: usize, h: usize, s: usize) -> Self {
        ModelParams {
            w: Array2::zeros((k, h)),
            u: Array2::zeros((s, h)),
            a: Array1::zeros(k),
            b: Array1::zeros(h),
            c: Array1::zeros(s),
        }
    }

    /// Assembles parameters, checking that the block shapes agree.
    pub fn from_blocks(
        w: Array2<f64>,
        u: Array2<f64>,
        a: Array1<f64>,
        b: Array1<f64>,
        c: Array1<f64>,
    ) -> Result<Self> {
        let (k, h) = w.dim();
        let s = u.nrows();
        if a.len() != k || b.len() != h || c.len() != s || u.ncols() != h {
            return Err(Error::dim(format!(
                "W {:?}, U {:?}, a {}, b {}, c {}",
                w.dim(),
                u.dim(),
                a.len(),
                b.len(),
                c.len()
            )));
        }
        Ok(ModelParams { w, u, a, b, c })
    }

    pub fn vocab_size(&self) -> usize {
        self.w.nrows()
    }

    pub fn hidden_size(&self) -> usize {
        self.w.ncols()
    }

    pub fn sentiment_size(&self) -> usize {
        self.u.nrows()
    }

    pub fn mode(&self) -> Mode {
        if self.sentiment_size() == 0 {
            Mode::Rs
        } else {
            Mode::Joint
        }
    }

    /// Name of the first block holding a NaN or infinity.
    pub fn first_non_finite(&self) -> Option<&'static str> {
        fn bad<'a>(mut x: impl Iterator<Item = &'a f64>) -> bool {
            x.any(|v| !v.is_finite())
        }
        if bad(self.w.iter()) {
            Some("W")
        } else if bad(self.u.iter()) {
            Some("U")
        } else if bad(self.a.iter()) {
            Some("a")
        } else if bad(self.b.iter()) {
            Some("b")
        } else if bad(self.c.iter()) {
            Some("c")
        } else {
            None
        }
    }

    /// The same model with every parameter multiplied by `beta`.
    pub fn scaled(&self, beta: f64) -> Self {
        ModelParams {
            w: &self.w * beta,
            u: &self.u * beta,
            a: &self.a * beta,
            b: &self.b * beta,
            c: &self.c * beta,
        }
    }

    fn check_doc(&self, doc: &Document) -> Result<()> {
        if doc.vocab_size() != self.vocab_size() {
            return Err(Error::dim(format!(
                "document has {} counts, model has K = {}",
                doc.vocab_size(),
                self.vocab_size()
            )));
        }
        Ok(())
    }

    fn check_sentiment(&self, s: &[f64]) -> Result<()> {
        if s.len() != self.sentiment_size() {
            return Err(Error::dim(format!(
                "sentiment vector has {} entries, model has S = {}",
                s.len(),
                self.sentiment_size()
            )));
        }
        Ok(())
    }

    fn check_hidden(&self, h: &[f64]) -> Result<()> {
        if h.len() != self.hidden_size() {
            return Err(Error::dim(format!(
                "hidden vector has {} entries, model has H = {}",
                h.len(),
                self.hidden_size()
            )));
        }
        Ok(())
    }

    fn require_joint(&self, hint: &'static str) -> Result<()> {
        match self.mode() {
            Mode::Joint => Ok(()),
            Mode::Rs => Err(Error::Mode {
                expected: "joint-mode",
                hint,
            }),
        }
    }

    /// `D·b + Wᵀv̂`, the visible contribution to every hidden unit.
    fn visible_drive(&self, doc: &Document) -> Array1<f64> {
        let mut x = &self.b * doc.length() as f64;
        for (k, n) in doc.nonzeros() {
            x.scaled_add(n as f64, &self.w.row(k));
        }
        x
    }

    /// Hidden pre-activations `D·b + Wᵀv̂ + Uᵀs`.
    pub fn hidden_input(&self, doc: &Document, s: &[f64]) -> Result<Array1<f64>> {
        self.check_doc(doc)?;
        self.check_sentiment(s)?;
        let mut x = self.visible_drive(doc);
        for (l, &sl) in s.iter().enumerate() {
            if sl != 0.0 {
                x.scaled_add(sl, &self.u.row(l));
            }
        }
        Ok(x)
    }

    /// E(v, s, h). Pass an empty `s` for RS models.
    pub fn energy(&self, doc: &Document, s: &[f64], h: &[f64]) -> Result<f64> {
        self.check_hidden(h)?;
        let x = self.hidden_input(doc, s)?;
        let hidden: f64 = x.iter().zip(h).map(|(xj, hj)| xj * hj).sum();
        let visible: f64 = doc.nonzeros().map(|(k, n)| n as f64 * self.a[k]).sum();
        let sentiment: f64 = s.iter().zip(&self.c).map(|(sl, cl)| sl * cl).sum();
        Ok(-(hidden + visible + sentiment))
    }

    /// p(h_j = 1 | v, s) = σ(D b_j + Σ_k W_kj v̂_k + Σ_l U_lj s_l).
    pub fn hidden_given_vs(&self, doc: &Document, s: &[f64]) -> Result<Array1<f64>> {
        self.require_joint("use hidden_given_v for RS models")?;
        Ok(self.hidden_input(doc, s)?.mapv_into(sigmoid))
    }

    /// p(h_j = 1 | v) = σ(D b_j + Σ_k W_kj v̂_k), ignoring any sentiment layer.
    pub fn hidden_given_v(&self, doc: &Document) -> Result<Array1<f64>> {
        self.check_doc(doc)?;
        Ok(self.visible_drive(doc).mapv_into(sigmoid))
    }

    /// Word distribution of one visible softmax unit given hidden states.
    pub fn visible_softmax(&self, h: &[f64]) -> Result<Array1<f64>> {
        self.check_hidden(h)?;
        let mut logits = self.a.clone();
        for (j, &hj) in h.iter().enumerate() {
            if hj != 0.0 {
                logits.scaled_add(hj, &self.w.column(j));
            }
        }
        Ok(softmax(logits))
    }

    /// Sentiment distribution given hidden states (binary or real-valued).
    pub fn sentiment_softmax(&self, h: &[f64]) -> Result<Array1<f64>> {
        self.require_joint("RS models have no sentiment layer")?;
        self.check_hidden(h)?;
        let mut logits = self.c.clone();
        for (j, &hj) in h.iter().enumerate() {
            if hj != 0.0 {
                logits.scaled_add(hj, &self.u.column(j));
            }
        }
        Ok(softmax(logits))
    }

    /// log Σ_h exp(-E(v, s, h)) in closed form:
    /// `v̂ᵀa + sᵀc + Σ_j softplus(D b_j + (Wᵀv̂)_j + (Uᵀs)_j)`.
    pub fn free_energy(&self, doc: &Document, s: &[f64]) -> Result<f64> {
        let x = self.hidden_input(doc, s)?;
        let visible: f64 = doc.nonzeros().map(|(k, n)| n as f64 * self.a[k]).sum();
        let sentiment: f64 = s.iter().zip(&self.c).map(|(sl, cl)| sl * cl).sum();
        Ok(visible + sentiment + x.iter().map(|&v| softplus(v)).sum::<f64>())
    }

    /// log Σ_s exp F(v, s): the sentiment layer summed out. Equals
    /// [`free_energy`](Self::free_energy) for RS models.
    pub fn marginal_free_energy(&self, doc: &Document) -> Result<f64> {
        match self.mode() {
            Mode::Rs => self.free_energy(doc, &[]),
            Mode::Joint => {
                let s = self.sentiment_size();
                let terms = (0..s)
                    .map(|l| self.free_energy(doc, onehot(s, l).as_slice().unwrap()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(log_sum_exp(&terms))
            }
        }
    }

    /// Draws a length-`D` document from the visible softmax given `h`.
    pub fn sample_document<R: Rng + ?Sized>(&self, h: &[f64], length: usize, rng: &mut R) -> Result<Document> {
        if length == 0 {
            return Err(Error::InvalidInput("document length must be at least 1".into()));
        }
        let probs = self.visible_softmax(h)?;
        Ok(Document::from_counts(sample_multinomial(probs.as_slice().unwrap(), length, rng)))
    }
}

/// One-hot vector of size `n` with a 1 at `index`.
pub fn onehot(n: usize, index: usize) -> Array1<f64> {
    let mut v = Array1::zeros(n);
    v[index] = 1.0;
    v
}

/// Logistic function, evaluated without overflow.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// log(1 + eˣ), evaluated without overflow.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Normalized exponentials with the maximum logit shifted to zero.
pub fn softmax(mut logits: Array1<f64>) -> Array1<f64> {
    let max = logits.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    logits.mapv_inplace(|x| (x - max).exp());
    let z = logits.sum();
    logits /= z;
    logits
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Independent Bernoulli draws.
pub fn sample_hidden<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Array1<f64> {
    probs
        .iter()
        .map(|&p| if rng.gen::<f64>() < p { 1.0 } else { 0.0 })
        .collect()
}

/// One categorical draw, returned one-hot.
pub fn sample_sentiment<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Array1<f64> {
    onehot(probs.len(), sample_categorical(probs, rng))
}

pub fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, &p) in probs.iter().enumerate() {
        if u < p {
            return i;
        }
        u -= p;
    }
    // rounding left u at the top edge: take the last nonzero category
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Counts of `n` categorical draws.
pub fn sample_multinomial<R: Rng + ?Sized>(probs: &[f64], n: usize, rng: &mut R) -> Vec<u32> {
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cumulative.push(acc);
    }
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut counts = vec![0u32; probs.len()];
    for _ in 0..n {
        let u = rng.gen::<f64>() * acc;
        let k = cumulative.partition_point(|&c| c <= u).min(last);
        counts[k] += 1;
    }
    counts
}
