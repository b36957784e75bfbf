use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::model::{softmax, Mode, ModelParams};
use crate::rng::{self, Stream};

/// Two-layer classifier: z = tanh(b1 + W1ᵀ v̂), p(s) = softmax(b2 + W2 z).
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    /// K × H
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    /// S × H
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

impl Mlp {
    /// Copies W, D̄·b, U and c from a joint model.
    pub fn warm_start(params: &ModelParams, mean_length: f64) -> Result<Self> {
        if params.mode() != Mode::Joint {
            return Err(Error::Mode {
                expected: "joint",
                hint: "warm start needs sentiment-layer weights",
            });
        }
        Ok(Mlp {
            w1: params.w.clone(),
            b1: &params.b * mean_length,
            w2: params.u.clone(),
            b2: params.c.clone(),
        })
    }

    /// Gaussian weights with standard deviation `sigma`, zero biases.
    pub fn random(k: usize, h: usize, s: usize, sigma: f64, seed: u64) -> Result<Self> {
        let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let mut r = rng::indexed(seed, Stream::Mlp, 1);
        let mut w1 = Array2::zeros((k, h));
        w1.iter_mut().for_each(|x| *x = normal.sample(&mut r));
        let mut w2 = Array2::zeros((s, h));
        w2.iter_mut().for_each(|x| *x = normal.sample(&mut r));
        Ok(Mlp {
            w1,
            b1: Array1::zeros(h),
            w2,
            b2: Array1::zeros(s),
        })
    }

    fn zeros_like(&self) -> Self {
        Mlp {
            w1: Array2::zeros(self.w1.dim()),
            b1: Array1::zeros(self.b1.len()),
            w2: Array2::zeros(self.w2.dim()),
            b2: Array1::zeros(self.b2.len()),
        }
    }

    fn check(&self, doc: &Document) -> Result<()> {
        if doc.vocab_size() != self.w1.nrows() {
            return Err(Error::dim(format!(
                "document over {} words, network input is {}",
                doc.vocab_size(),
                self.w1.nrows()
            )));
        }
        Ok(())
    }

    /// Hidden activations and class probabilities.
    pub fn forward(&self, doc: &Document) -> Result<(Array1<f64>, Array1<f64>)> {
        self.check(doc)?;
        let mut a = self.b1.clone();
        for (k, n) in doc.nonzeros() {
            a.scaled_add(n as f64, &self.w1.row(k));
        }
        let z = a.mapv_into(f64::tanh);
        let probs = softmax(&self.b2 + &self.w2.dot(&z));
        Ok((z, probs))
    }

    pub fn predict(&self, doc: &Document) -> Result<usize> {
        let (_, p) = self.forward(doc)?;
        let mut best = 0;
        for (l, &x) in p.iter().enumerate() {
            if x > p[best] {
                best = l;
            }
        }
        Ok(best)
    }

    /// Cross-entropy −log p(label | v).
    pub fn loss(&self, doc: &Document, label: usize) -> Result<f64> {
        let (_, p) = self.forward(doc)?;
        p.get(label)
            .map(|x| -x.ln())
            .ok_or_else(|| Error::dim(format!("label {label} outside {} classes", p.len())))
    }

    /// ∂ loss / ∂ parameters, laid out like the network.
    pub fn gradient(&self, doc: &Document, label: usize) -> Result<Mlp> {
        let mut g = self.zeros_like();
        self.accumulate(doc, label, 1.0, &mut g)?;
        Ok(g)
    }

    fn accumulate(&self, doc: &Document, label: usize, scale: f64, g: &mut Mlp) -> Result<()> {
        let (z, mut delta2) = self.forward(doc)?;
        if label >= delta2.len() {
            return Err(Error::dim(format!("label {label} outside {} classes", delta2.len())));
        }
        delta2[label] -= 1.0;
        let delta1 = self.w2.t().dot(&delta2) * z.mapv(|x| 1.0 - x * x);
        for (l, &d) in delta2.iter().enumerate() {
            g.w2.row_mut(l).scaled_add(scale * d, &z);
        }
        g.b2.scaled_add(scale, &delta2);
        for (k, n) in doc.nonzeros() {
            g.w1.row_mut(k).scaled_add(scale * n as f64, &delta1);
        }
        g.b1.scaled_add(scale, &delta1);
        Ok(())
    }

    /// Per-document SGD on the cross-entropy.
    pub fn train(&mut self, docs: &[Document], config: &MlpConfig) -> Result<()> {
        let labels = labels(docs)?;
        let mut order: Vec<usize> = (0..docs.len()).collect();
        let mut shuffle = rng::indexed(config.seed, Stream::Mlp, 0);
        let mut g = self.zeros_like();
        for _ in 0..config.epochs {
            order.shuffle(&mut shuffle);
            for &i in &order {
                g.w1.fill(0.0);
                g.b1.fill(0.0);
                g.w2.fill(0.0);
                g.b2.fill(0.0);
                self.accumulate(&docs[i], labels[i], 1.0, &mut g)?;
                for (k, _) in docs[i].nonzeros() {
                    self.w1.row_mut(k).scaled_add(-config.learning_rate, &g.w1.row(k));
                }
                self.b1.scaled_add(-config.learning_rate, &g.b1);
                self.w2.scaled_add(-config.learning_rate, &g.w2);
                self.b2.scaled_add(-config.learning_rate, &g.b2);
            }
            if self.b1.iter().chain(self.w2.iter()).chain(self.b2.iter()).any(|x| !x.is_finite()) {
                return Err(Error::NonFinite { block: "mlp" });
            }
        }
        Ok(())
    }

    pub fn accuracy(&self, docs: &[Document]) -> Result<f64> {
        let labels = labels(docs)?;
        let mut right = 0usize;
        for (d, &l) in docs.iter().zip(&labels) {
            right += usize::from(self.predict(d)? == l);
        }
        Ok(right as f64 / docs.len() as f64)
    }
}

fn labels(docs: &[Document]) -> Result<Vec<usize>> {
    if docs.is_empty() {
        return Err(Error::InvalidInput("no documents".into()));
    }
    docs.iter()
        .map(|d| {
            d.sentiment
                .ok_or_else(|| Error::InvalidInput("MLP training needs sentiment labels".into()))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Weight scale of the randomly initialized arm.
    pub init_sigma: f64,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            epochs: 20,
            learning_rate: 0.01,
            init_sigma: 0.01,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MlpRun {
    pub model: Mlp,
    pub accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct MlpComparison {
    pub warm: MlpRun,
    pub random: MlpRun,
}

/// Fine-tunes a network warm-started from `params` and an identically
/// trained randomly initialized one; both are scored on `test`.
pub fn mlp_finetune(
    params: &ModelParams,
    train: &[Document],
    test: &[Document],
    config: &MlpConfig,
) -> Result<MlpComparison> {
    let train: Vec<Document> = train.iter().filter(|d| !d.is_empty()).cloned().collect();
    if train.is_empty() {
        return Err(Error::InvalidInput("no non-empty training documents".into()));
    }
    let mean_length = train.iter().map(|d| d.length() as f64).sum::<f64>() / train.len() as f64;
    let mut warm = Mlp::warm_start(params, mean_length)?;
    let mut random = Mlp::random(
        params.vocab_size(),
        params.hidden_size(),
        params.sentiment_size(),
        config.init_sigma,
        config.seed,
    )?;
    warm.train(&train, config)?;
    random.train(&train, config)?;
    Ok(MlpComparison {
        warm: MlpRun {
            accuracy: warm.accuracy(test)?,
            model: warm,
        },
        random: MlpRun {
            accuracy: random.accuracy(test)?,
            model: random,
        },
    })
}
