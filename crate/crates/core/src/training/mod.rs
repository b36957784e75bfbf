//! Contrastive-divergence training.

mod gradient;

pub use gradient::{apply_update, cd_step, exact_gradient, GradientEstimate};

use log::{info, warn};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};

use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};
use crate::model::{onehot, Mode, ModelParams};
use crate::rng::{self, Stream};

/// What one unit of `TrainConfig::iterations` means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IterationUnit {
    /// A full pass over the training documents.
    #[default]
    Epochs,
    /// A single parameter update.
    Updates,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub iterations: usize,
    pub iteration_unit: IterationUnit,
    pub batch_size: usize,
    pub cd_steps: usize,
    /// Standard deviation of the Gaussian initialization of W, U, a and c.
    pub init_sigma: f64,
    pub seed: u64,
    pub hidden_units: usize,
    /// Sentiment classes for joint training.
    pub sentiments: usize,
    pub momentum: f64,
    pub weight_decay: f64,
    /// Invoke the observer every this many epochs (0 disables probes).
    pub probe_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.001,
            iterations: 1000,
            iteration_unit: IterationUnit::Epochs,
            batch_size: 1,
            cd_steps: 1,
            init_sigma: 1.0,
            seed: 0,
            hidden_units: 50,
            sentiments: 2,
            momentum: 0.0,
            weight_decay: 0.0,
            probe_every: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.cd_steps == 0 {
            return bad("cd_steps must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if self.hidden_units == 0 {
            return bad("hidden_units must be at least 1");
        }
        if !(self.init_sigma >= 0.0 && self.init_sigma.is_finite()) {
            return bad("init_sigma must be non-negative");
        }
        if !(0.0..1.0).contains(&self.momentum) || self.weight_decay < 0.0 {
            return bad("momentum must lie in [0, 1) and weight_decay be non-negative");
        }
        Ok(())
    }
}

/// W, a (and U, c when `s > 0`) ~ N(0, init_sigma²); b = 0.
///
/// W and a come from one stream and U, c from another, so RS and joint
/// models built from the same seed share their visible parameters.
pub fn init_params(k: usize, h: usize, s: usize, config: &TrainConfig) -> Result<ModelParams> {
    let normal = Normal::new(0.0, config.init_sigma).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut p = ModelParams::zeros(k, h, s);
    let mut r = rng::stream(config.seed, Stream::Init);
    p.w.iter_mut().for_each(|x| *x = normal.sample(&mut r));
    p.a.iter_mut().for_each(|x| *x = normal.sample(&mut r));
    let mut r = rng::stream(config.seed, Stream::InitSentiment);
    p.u.iter_mut().for_each(|x| *x = normal.sample(&mut r));
    p.c.iter_mut().for_each(|x| *x = normal.sample(&mut r));
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogEntry {
    pub epoch: usize,
    pub doc_index: usize,
    pub metric: String,
    pub value: f64,
}

/// Receives a read-only view of the parameters at every probe.
pub trait TrainObserver {
    /// Returns metrics to log for this probe.
    fn probe(&mut self, epoch: usize, params: &ModelParams) -> Result<Vec<(String, f64)>>;
}

/// Observer that records nothing.
pub struct NoProbe;

impl TrainObserver for NoProbe {
    fn probe(&mut self, _: usize, _: &ModelParams) -> Result<Vec<(String, f64)>> {
        Ok(Vec::new())
    }
}

impl<F> TrainObserver for F
where
    F: FnMut(usize, &ModelParams) -> Result<Vec<(String, f64)>>,
{
    fn probe(&mut self, epoch: usize, params: &ModelParams) -> Result<Vec<(String, f64)>> {
        self(epoch, params)
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub log: Vec<LogEntry>,
}

/// `epoch,doc_index,metric_name,value` rows.
pub fn log_to_csv(log: &[LogEntry]) -> String {
    let mut out = String::from("epoch,doc_index,metric_name,value\n");
    for e in log {
        out.push_str(&format!("{},{},{},{}\n", e.epoch, e.doc_index, e.metric, e.value));
    }
    out
}

/// Trains on the corpus's training split.
///
/// Every epoch visits the (non-empty) training documents in a fresh order
/// drawn from the shuffle stream. Besides whatever the observer returns,
/// each probe logs the epoch's mean reconstruction error ‖v̂ − v̂′‖₁ as
/// `recon_l1`; the probe at epoch 0 precedes any update.
pub fn train(
    corpus: &Corpus,
    config: &TrainConfig,
    mode: Mode,
    observer: &mut dyn TrainObserver,
) -> Result<TrainOutcome> {
    config.validate()?;
    let s = match mode {
        Mode::Rs => 0,
        Mode::Joint => config.sentiments,
    };
    if mode == Mode::Joint && s == 0 {
        return Err(Error::InvalidInput("joint training needs at least one sentiment class".into()));
    }
    let all = corpus.train();
    let docs: Vec<&Document> = all.iter().copied().filter(|d| !d.is_empty()).collect();
    if docs.len() < all.len() {
        warn!("skipping {} empty training documents", all.len() - docs.len());
    }
    if docs.is_empty() {
        return Err(Error::InvalidInput("training split has no non-empty documents".into()));
    }
    let labels: Vec<Vec<f64>> = match mode {
        Mode::Rs => vec![Vec::new(); docs.len()],
        Mode::Joint => docs
            .iter()
            .enumerate()
            .map(|(i, d)| match d.sentiment {
                Some(l) if l < s => Ok(onehot(s, l).to_vec()),
                Some(l) => Err(Error::InvalidInput(format!(
                    "training document {i} has label {l}, but only {s} sentiments are configured"
                ))),
                None => Err(Error::InvalidInput(format!(
                    "joint training needs labels; training document {i} has none"
                ))),
            })
            .collect::<Result<_>>()?,
    };

    let mut params = init_params(corpus.vocabulary().len(), config.hidden_units, s, config)?;
    let mut shuffle = rng::stream(config.seed, Stream::Shuffle);
    let mut sampler = rng::stream(config.seed, Stream::Sampling);
    let mut velocity = (config.momentum > 0.0).then(|| GradientEstimate::zeros_like(&params));
    let dense = config.batch_size > 1 || config.momentum > 0.0 || config.weight_decay > 0.0;

    let total_updates = match config.iteration_unit {
        IterationUnit::Epochs => config.iterations * docs.len().div_ceil(config.batch_size),
        IterationUnit::Updates => config.iterations,
    };
    let mut log = Vec::new();
    let record = |epoch: usize, doc_index: usize, metrics: Vec<(String, f64)>, log: &mut Vec<LogEntry>| {
        for (metric, value) in metrics {
            log.push(LogEntry {
                epoch,
                doc_index,
                metric,
                value,
            });
        }
    };
    if config.probe_every > 0 {
        let m = observer.probe(0, &params)?;
        record(0, 0, m, &mut log);
    }

    let mut order: Vec<usize> = (0..docs.len()).collect();
    let mut updates = 0usize;
    let mut epoch = 0usize;
    while updates < total_updates {
        epoch += 1;
        order.shuffle(&mut shuffle);
        let mut recon = 0.0;
        let mut seen = 0usize;
        for batch in order.chunks(config.batch_size) {
            if updates == total_updates {
                break;
            }
            if dense {
                let mut grad = GradientEstimate::zeros_like(&params);
                for &i in batch {
                    let (g, err) = gradient::cd_step_with_error(&params, docs[i], &labels[i], config.cd_steps, &mut sampler)?;
                    grad.add_scaled(&g, 1.0 / batch.len() as f64);
                    recon += err;
                }
                if config.weight_decay > 0.0 {
                    grad.dw.scaled_add(-config.weight_decay, &params.w);
                    grad.du.scaled_add(-config.weight_decay, &params.u);
                }
                if let Some(v) = velocity.as_mut() {
                    v.scale(config.momentum);
                    v.add_scaled(&grad, 1.0);
                    grad = v.clone();
                }
                apply_update(&mut params, &grad, config.learning_rate)?;
            } else {
                let i = batch[0];
                recon += gradient::cd_update_sparse(
                    &mut params,
                    docs[i],
                    &labels[i],
                    config.cd_steps,
                    config.learning_rate,
                    &mut sampler,
                )?;
            }
            seen += batch.len();
            updates += 1;
        }
        if config.probe_every > 0 && (epoch % config.probe_every == 0 || updates == total_updates) {
            let mut m = vec![("recon_l1".to_string(), recon / seen.max(1) as f64)];
            m.extend(observer.probe(epoch, &params)?);
            record(epoch, seen, m, &mut log);
        }
    }
    info!("trained {mode} model: {epoch} epochs, {updates} updates");
    Ok(TrainOutcome { params, log })
}
