//! Annealed importance sampling of log Z(D).
//!
//! The chain anneals from the all-zero model (uniform over word sequences,
//! sentiments and hidden states, with a closed-form normalizer) to the target
//! along `θ_β = β·θ`. Because the energy is linear in θ this is the geometric
//! path between the two distributions. Each temperature contributes
//! `F_β(v, s) − F_β'(v, s)` to the log importance weight and is followed by one
//! Gibbs sweep h | v, s then v, s | h at the new temperature.

use rand::Rng;
use rayon::prelude::*;

use super::partition::{zero_model_log_z, LogSumExp, Method, PartitionEstimate};
use crate::error::{Error, Result};
use crate::model::{sample_categorical, softplus, ModelParams};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AisSettings {
    pub runs: usize,
    pub temperatures: usize,
    pub seed: u64,
    /// Bootstrap resamples used for the standard error.
    pub bootstrap: usize,
    /// Smallest nonzero inverse temperature of the geometric schedule.
    pub beta_min: f64,
}

impl Default for AisSettings {
    fn default() -> Self {
        AisSettings {
            runs: 100,
            temperatures: 1000,
            seed: 0,
            bootstrap: 200,
            beta_min: 1e-3,
        }
    }
}

/// `0` followed by `n` geometrically spaced values ending at 1.
pub fn geometric_schedule(n: usize, beta_min: f64) -> Vec<f64> {
    let mut betas = vec![0.0];
    if n == 1 {
        betas.push(1.0);
        return betas;
    }
    let ln_min = beta_min.ln();
    for t in 0..n {
        let frac = t as f64 / (n - 1) as f64;
        betas.push((ln_min * (1.0 - frac)).exp());
    }
    *betas.last_mut().unwrap() = 1.0;
    betas
}

pub fn ais_log_z(params: &ModelParams, length: usize, settings: &AisSettings) -> Result<PartitionEstimate> {
    run(params, length, None, settings)
}

/// AIS estimate of the normalizer of p(v | s) with the sentiment layer clamped.
pub fn ais_log_z_clamped(
    params: &ModelParams,
    length: usize,
    sentiment: usize,
    settings: &AisSettings,
) -> Result<PartitionEstimate> {
    if sentiment >= params.sentiment_size() {
        return Err(Error::dim(format!(
            "sentiment {sentiment} outside S = {}",
            params.sentiment_size()
        )));
    }
    run(params, length, Some(sentiment), settings)
}

fn run(params: &ModelParams, length: usize, clamp: Option<usize>, settings: &AisSettings) -> Result<PartitionEstimate> {
    if settings.runs < 10 || settings.temperatures < 100 {
        return Err(Error::InvalidInput(format!(
            "AIS needs at least 10 runs and 100 temperatures, got {} and {}",
            settings.runs, settings.temperatures
        )));
    }
    if length == 0 {
        return Err(Error::InvalidInput("document length must be at least 1".into()));
    }
    if !(settings.beta_min > 0.0 && settings.beta_min < 1.0) {
        return Err(Error::InvalidInput("beta_min must lie in (0, 1)".into()));
    }
    let base = zero_model_log_z(
        params.vocab_size(),
        params.hidden_size(),
        params.sentiment_size(),
        length,
        clamp.is_some(),
    );
    let betas = geometric_schedule(settings.temperatures, settings.beta_min);
    let chain = Chain::new(params);
    // stream index mixes length and clamp so tables built length by length stay independent
    let tag = (length as u32) << 8 | clamp.map_or(0, |l| l as u32 + 1);
    let log_weights: Vec<f64> = (0..settings.runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::indexed(
                settings.seed ^ ((tag as u64) << 32),
                Stream::Ais,
                r as u32,
            );
            chain.log_weight(length, clamp, &betas, &mut rng)
        })
        .collect();
    if let Some(w) = log_weights.iter().find(|w| !w.is_finite()) {
        return Err(Error::InvalidInput(format!("AIS produced a non-finite log weight {w}")));
    }
    let log_mean = |ws: &mut dyn Iterator<Item = f64>, n: usize| {
        let mut acc = LogSumExp::new();
        ws.for_each(|w| acc.add(w));
        acc.value() - (n as f64).ln()
    };
    let estimate = log_mean(&mut log_weights.iter().copied(), log_weights.len());

    let mut boot_rng = rng::indexed(settings.seed ^ ((tag as u64) << 32), Stream::Bootstrap, 0);
    let n = log_weights.len();
    let boots: Vec<f64> = (0..settings.bootstrap)
        .map(|_| {
            let mut it = (0..n).map(|_| log_weights[boot_rng.gen_range(0..n)]);
            log_mean(&mut it, n)
        })
        .collect();
    let stderr = if boots.len() > 1 {
        let mean = boots.iter().sum::<f64>() / boots.len() as f64;
        (boots.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (boots.len() - 1) as f64).sqrt()
    } else {
        0.0
    };

    Ok(PartitionEstimate {
        log_z: base + estimate,
        method: Method::Ais,
        ais_runs: settings.runs,
        log_z_stderr: stderr,
        base_doc_length: length,
        sentiment: clamp,
    })
}

/// Flat copies of the parameters for the inner loop.
struct Chain<'a> {
    params: &'a ModelParams,
    k: usize,
    h: usize,
    s: usize,
    w: Vec<f64>,
    wt: Vec<f64>,
    u: Vec<f64>,
}

impl<'a> Chain<'a> {
    fn new(params: &'a ModelParams) -> Self {
        let (k, h, s) = (params.vocab_size(), params.hidden_size(), params.sentiment_size());
        Chain {
            params,
            k,
            h,
            s,
            w: params.w.iter().copied().collect(),
            wt: params.w.t().iter().copied().collect(),
            u: params.u.iter().copied().collect(),
        }
    }

    /// Unscaled hidden input and the visible+sentiment bias term of F.
    fn drive(&self, counts: &[u32], length: usize, label: Option<usize>, x: &mut [f64]) -> f64 {
        let p = self.params;
        for (xj, bj) in x.iter_mut().zip(p.b.iter()) {
            *xj = length as f64 * bj;
        }
        let mut bias = 0.0;
        for (k, &n) in counts.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let n = n as f64;
            bias += n * p.a[k];
            for (xj, wkj) in x.iter_mut().zip(&self.w[k * self.h..(k + 1) * self.h]) {
                *xj += n * wkj;
            }
        }
        if let Some(l) = label {
            bias += p.c[l];
            for (xj, ulj) in x.iter_mut().zip(&self.u[l * self.h..(l + 1) * self.h]) {
                *xj += ulj;
            }
        }
        bias
    }

    fn free_energy(beta: f64, bias: f64, x: &[f64]) -> f64 {
        beta * bias + x.iter().map(|&xj| softplus(beta * xj)).sum::<f64>()
    }

    fn log_weight<R: Rng>(&self, length: usize, clamp: Option<usize>, betas: &[f64], rng: &mut R) -> f64 {
        let (k, h, s) = (self.k, self.h, self.s);
        let p = self.params;
        // draw from the base model: uniform words and sentiment
        let mut counts = vec![0u32; k];
        for _ in 0..length {
            counts[rng.gen_range(0..k)] += 1;
        }
        let mut label = match (clamp, s) {
            (Some(l), _) => Some(l),
            (None, 0) => None,
            (None, _) => Some(rng.gen_range(0..s)),
        };
        let mut x = vec![0.0; h];
        let mut hidden = vec![false; h];
        let mut logits = vec![0.0; k];
        let mut cumulative = vec![0.0; k];
        let mut sent = vec![0.0; s];
        let mut log_w = 0.0;

        for pair in betas.windows(2) {
            let (prev, beta) = (pair[0], pair[1]);
            let bias = self.drive(&counts, length, label, &mut x);
            log_w += Self::free_energy(beta, bias, &x) - Self::free_energy(prev, bias, &x);

            // h | v, s at β
            for (hj, &xj) in hidden.iter_mut().zip(&x) {
                *hj = rng.gen::<f64>() < crate::model::sigmoid(beta * xj);
            }
            // v | h at β
            let mut max = f64::NEG_INFINITY;
            for (kk, logit) in logits.iter_mut().enumerate() {
                let row = &self.wt;
                let mut z = p.a[kk];
                for (j, _) in hidden.iter().enumerate().filter(|(_, &on)| on) {
                    z += row[j * k + kk];
                }
                *logit = beta * z;
                max = max.max(*logit);
            }
            let mut acc = 0.0;
            for (c, &logit) in cumulative.iter_mut().zip(&logits) {
                acc += (logit - max).exp();
                *c = acc;
            }
            counts.iter_mut().for_each(|c| *c = 0);
            for _ in 0..length {
                let r = rng.gen::<f64>() * acc;
                let idx = cumulative.partition_point(|&c| c <= r).min(k - 1);
                counts[idx] += 1;
            }
            // s | h at β
            if clamp.is_none() && s > 0 {
                for (l, sl) in sent.iter_mut().enumerate() {
                    let mut z = p.c[l];
                    for (j, _) in hidden.iter().enumerate().filter(|(_, &on)| on) {
                        z += self.u[l * h + j];
                    }
                    *sl = beta * z;
                }
                let max = sent.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                sent.iter_mut().for_each(|v| *v = (*v - max).exp());
                label = Some(sample_categorical(&sent, rng));
            }
        }
        log_w
    }
}
