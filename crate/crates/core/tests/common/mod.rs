//! Brute-force reference computations over every word sequence, sentiment
//! value and hidden configuration of a tiny model.
#![allow(dead_code)]

use rand::Rng;
use rand_distr::{Distribution, Normal};
use sentopic::model::ModelParams;

/// All `k^d` word sequences.
pub fn sequences(k: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..k).map(move |w| {
                    let mut t = s.clone();
                    t.push(w);
                    t
                })
            })
            .collect();
    }
    out
}

/// All binary vectors of length `h`.
pub fn hidden_states(h: usize) -> Vec<Vec<f64>> {
    (0..1usize << h)
        .map(|m| (0..h).map(|j| ((m >> j) & 1) as f64).collect())
        .collect()
}

/// One-hot sentiment vectors (a single empty vector when `s == 0`).
pub fn sentiment_states(s: usize) -> Vec<Vec<f64>> {
    if s == 0 {
        return vec![vec![]];
    }
    (0..s)
        .map(|l| (0..s).map(|i| if i == l { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn counts_of(seq: &[usize], k: usize) -> Vec<u32> {
    let mut c = vec![0u32; k];
    for &w in seq {
        c[w] += 1;
    }
    c
}

/// −E(v, s, h) summed term by term from the raw parameter blocks.
pub fn neg_energy(p: &ModelParams, counts: &[u32], s: &[f64], h: &[f64]) -> f64 {
    let d: f64 = counts.iter().map(|&c| c as f64).sum();
    let mut total = 0.0;
    for (k, &c) in counts.iter().enumerate() {
        let c = c as f64;
        total += c * p.a[k];
        for (j, &hj) in h.iter().enumerate() {
            total += p.w[[k, j]] * hj * c;
        }
    }
    for (l, &sl) in s.iter().enumerate() {
        total += sl * p.c[l];
        for (j, &hj) in h.iter().enumerate() {
            total += p.u[[l, j]] * hj * sl;
        }
    }
    for (j, &hj) in h.iter().enumerate() {
        total += d * p.b[j] * hj;
    }
    total
}

/// log Σ exp(x) without shortcuts beyond the max shift.
pub fn lse(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// log Σ_h e^{−E(v, s, h)}.
pub fn log_unnormalized(p: &ModelParams, counts: &[u32], s: &[f64]) -> f64 {
    lse(hidden_states(p.hidden_size())
        .iter()
        .map(|h| neg_energy(p, counts, s, h)))
}

/// log Z(d) summed over every word sequence, sentiment value (or only
/// `clamp`) and hidden state.
pub fn log_z(p: &ModelParams, d: usize, clamp: Option<usize>) -> f64 {
    let k = p.vocab_size();
    let ss = sentiment_states(p.sentiment_size());
    let hs = hidden_states(p.hidden_size());
    let mut terms = Vec::new();
    for seq in sequences(k, d) {
        let c = counts_of(&seq, k);
        for (l, s) in ss.iter().enumerate() {
            if clamp.is_some_and(|x| x != l) {
                continue;
            }
            for h in &hs {
                terms.push(neg_energy(p, &c, s, h));
            }
        }
    }
    lse(terms)
}

/// p(h_j = 1 | v, s) by summing the joint over hidden states.
pub fn hidden_posterior(p: &ModelParams, counts: &[u32], s: &[f64]) -> Vec<f64> {
    let hs = hidden_states(p.hidden_size());
    let logs: Vec<f64> = hs.iter().map(|h| neg_energy(p, counts, s, h)).collect();
    let norm = lse(logs.iter().copied());
    (0..p.hidden_size())
        .map(|j| {
            hs.iter()
                .zip(&logs)
                .filter(|(h, _)| h[j] == 1.0)
                .map(|(_, l)| (l - norm).exp())
                .sum()
        })
        .collect()
}

/// p(first word = w | h, s) from the joint over all sequences.
pub fn first_word_posterior(p: &ModelParams, d: usize, s: &[f64], h: &[f64]) -> Vec<f64> {
    let k = p.vocab_size();
    let seqs = sequences(k, d);
    let logs: Vec<f64> = seqs
        .iter()
        .map(|seq| neg_energy(p, &counts_of(seq, k), s, h))
        .collect();
    let norm = lse(logs.iter().copied());
    (0..k)
        .map(|w| {
            seqs.iter()
                .zip(&logs)
                .filter(|(seq, _)| seq[0] == w)
                .map(|(_, l)| (l - norm).exp())
                .sum()
        })
        .collect()
}

/// p(s = l | h) with the words of length-`d` documents summed out.
pub fn sentiment_posterior(p: &ModelParams, d: usize, h: &[f64]) -> Vec<f64> {
    let k = p.vocab_size();
    let per_label: Vec<f64> = sentiment_states(p.sentiment_size())
        .iter()
        .map(|s| lse(sequences(k, d).iter().map(|seq| neg_energy(p, &counts_of(seq, k), s, h))))
        .collect();
    let norm = lse(per_label.iter().copied());
    per_label.iter().map(|l| (l - norm).exp()).collect()
}

/// Σ_n log p(v_n, s_n) for specific word sequences (or log p(v_n) without a
/// sentiment layer).
pub fn log_likelihood(p: &ModelParams, docs: &[(Vec<u32>, Option<usize>)]) -> f64 {
    let ss = sentiment_states(p.sentiment_size());
    docs.iter()
        .map(|(c, label)| {
            let d: u32 = c.iter().sum();
            let s = match label {
                Some(l) => ss[*l].clone(),
                None => vec![],
            };
            log_unnormalized(p, c, &s) - log_z(p, d as usize, None)
        })
        .sum()
}

pub fn random_params<R: Rng>(rng: &mut R, k: usize, h: usize, s: usize, scale: f64) -> ModelParams {
    let n = Normal::new(0.0, scale).unwrap();
    let mut p = ModelParams::zeros(k, h, s);
    p.w.iter_mut().for_each(|x| *x = n.sample(rng));
    p.u.iter_mut().for_each(|x| *x = n.sample(rng));
    p.a.iter_mut().for_each(|x| *x = n.sample(rng));
    p.b.iter_mut().for_each(|x| *x = n.sample(rng));
    p.c.iter_mut().for_each(|x| *x = n.sample(rng));
    p
}

pub fn random_counts<R: Rng>(rng: &mut R, k: usize, d: usize) -> Vec<u32> {
    let mut c = vec![0u32; k];
    for _ in 0..d {
        c[rng.gen_range(0..k)] += 1;
    }
    c
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    if got == want {
        0.0
    } else {
        (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
    }
}
