mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sentopic::corpus::{Corpus, Document, Vocabulary};
use sentopic::eval::exact_log_likelihood;
use sentopic::model::{onehot, Mode};
use sentopic::training::*;

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (norm(a) * norm(b))
}

#[test]
fn long_chain_cd_points_along_exact_gradient() {
    let mut r = ChaCha8Rng::seed_from_u64(11);
    for s in [0, 2] {
        let p = random_params(&mut r, 3, 2, s, 0.8);
        let doc = Document::from_counts(vec![2, 0, 1]).with_sentiment(1);
        let sv = if s == 0 { Vec::new() } else { onehot(s, 1).to_vec() };
        let exact = exact_gradient(&p, std::slice::from_ref(&doc)).unwrap();
        let mut mean = GradientEstimate::zeros_like(&p);
        let draws = 4000;
        for _ in 0..draws {
            let g = cd_step(&p, &doc, &sv, 50, &mut r).unwrap();
            mean.add_scaled(&g, 1.0 / draws as f64);
        }
        let c = cosine(&mean.flatten(), &exact.flatten());
        assert!(c > 0.95, "S={s}: cosine {c}");
    }
}

#[test]
fn exact_ascent_flattens_the_gradient() {
    let mut r = ChaCha8Rng::seed_from_u64(12);
    let mut p = random_params(&mut r, 3, 2, 2, 0.3);
    let docs = vec![
        Document::from_counts(vec![2, 1, 0]).with_sentiment(0),
        Document::from_counts(vec![0, 1, 2]).with_sentiment(1),
    ];
    let g0 = norm(&exact_gradient(&p, &docs).unwrap().flatten());
    let ll = exact_log_likelihood(&p, &docs).unwrap();
    for _ in 0..3000 {
        let g = exact_gradient(&p, &docs).unwrap();
        apply_update(&mut p, &g, 0.05).unwrap();
    }
    let next = exact_log_likelihood(&p, &docs).unwrap();
    assert!(next > ll && next.is_finite());
    let g1 = norm(&exact_gradient(&p, &docs).unwrap().flatten());
    assert!(g1 < 0.1 * g0, "{g0} -> {g1}");
}

#[test]
fn repeated_document_is_reconstructed_better_over_time() {
    let vocab = Vocabulary::new((0..6).map(|k| format!("w{k}")).collect()).unwrap();
    let doc = Document::from_counts(vec![4, 0, 3, 0, 0, 1]).with_sentiment(0);
    let corpus = Corpus::from_parts(vocab, vec![doc; 5], vec![]).unwrap();
    let mut drops = Vec::new();
    for seed in 0..20 {
        let cfg = TrainConfig {
            iterations: 60,
            learning_rate: 0.01,
            hidden_units: 4,
            init_sigma: 0.1,
            probe_every: 1,
            seed,
            ..Default::default()
        };
        let out = train(&corpus, &cfg, Mode::Joint, &mut NoProbe).unwrap();
        let recon: Vec<f64> = out.log.iter().filter(|e| e.metric == "recon_l1").map(|e| e.value).collect();
        let head: f64 = recon[..5].iter().sum::<f64>() / 5.0;
        let tail: f64 = recon[recon.len() - 5..].iter().sum::<f64>() / 5.0;
        drops.push(head - tail);
    }
    drops.sort_by(f64::total_cmp);
    assert!(drops[10] > 0.0, "{drops:?}");
}
