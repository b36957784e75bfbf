mod common;

use common::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sentopic::corpus::Document;
use sentopic::eval::enumerate::{for_each_count_vector, log_multiplicity};
use sentopic::eval::*;
use sentopic::model::{onehot, ModelParams};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn count_level_z_equals_sequence_enumeration() {
    let mut r = rng(1);
    for s in [0, 1, 2, 3] {
        let p = random_params(&mut r, 3, 3, s, 1.0);
        let exact = exact_log_z(&p, 3).unwrap().log_z;
        assert!(rel_err(exact, log_z(&p, 3, None)) < 1e-10);
        for l in 0..s {
            let clamped = exact_log_z_clamped(&p, 3, l).unwrap().log_z;
            assert!(rel_err(clamped, log_z(&p, 3, Some(l))) < 1e-10);
        }
    }
}

#[test]
fn probabilities_sum_to_one() {
    let mut r = rng(2);
    let p = random_params(&mut r, 3, 2, 2, 0.8);
    let z = exact_log_z(&p, 4).unwrap().log_z;
    let mut total = 0.0;
    for_each_count_vector(3, 4, |c| {
        let doc = Document::from_counts(c.to_vec());
        for l in 0..2 {
            let f = p.free_energy(&doc, onehot(2, l).as_slice().unwrap()).unwrap();
            total += (log_multiplicity(c) + f - z).exp();
        }
    });
    assert!((total - 1.0).abs() < 1e-10);
}

fn docs(r: &mut ChaCha8Rng, k: usize) -> Vec<Document> {
    (0..12)
        .map(|i| Document::from_counts(random_counts(r, k, 1 + i % 4)).with_sentiment(i % 2))
        .collect()
}

fn exact_ppl(p: &ModelParams, d: &[Document], cond: Conditioning) -> PerplexityReport {
    let t = PartitionTable::build(p, d, &Estimator::Exact, cond, false).unwrap();
    perplexity(p, d, &t, cond).unwrap()
}

#[test]
fn visible_bias_shift_leaves_perplexity_unchanged() {
    let mut r = rng(3);
    let p = random_params(&mut r, 4, 3, 2, 0.7);
    let d = docs(&mut r, 4);
    let base = exact_ppl(&p, &d, Conditioning::Marginal);
    let mut shifted = p.clone();
    shifted.a += 1.7;
    let moved = exact_ppl(&shifted, &d, Conditioning::Marginal);
    assert!((base.perplexity - moved.perplexity).abs() < 1e-9 * base.perplexity);
    for len in 1..=4 {
        let z0 = exact_log_z(&p, len).unwrap().log_z;
        let z1 = exact_log_z(&shifted, len).unwrap().log_z;
        assert!((z1 - z0 - 1.7 * len as f64).abs() < 1e-9);
    }
}

#[test]
fn perplexity_ignores_document_order() {
    let mut r = rng(4);
    let p = random_params(&mut r, 4, 2, 2, 0.7);
    let mut d = docs(&mut r, 4);
    let a = exact_ppl(&p, &d, Conditioning::GoldLabel).perplexity;
    d.shuffle(&mut r);
    let b = exact_ppl(&p, &d, Conditioning::GoldLabel).perplexity;
    assert!((a - b).abs() < 1e-12 * a);
}

#[test]
fn per_document_log_p_matches_oracle() {
    let mut r = rng(5);
    let p = random_params(&mut r, 3, 2, 2, 0.9);
    let d = docs(&mut r, 3);
    let report = exact_ppl(&p, &d, Conditioning::Marginal);
    for (doc, lp) in d.iter().zip(&report.per_doc_log_p) {
        let c = doc.counts().to_vec();
        let want = lse((0..2).map(|l| log_unnormalized(&p, &c, onehot(2, l).as_slice().unwrap())))
            - log_z(&p, doc.length(), None);
        assert!(rel_err(*lp, want) < 1e-10);
    }
}

#[test]
fn ais_stderr_shrinks_with_more_runs() {
    let mut r = rng(6);
    let p = random_params(&mut r, 8, 4, 2, 0.6);
    let settings = |runs| AisSettings {
        runs,
        temperatures: 200,
        seed: 9,
        ..AisSettings::default()
    };
    let small = ais_log_z(&p, 5, &settings(25)).unwrap().log_z_stderr;
    let large = ais_log_z(&p, 5, &settings(100)).unwrap().log_z_stderr;
    let ratio = small / large;
    // 4× runs: expected ratio 2
    assert!((1.0..=4.0).contains(&ratio), "ratio {ratio}");
    assert!((0.5..=2.0).contains(&(ratio / 2.0)));
}

#[test]
fn bucketed_ais_tracks_exact_lengths() {
    let mut r = rng(7);
    let p = random_params(&mut r, 3, 3, 0, 0.5);
    let d: Vec<Document> = (1..=40).map(|n| Document::from_counts(random_counts(&mut r, 3, n))).collect();
    let ais = Estimator::Ais(AisSettings {
        runs: 20,
        temperatures: 200,
        ..AisSettings::default()
    });
    let t = PartitionTable::build(&p, &d, &ais, Conditioning::Marginal, true).unwrap();
    assert!(t.entries().count() <= BUCKETS);
    let exact = exact_ppl(&p, &d, Conditioning::Marginal).perplexity;
    let approx = perplexity(&p, &d, &t, Conditioning::Marginal).unwrap().perplexity;
    assert!(rel_err(approx, exact) < 0.02, "{approx} vs {exact}");
}
