mod common;

use common::*;
use ndarray::Array1;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sentopic::corpus::*;
use sentopic::tasks::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn sentiment_bias_shift_keeps_predictions(seed in 0u64..1000, shift in -5.0f64..5.0) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let p = random_params(&mut r, 5, 3, 2, 1.0);
        let mut q = p.clone();
        q.c += shift;
        for _ in 0..5 {
            let doc = Document::from_counts(random_counts(&mut r, 5, 6));
            let a = classify_sentiment(&p, &doc).unwrap();
            let b = classify_sentiment(&q, &doc).unwrap();
            prop_assert_eq!(a.label, b.label);
            for (x, y) in a.probs.iter().zip(&b.probs) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ranking_ignores_query_scale(seed in 0u64..1000, scale in 0.01f64..100.0) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let cands: Vec<Array1<f64>> = (0..8).map(|_| Array1::from_iter((0..4).map(|_| r.gen::<f64>()))).collect();
        let q: Vec<f64> = (0..4).map(|_| r.gen::<f64>()).collect();
        let scaled: Vec<f64> = q.iter().map(|x| x * scale).collect();
        let a: Vec<usize> = rank_by_similarity(&q, &cands).into_iter().map(|x| x.0).collect();
        let b: Vec<usize> = rank_by_similarity(&scaled, &cands).into_iter().map(|x| x.0).collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn baseline_ignores_token_order(seed in 0u64..1000) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let vocab = Vocabulary::new((0..6).map(|k| format!("w{k}")).collect()).unwrap();
        let lex = SentimentLexicon::parse("w0 0 1 0\nw1 0 0 1\nw2 0 0.6 0.4\nw3 1 0 0\n", std::path::Path::new("l")).unwrap();
        let mut tokens: Vec<usize> = (0..12).map(|_| r.gen_range(0..6)).collect();
        let a = count_baseline(&Document::from_word_indices(6, tokens.clone()).unwrap(), &vocab, &lex);
        tokens.shuffle(&mut r);
        let b = count_baseline(&Document::from_word_indices(6, tokens).unwrap(), &vocab, &lex);
        prop_assert_eq!(a, b);
    }
}

#[test]
fn full_depth_precision_is_the_base_rate() {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let p = random_params(&mut r, 6, 4, 0, 1.0);
    let docs = |n: usize, r: &mut ChaCha8Rng| -> Vec<Document> {
        (0..n).map(|i| Document::from_counts(random_counts(r, 6, 5)).with_topic(i % 3)).collect()
    };
    let train = docs(30, &mut r);
    let test = docs(9, &mut r);
    let curve = pr_curve(&p, &test, &train, &[30]).unwrap();
    let (recall, precision) = curve.points[0];
    assert!((recall - 1.0).abs() < 1e-12);
    assert!((precision - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn topic_order_matches_recomputed_differences() {
    let mut r = ChaCha8Rng::seed_from_u64(4);
    let p = random_params(&mut r, 8, 12, 2, 1.0);
    let lex = LexiconIntersection {
        shared: vec![0, 1, 2, 3, 4],
        positive: vec![0, 1],
        negative: vec![2, 3],
    };
    let masses = topic_masses(&p, &lex);
    let order = rank_topics(&masses);
    let diff = |j: usize| {
        (p.w[[0, j]] + p.w[[1, j]]) - (p.w[[2, j]] + p.w[[3, j]])
    };
    let mut sorted = order.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, (0..12).collect::<Vec<_>>());
    for w in order.windows(2) {
        assert!(diff(w[0]) >= diff(w[1]));
    }
}
