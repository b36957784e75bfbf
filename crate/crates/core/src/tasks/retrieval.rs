use std::fmt::Write as _;

use log::warn;
use ndarray::Array1;
use rayon::prelude::*;

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// p(h = 1 | v), the document embedding used for retrieval.
pub fn hidden_representation(params: &ModelParams, doc: &Document) -> Result<Array1<f64>> {
    params.hidden_given_v(doc)
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// (index, similarity) of every candidate, most similar first, ties by index.
pub fn rank_by_similarity(query: &[f64], candidates: &[Array1<f64>]) -> Vec<(usize, f64)> {
    let mut ranked: Vec<(usize, f64)> = candidates
        .iter()
        .enumerate()
        .map(|(i, c)| (i, cosine(query, c.as_slice().unwrap())))
        .collect();
    ranked.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    ranked
}

/// Training documents ranked by similarity to `query`.
pub fn retrieve(params: &ModelParams, query: &Document, train: &[Document]) -> Result<Vec<(usize, f64)>> {
    let q = hidden_representation(params, query)?;
    let reps = train
        .iter()
        .map(|d| hidden_representation(params, d))
        .collect::<Result<Vec<_>>>()?;
    Ok(rank_by_similarity(q.as_slice().unwrap(), &reps))
}

/// Precision and recall averaged over queries at each retrieval depth.
#[derive(Debug, Clone, PartialEq)]
pub struct PrCurve {
    pub k_grid: Vec<usize>,
    /// (recall, precision) per depth.
    pub points: Vec<(f64, f64)>,
}

impl PrCurve {
    /// `k,recall,precision` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,recall,precision\n");
        for (k, (r, p)) in self.k_grid.iter().zip(&self.points) {
            let _ = writeln!(out, "{k},{r},{p}");
        }
        out
    }
}

fn topics(docs: &[Document], what: &str) -> Result<Vec<usize>> {
    docs.iter()
        .enumerate()
        .map(|(i, d)| {
            d.topic
                .ok_or_else(|| Error::InvalidInput(format!("{what} document {i} has no topic label")))
        })
        .collect()
}

/// Retrieval quality of the hidden representations: each test document
/// queries the training set, and a hit is a document with the same topic.
pub fn pr_curve(params: &ModelParams, test: &[Document], train: &[Document], k_grid: &[usize]) -> Result<PrCurve> {
    let rep = |docs: &[Document]| {
        docs.par_iter()
            .map(|d| hidden_representation(params, d))
            .collect::<Result<Vec<_>>>()
    };
    pr_curve_from_representations(&rep(test)?, &topics(test, "test")?, &rep(train)?, &topics(train, "training")?, k_grid)
}

/// [`pr_curve`] over precomputed representations. Depths beyond the training
/// set are truncated to its size; the grid is sorted and deduplicated.
pub fn pr_curve_from_representations(
    queries: &[Array1<f64>],
    query_topics: &[usize],
    candidates: &[Array1<f64>],
    candidate_topics: &[usize],
    k_grid: &[usize],
) -> Result<PrCurve> {
    if queries.len() != query_topics.len() || candidates.len() != candidate_topics.len() {
        return Err(Error::dim("one topic label per representation"));
    }
    if queries.is_empty() || candidates.is_empty() {
        return Err(Error::InvalidInput("retrieval needs queries and candidates".into()));
    }
    if k_grid.is_empty() || k_grid.contains(&0) {
        return Err(Error::InvalidInput("retrieval depths must be positive".into()));
    }
    let n = candidates.len();
    if k_grid.iter().any(|&k| k > n) {
        warn!("retrieval depths above {n} truncated to the training set size");
    }
    let mut grid: Vec<usize> = k_grid.iter().map(|&k| k.min(n)).collect();
    grid.sort_unstable();
    grid.dedup();

    let per_query: Vec<Vec<(f64, f64)>> = queries
        .par_iter()
        .zip(query_topics.par_iter())
        .map(|(q, &topic)| {
            let ranked = rank_by_similarity(q.as_slice().unwrap(), candidates);
            let relevant = candidate_topics.iter().filter(|&&t| t == topic).count();
            let mut hits = 0usize;
            let mut out = Vec::with_capacity(grid.len());
            let mut depth = 0usize;
            for &k in &grid {
                while depth < k {
                    hits += usize::from(candidate_topics[ranked[depth].0] == topic);
                    depth += 1;
                }
                let recall = if relevant == 0 { 0.0 } else { hits as f64 / relevant as f64 };
                out.push((recall, hits as f64 / k as f64));
            }
            out
        })
        .collect();
    let m = per_query.len() as f64;
    let points = (0..grid.len())
        .map(|i| {
            let r = per_query.iter().map(|q| q[i].0).sum::<f64>() / m;
            let p = per_query.iter().map(|q| q[i].1).sum::<f64>() / m;
            (r, p)
        })
        .collect();
    Ok(PrCurve { k_grid: grid, points })
}
