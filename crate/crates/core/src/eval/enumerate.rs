//! Enumeration of count vectors for exact computations on tiny models.

/// Largest state space (count vectors × sentiment values) enumerated exactly.
pub const ENUMERATION_BOUND: u128 = 1_000_000;

/// Number of count vectors of length `k` summing to `d`: C(d + k − 1, k − 1),
/// saturating at `u128::MAX`.
pub fn num_count_vectors(k: usize, d: usize) -> u128 {
    if k == 0 {
        return u128::from(d == 0);
    }
    let n = (d + k - 1) as u128;
    let r = (k - 1).min(d) as u128;
    let mut out: u128 = 1;
    for i in 0..r {
        // exact at every step: out * (n - i) is divisible by i + 1
        match out.checked_mul(n - i) {
            Some(x) => out = x / (i + 1),
            None => return u128::MAX,
        }
    }
    out
}

/// log of the multinomial coefficient D! / Π_k n_k!, the number of word
/// sequences sharing one count vector.
pub fn log_multiplicity(counts: &[u32]) -> f64 {
    let d: u32 = counts.iter().sum();
    ln_factorial(d) - counts.iter().map(|&c| ln_factorial(c)).sum::<f64>()
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Calls `f` with every length-`k` count vector summing to `d`, in
/// lexicographic order.
pub fn for_each_count_vector(k: usize, d: usize, mut f: impl FnMut(&[u32])) {
    fn fill(counts: &mut [u32], pos: usize, remaining: u32, f: &mut dyn FnMut(&[u32])) {
        if pos + 1 == counts.len() {
            counts[pos] = remaining;
            f(counts);
            return;
        }
        for c in 0..=remaining {
            counts[pos] = c;
            fill(counts, pos + 1, remaining - c, f);
        }
    }
    if k > 0 {
        fill(&mut vec![0u32; k], 0, d as u32, &mut f);
    }
}
