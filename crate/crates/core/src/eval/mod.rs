//! Topic- and model-quality metrics.

pub mod align;
pub mod coherence;
pub mod perplexity;
pub mod rhat;

pub use align::{align_greedy, AlignmentResult};
pub use coherence::{credibility, distinctiveness, npmi, CoOccurrence};
pub use perplexity::{perplexity, perplexity_of};
pub use rhat::{rhat, split_rhat};

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
}

/// `1 - cosine similarity`; in `[0, 1]` for nonnegative vectors.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    (1.0 - cosine_similarity(a, b)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_basics() {
        assert!((cosine_similarity(&[1.0, 0.0], &[2.0, 0.0]) - 1.0).abs() < 1e-15);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert_eq!(cosine_distance(&[0.3, 0.7], &[0.3, 0.7]), 0.0);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[0.0, 1.0]), 0.0);
    }
}
