use serde::{Deserialize, Serialize};

use super::cosine_similarity;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentResult {
    /// `(index in A, index in B, cosine similarity)`, best pair first.
    pub pairs: Vec<(usize, usize, f64)>,
    pub unmatched_a: Vec<usize>,
    pub unmatched_b: Vec<usize>,
}

impl AlignmentResult {
    pub fn mean_similarity(&self) -> f64 {
        if self.pairs.is_empty() {
            return 0.0;
        }
        self.pairs.iter().map(|p| p.2).sum::<f64>() / self.pairs.len() as f64
    }

    /// For every index of A, its partner in B.
    pub fn partner_of_a(&self) -> Vec<Option<usize>> {
        let n = self.pairs.len() + self.unmatched_a.len();
        let mut out = vec![None; n];
        for &(a, b, _) in &self.pairs {
            out[a] = Some(b);
        }
        out
    }
}

/// Repeatedly pairs the most similar pair of still-unpaired topics until one
/// side runs out. Ties go to the lower `(a, b)` index pair.
pub fn align_greedy(a: &[Vec<f64>], b: &[Vec<f64>]) -> AlignmentResult {
    let mut cands: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            cands.push((cosine_similarity(x, y), i, j));
        }
    }
    cands.sort_by(|p, q| q.0.total_cmp(&p.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut pairs = Vec::with_capacity(a.len().min(b.len()));
    for (s, i, j) in cands {
        if pairs.len() == a.len().min(b.len()) {
            break;
        }
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            pairs.push((i, j, s));
        }
    }
    AlignmentResult {
        pairs,
        unmatched_a: (0..a.len()).filter(|&i| !used_a[i]).collect(),
        unmatched_b: (0..b.len()).filter(|&j| !used_b[j]).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{dirichlet, seeded};

    #[test]
    fn self_alignment_is_identity() {
        let mut rng = seeded(2);
        let a: Vec<Vec<f64>> = (0..6).map(|_| dirichlet(&mut rng, &[0.1; 30])).collect();
        let r = align_greedy(&a, &a);
        let total: f64 = r.pairs.iter().map(|p| p.2).sum();
        assert!((total - 6.0).abs() < 1e-12);
        assert!(r.pairs.iter().all(|&(i, j, _)| i == j));
    }

    #[test]
    fn unequal_sizes() {
        let mut rng = seeded(3);
        let a: Vec<Vec<f64>> = (0..104).map(|_| dirichlet(&mut rng, &[0.05; 40])).collect();
        let b: Vec<Vec<f64>> = (0..96).map(|_| dirichlet(&mut rng, &[0.05; 40])).collect();
        let r = align_greedy(&a, &b);
        assert_eq!(r.pairs.len(), 96);
        assert_eq!(r.unmatched_a.len(), 8);
        assert!(r.unmatched_b.is_empty());
        for w in r.pairs.windows(2) {
            assert!(w[0].2 >= w[1].2);
        }
    }

    #[test]
    fn first_pair_is_global_argmax() {
        let mut rng = seeded(4);
        let a: Vec<Vec<f64>> = (0..7).map(|_| dirichlet(&mut rng, &[0.3; 12])).collect();
        let b: Vec<Vec<f64>> = (0..9).map(|_| dirichlet(&mut rng, &[0.3; 12])).collect();
        let mut best = (f64::MIN, 0, 0);
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let s = cosine_similarity(x, y);
                if s > best.0 {
                    best = (s, i, j);
                }
            }
        }
        let r = align_greedy(&a, &b);
        assert_eq!((r.pairs[0].0, r.pairs[0].1), (best.1, best.2));
    }
}
