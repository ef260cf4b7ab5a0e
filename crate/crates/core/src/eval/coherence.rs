//! NPMI coherence, distinctiveness and credibility of topics.

use super::{cosine_distance, cosine_similarity};
use crate::corpus::{Corpus, Split};
use crate::error::{Error, Result};

const EPS: f64 = 1e-12;

/// Transaction-level product occurrence lists for co-occurrence counting.
#[derive(Debug, Clone)]
pub struct CoOccurrence {
    n_docs: usize,
    /// Sorted, deduplicated basket ids containing each product.
    postings: Vec<Vec<u32>>,
}

impl CoOccurrence {
    /// Counts over the training split.
    pub fn from_corpus(corpus: &Corpus) -> Self {
        Self::from_baskets(
            corpus.iter_split(Split::Train).map(|t| t.items.as_slice()),
            corpus.vocab_size(),
        )
    }

    pub fn from_baskets<'a, I>(baskets: I, vocab_size: usize) -> Self
    where
        I: IntoIterator<Item = &'a [u32]>,
    {
        let mut postings = vec![Vec::new(); vocab_size];
        let mut n_docs = 0;
        for (id, items) in baskets.into_iter().enumerate() {
            for &w in items {
                let list: &mut Vec<u32> = &mut postings[w as usize];
                if list.last() != Some(&(id as u32)) {
                    list.push(id as u32);
                }
            }
            n_docs += 1;
        }
        Self { n_docs, postings }
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn doc_count(&self, w: usize) -> usize {
        self.postings[w].len()
    }

    pub fn pair_count(&self, a: usize, b: usize) -> usize {
        let (x, y) = (&self.postings[a], &self.postings[b]);
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < x.len() && j < y.len() {
            match x[i].cmp(&y[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    /// Normalized PMI of one product pair, in `[-1, 1]`.
    pub fn pair_npmi(&self, a: usize, b: usize) -> f64 {
        let n = self.n_docs as f64;
        let joint = self.pair_count(a, b) as f64 / n;
        if joint == 0.0 {
            return -1.0;
        }
        let pa = self.doc_count(a) as f64 / n;
        let pb = self.doc_count(b) as f64 / n;
        let denom = -(joint + EPS).ln();
        if denom <= EPS {
            // always together, in every basket
            return 1.0;
        }
        let pmi = (joint + EPS).ln() - (pa * pb + EPS).ln();
        (pmi / denom).clamp(-1.0, 1.0)
    }
}

/// Indices of the `n` largest entries; ties go to the lower index.
pub fn top_indices(topic: &[f64], n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..topic.len()).collect();
    idx.sort_by(|&a, &b| topic[b].total_cmp(&topic[a]).then(a.cmp(&b)));
    idx.truncate(n);
    idx
}

/// Mean NPMI over unordered pairs of the topic's `top_n` most probable
/// products.
pub fn npmi(topic: &[f64], counts: &CoOccurrence, top_n: usize) -> Result<f64> {
    if top_n < 2 {
        return Err(Error::InvalidArgument("NPMI needs top_n >= 2".into()));
    }
    let top = top_indices(topic, top_n);
    if top.len() < 2 {
        return Err(Error::InvalidArgument("topic has fewer than two products".into()));
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..top.len() {
        for j in (i + 1)..top.len() {
            total += counts.pair_npmi(top[i], top[j]);
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

/// Minimum cosine distance from `topic` to any of `peers`; `None` without peers.
pub fn distinctiveness(topic: &[f64], peers: &[&[f64]]) -> Option<f64> {
    peers
        .iter()
        .map(|p| cosine_distance(topic, p))
        .min_by(f64::total_cmp)
}

/// Mean over samples of the best cosine similarity to any topic of that
/// sample. `samples` should exclude the topic's own sample.
pub fn credibility(topic: &[f64], samples: &[Vec<Vec<f64>>]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("credibility needs at least one other sample".into()));
    }
    let mut total = 0.0;
    for s in samples {
        total += s
            .iter()
            .map(|t| cosine_similarity(topic, t))
            .fold(0.0, f64::max);
    }
    Ok(total / samples.len() as f64)
}
