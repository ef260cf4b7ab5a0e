use crate::corpus::{Corpus, Split};
use crate::error::{Error, Result};

/// Pseudo-count used when a held-out product has zero probability under
/// every topic.
pub const SMOOTHING_BETA: f64 = 0.01;

/// Held-out negative log-likelihood per token (not exponentiated).
///
/// The basket mixture is marginalized at its prior mean, the store mixture,
/// so each token contributes `-log sum_k theta[d][k] phi[k][w]`. Averaged
/// over every token of the corpus's test split.
pub fn perplexity(corpus: &Corpus, phi: &[Vec<f64>], theta: &[Vec<f64>]) -> Result<f64> {
    perplexity_of(
        corpus.iter_split(Split::Test).map(|t| (t.store, t.items.as_slice())),
        phi,
        theta,
    )
}

/// [`perplexity`] over an explicit set of `(store, items)` baskets.
pub fn perplexity_of<'a, I>(baskets: I, phi: &[Vec<f64>], theta: &[Vec<f64>]) -> Result<f64>
where
    I: IntoIterator<Item = (usize, &'a [u32])>,
{
    let k = phi.len();
    if k == 0 {
        return Err(Error::InvalidArgument("no topics".into()));
    }
    let v = phi[0].len();
    let mut nll = 0.0;
    let mut tokens = 0usize;
    for (store, items) in baskets {
        let mix = theta
            .get(store)
            .ok_or_else(|| Error::Dimension(format!("store {store} has no mixture")))?;
        if mix.len() != k {
            return Err(Error::Dimension(format!(
                "store mixture has {} topics, phi has {k}",
                mix.len()
            )));
        }
        for &w in items {
            let w = w as usize;
            let mut p: f64 = mix.iter().zip(phi).map(|(t, row)| t * row[w]).sum();
            if !(p > 0.0) {
                p = mix
                    .iter()
                    .zip(phi)
                    .map(|(t, row)| t * (row[w] + SMOOTHING_BETA) / (1.0 + v as f64 * SMOOTHING_BETA))
                    .sum();
            }
            nll -= p.ln();
            tokens += 1;
        }
    }
    if tokens == 0 {
        return Err(Error::InvalidArgument("no held-out tokens".into()));
    }
    Ok(nll / tokens as f64)
}
