//! Seeded random number generation shared by every sampler.
//!
//! ChaCha8 is used throughout so that draws are reproducible across
//! platforms and crate versions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws from a Dirichlet distribution with the given concentration vector.
///
/// Each component is a Gamma(c, 1) draw, normalized. Components that
/// underflow to zero are floored so that the result stays strictly positive.
pub fn dirichlet<R: Rng + ?Sized>(rng: &mut R, concentration: &[f64]) -> Vec<f64> {
    if concentration.len() == 1 {
        return vec![1.0];
    }
    let mut draws: Vec<f64> = concentration
        .iter()
        .map(|&c| {
            let g = Gamma::new(c, 1.0).expect("positive concentration");
            g.sample(rng).max(f64::MIN_POSITIVE)
        })
        .collect();
    let total: f64 = draws.iter().sum();
    for d in draws.iter_mut() {
        *d /= total;
    }
    draws
}

/// Samples an index proportionally to nonnegative weights with a known total.
pub fn categorical<R: Rng + ?Sized>(rng: &mut R, weights: &[f64], total: f64) -> usize {
    let mut target = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if target < w {
            return i;
        }
        target -= w;
    }
    // Rounding can leave a sliver of mass past the last bucket.
    weights
        .iter()
        .rposition(|&w| w > 0.0)
        .expect("at least one positive weight")
}
