//! Conditional posterior means of the integrated-out parameters.

use serde::{Deserialize, Serialize};

use super::sampler::{BlockGibbs, TopicTerms};
use super::state::SamplerState;

/// Point estimates of topics and store mixtures from one posterior sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSample {
    pub chain: usize,
    pub sweep: usize,
    /// K x V
    pub phi: Vec<Vec<f64>>,
    /// D x K
    pub theta: Vec<Vec<f64>>,
}

/// `theta[d][k] = (alpha_k + t_{d,k}) / (sum alpha + t_d)`.
pub fn theta_hat(state: &SamplerState, alpha: &[f64], n_stores: usize) -> Vec<Vec<f64>> {
    let k = state.k;
    let alpha_sum: f64 = alpha.iter().sum();
    (0..n_stores)
        .map(|d| {
            let denom = alpha_sum + state.store_table_total[d] as f64;
            (0..k)
                .map(|t| (alpha[t] + state.store_tables[d * k + t] as f64) / denom)
                .collect()
        })
        .collect()
}

/// `phi[k][v] = (beta_v + N_{k,v}) / (sum beta + N_k)`.
pub fn phi_hat(state: &SamplerState, beta: &[f64]) -> Vec<Vec<f64>> {
    let v = beta.len();
    let beta_sum: f64 = beta.iter().sum();
    (0..state.k)
        .map(|t| {
            let denom = beta_sum + state.topic_total[t] as f64;
            (0..v)
                .map(|w| (beta[w] + state.topic_word[t * v + w] as f64) / denom)
                .collect()
        })
        .collect()
}

/// Basket mixture estimate
/// `nu[k] = (N_k - a t_k) / (b + N) + theta[k] (a T + b) / (b + N)`,
/// where `T` is the basket's total table count.
pub fn nu_hat(
    basket_counts: &[u32],
    basket_tables: &[u32],
    theta: &[f64],
    discount: f64,
    strength: f64,
) -> Vec<f64> {
    let size: u32 = basket_counts.iter().sum();
    let tables: u32 = basket_tables.iter().sum();
    let denom = strength + size as f64;
    let mass = discount * tables as f64 + strength;
    basket_counts
        .iter()
        .zip(basket_tables)
        .zip(theta)
        .map(|((&n, &t), &th)| (n as f64 - discount * t as f64) / denom + th * mass / denom)
        .collect()
}

impl BlockGibbs<'_> {
    pub fn theta_hat(&self, state: &SamplerState) -> Vec<Vec<f64>> {
        theta_hat(state, self.alpha(), self.layout().n_stores())
    }

    /// Topic estimates; the fixed rows themselves when topics are held fixed.
    pub fn phi_hat(&self, state: &SamplerState) -> Vec<Vec<f64>> {
        match self.terms() {
            TopicTerms::Learned { beta, .. } => phi_hat(state, beta),
            TopicTerms::Fixed(rows) => rows.to_vec(),
        }
    }

    /// `nu` for basket `p`, computed on demand from `theta_hat`.
    pub fn nu_hat(&self, state: &SamplerState, theta: &[Vec<f64>], p: usize) -> Vec<f64> {
        let k = state.k;
        let d = self.layout().basket_store(p);
        nu_hat(
            &state.basket_topic[p * k..(p + 1) * k],
            &state.basket_tables[p * k..(p + 1) * k],
            &theta[d],
            self.discount(),
            self.strength(),
        )
    }

    pub fn estimate(&self, state: &SamplerState, chain: usize, sweep: usize) -> PosteriorSample {
        PosteriorSample {
            chain,
            sweep,
            phi: self.phi_hat(state),
            theta: self.theta_hat(state),
        }
    }
}
