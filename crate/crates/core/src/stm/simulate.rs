//! Forward simulation of the segmented topic model.
//!
//! Basket mixtures are never materialized: each basket seats its tokens by
//! the two-parameter Chinese restaurant process whose tables draw their topic
//! from the store mixture.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::StmConfig;
use crate::corpus::{Corpus, Split, Transaction, Vocabulary};
use crate::error::{Error, Result};
use crate::rng::{categorical, dirichlet, seeded};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub stores: usize,
    pub transactions_per_store: usize,
    pub basket_size: usize,
    pub vocab_size: usize,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    /// Baskets keep duplicate products.
    pub corpus: Corpus,
    /// K x V
    pub phi: Vec<Vec<f64>>,
    /// D x K
    pub theta: Vec<Vec<f64>>,
    /// True topic of every token, per transaction.
    pub topics: Vec<Vec<u32>>,
}

/// Ground truth written next to simulated transactions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationTruth {
    pub vocabulary: Vec<String>,
    pub stores: Vec<String>,
    pub phi: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
}

impl Simulation {
    pub fn truth(&self) -> SimulationTruth {
        SimulationTruth {
            vocabulary: self.corpus.vocabulary().terms().to_vec(),
            stores: self.corpus.store_ids().to_vec(),
            phi: self.phi.clone(),
            theta: self.theta.clone(),
        }
    }
}

/// Seats `size` customers and returns the topic served to each.
fn seat_basket<R: Rng + ?Sized>(
    rng: &mut R,
    size: usize,
    theta: &[f64],
    discount: f64,
    strength: f64,
) -> Vec<u32> {
    // (topic, customers) per table
    let mut tables: Vec<(u32, usize)> = Vec::new();
    let mut out = Vec::with_capacity(size);
    let mut weights = Vec::new();
    for n in 0..size {
        let open = strength + discount * tables.len() as f64;
        weights.clear();
        weights.extend(tables.iter().map(|&(_, c)| c as f64 - discount));
        weights.push(open);
        let total = strength + n as f64;
        let j = categorical(rng, &weights, total);
        let topic = if j == tables.len() {
            let topic = categorical(rng, theta, 1.0) as u32;
            tables.push((topic, 1));
            topic
        } else {
            tables[j].1 += 1;
            tables[j].0
        };
        out.push(topic);
    }
    out
}

pub fn simulate(config: &StmConfig, spec: &SimulationSpec, seed: u64) -> Result<Simulation> {
    config.validate()?;
    if spec.stores == 0 || spec.transactions_per_store == 0 || spec.basket_size == 0 {
        return Err(Error::InvalidArgument(
            "simulation needs at least one store, transaction and item".into(),
        ));
    }
    let alpha = config.alpha.resolve(config.k)?;
    let beta = config.beta.resolve(spec.vocab_size)?;
    let mut rng = seeded(seed);

    let phi: Vec<Vec<f64>> = (0..config.k).map(|_| dirichlet(&mut rng, &beta)).collect();
    let theta: Vec<Vec<f64>> = (0..spec.stores).map(|_| dirichlet(&mut rng, &alpha)).collect();

    let mut transactions = Vec::with_capacity(spec.stores * spec.transactions_per_store);
    let mut topics = Vec::with_capacity(transactions.capacity());
    for (d, th) in theta.iter().enumerate() {
        for _ in 0..spec.transactions_per_store {
            let z = seat_basket(&mut rng, spec.basket_size, th, config.discount, config.strength);
            let items = z
                .iter()
                .map(|&k| categorical(&mut rng, &phi[k as usize], 1.0) as u32)
                .collect();
            transactions.push(Transaction {
                store: d,
                items,
                split: Split::Train,
            });
            topics.push(z);
        }
    }
    let corpus = Corpus::from_parts(
        Vocabulary::synthetic(spec.vocab_size)?,
        (0..spec.stores).map(|d| format!("s{d}")).collect(),
        transactions,
        spec.basket_size,
    )?;
    Ok(Simulation {
        corpus,
        phi,
        theta,
        topics,
    })
}
