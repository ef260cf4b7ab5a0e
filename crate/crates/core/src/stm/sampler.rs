//! Collapsed block Gibbs sampler over topic assignments and table indicators.
//!
//! Each token update
//!
//! 1. draws the token's table indicator from `t_k / n_k` (the arrangement of
//!    indicators inside a (basket, topic) group is uniform given the counts,
//!    so the stored indicator is swapped with a random partner when needed),
//! 2. removes the token from the counts,
//! 3. evaluates the `2K` joint conditionals for (topic, opens-a-table),
//!    where joining an occupied table is impossible for topics with no table
//!    in the basket,
//! 4. samples one and adds the token back.
//!
//! A token that is the only table head of a topic that other tokens in the
//! basket still use cannot leave: its conditional is a point mass on the
//! current value, so the update is skipped.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use super::config::StmConfig;
use super::state::{SamplerState, TokenLayout};
use crate::error::{Error, Result};
use crate::pdp::{log_beta_vec, log_pochhammer, StirlingCache, StirlingTable};
use crate::rng::categorical;
use statrs::function::gamma::ln_gamma;

/// Where the per-topic product probabilities come from.
#[derive(Debug, Clone)]
pub enum TopicTerms<'a> {
    /// Topics integrated out; read from the running term counts.
    Learned { beta: Vec<f64>, beta_sum: f64 },
    /// Topics held fixed at the given `K x V` rows.
    Fixed(&'a [Vec<f64>]),
}

pub struct BlockGibbs<'a> {
    layout: &'a TokenLayout,
    token_basket: Vec<u32>,
    k: usize,
    alpha: Vec<f64>,
    alpha_sum: f64,
    discount: f64,
    strength: f64,
    terms: TopicTerms<'a>,
    stirling: Arc<StirlingTable>,
    shuffle: bool,
    order: Vec<u32>,
    weights: Vec<f64>,
}

impl<'a> BlockGibbs<'a> {
    /// Sampler that learns the topics.
    pub fn new(layout: &'a TokenLayout, config: &StmConfig, cache: &StirlingCache) -> Result<Self> {
        config.validate()?;
        let beta = config.beta.resolve(layout.vocab_size())?;
        let beta_sum = beta.iter().sum();
        Self::build(
            layout,
            config.k,
            config.alpha.resolve(config.k)?,
            config.discount,
            config.strength,
            TopicTerms::Learned { beta, beta_sum },
            cache,
            config.shuffle_tokens,
        )
    }

    /// Sampler that keeps the topic rows fixed and only updates the store and
    /// basket mixtures.
    pub fn with_fixed_topics(
        layout: &'a TokenLayout,
        topics: &'a [Vec<f64>],
        alpha: Vec<f64>,
        discount: f64,
        strength: f64,
        cache: &StirlingCache,
    ) -> Result<Self> {
        if topics.is_empty() {
            return Err(Error::InvalidArgument("no fixed topics given".into()));
        }
        for (i, row) in topics.iter().enumerate() {
            if row.len() != layout.vocab_size() {
                return Err(Error::Dimension(format!(
                    "topic {i} has {} entries, vocabulary has {}",
                    row.len(),
                    layout.vocab_size()
                )));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-6 || row.iter().any(|&x| !(x >= 0.0)) {
                return Err(Error::InvalidArgument(format!(
                    "topic {i} is not a probability vector (sums to {s})"
                )));
            }
        }
        Self::build(
            layout,
            topics.len(),
            alpha,
            discount,
            strength,
            TopicTerms::Fixed(topics),
            cache,
            false,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        layout: &'a TokenLayout,
        k: usize,
        alpha: Vec<f64>,
        discount: f64,
        strength: f64,
        terms: TopicTerms<'a>,
        cache: &StirlingCache,
        shuffle: bool,
    ) -> Result<Self> {
        if alpha.len() != k {
            return Err(Error::Dimension(format!("alpha has {} entries, K = {k}", alpha.len())));
        }
        if (cache.discount() - discount).abs() > 0.0 {
            return Err(Error::InvalidArgument(format!(
                "Stirling cache built for discount {}, sampler uses {discount}",
                cache.discount()
            )));
        }
        if !(strength > -discount) {
            return Err(Error::InvalidArgument(format!("strength {strength} <= -discount")));
        }
        let alpha_sum = alpha.iter().sum();
        Ok(Self {
            layout,
            token_basket: layout.token_baskets(),
            k,
            alpha,
            alpha_sum,
            discount,
            strength,
            terms,
            stirling: cache.snapshot(layout.max_basket_len().max(1)),
            shuffle,
            order: (0..layout.n_tokens() as u32).collect(),
            weights: vec![0.0; 2 * k],
        })
    }

    pub fn layout(&self) -> &TokenLayout {
        self.layout
    }

    pub fn n_topics(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn terms(&self) -> &TopicTerms<'a> {
        &self.terms
    }

    /// Seats tokens one at a time in corpus order, each drawn from the block
    /// conditional given the tokens already seated. The result satisfies the
    /// table constraints by construction.
    pub fn init<R: Rng + ?Sized>(&mut self, rng: &mut R) -> SamplerState {
        let track = matches!(self.terms, TopicTerms::Learned { .. });
        let mut state = SamplerState::empty(self.layout, self.k, track);
        for p in 0..self.layout.n_baskets() {
            let d = self.layout.basket_store(p);
            for (seated, i) in self.layout.basket(p).enumerate() {
                let w = self.layout.words[i] as usize;
                let (topic, head) = self.draw(&state, p, d, w, seated, rng);
                self.add(&mut state, i, p, d, w, topic, head);
            }
        }
        state
    }

    /// One full pass over every token.
    pub fn sweep<R: Rng + ?Sized>(&mut self, state: &mut SamplerState, rng: &mut R) {
        if self.shuffle {
            self.order.shuffle(rng);
        }
        for idx in 0..self.order.len() {
            let i = self.order[idx] as usize;
            self.update_token(state, i, rng);
        }
    }

    /// Resamples the topic and table indicator of token `i`.
    pub fn update_token<R: Rng + ?Sized>(&mut self, state: &mut SamplerState, i: usize, rng: &mut R) {
        let k = self.k;
        let p = self.token_basket[i] as usize;
        let d = self.layout.basket_store(p);
        let w = self.layout.words[i] as usize;
        let current = state.z[i] as usize;
        let n = state.basket_topic[p * k + current];
        let t = state.basket_tables[p * k + current];

        let head = t == n || rng.random::<f64>() * (n as f64) < t as f64;
        if head != state.u[i] {
            self.swap_indicator(state, i, p, current, head, rng);
        }
        if head && t == 1 && n > 1 {
            return;
        }

        self.remove(state, i, p, d, w, current, head);
        let seated = self.layout.basket_len(p) - 1;
        let (topic, new_head) = self.draw(state, p, d, w, seated, rng);
        self.add(state, i, p, d, w, topic, new_head);
    }

    /// Gives token `i` indicator `head`, passing its old indicator to a random
    /// token of the same basket and topic that currently holds `head`.
    fn swap_indicator<R: Rng + ?Sized>(
        &self,
        state: &mut SamplerState,
        i: usize,
        p: usize,
        topic: usize,
        head: bool,
        rng: &mut R,
    ) {
        let mut chosen = None;
        let mut seen = 0u32;
        for j in self.layout.basket(p) {
            if j != i && state.z[j] as usize == topic && state.u[j] == head {
                seen += 1;
                if rng.random_range(0..seen) == 0 {
                    chosen = Some(j);
                }
            }
        }
        let j = chosen.expect("a partner with the opposite indicator exists");
        state.u[j] = !head;
        state.u[i] = head;
    }

    #[inline]
    fn term(&self, state: &SamplerState, topic: usize, w: usize) -> f64 {
        match &self.terms {
            TopicTerms::Learned { beta, beta_sum } => {
                let v = self.layout.vocab_size();
                (beta[w] + state.topic_word[topic * v + w] as f64)
                    / (beta_sum + state.topic_total[topic] as f64)
            }
            TopicTerms::Fixed(rows) => rows[topic][w].max(f64::MIN_POSITIVE),
        }
    }

    /// Samples (topic, opens-a-table) for a token joining basket `p` that
    /// already holds `seated` other tokens.
    fn draw<R: Rng + ?Sized>(
        &mut self,
        state: &SamplerState,
        p: usize,
        d: usize,
        w: usize,
        seated: usize,
        rng: &mut R,
    ) -> (usize, bool) {
        let k = self.k;
        let b = self.strength;
        let a = self.discount;
        let denom = b + seated as f64;
        let basket_tables = state.basket_table_total[p] as f64;
        let new_common =
            (b + a * basket_tables) / denom / (self.alpha_sum + state.store_table_total[d] as f64);
        let mut total = 0.0;
        for topic in 0..k {
            let n = state.basket_topic[p * k + topic] as usize;
            let t = state.basket_tables[p * k + topic] as usize;
            let word = self.term(state, topic, w);
            let inv_n1 = 1.0 / (n as f64 + 1.0);
            let open = (self.alpha[topic] + state.store_tables[d * k + topic] as f64)
                * new_common
                * self.stirling.new_table_ratio(n, t)
                * (t as f64 + 1.0)
                * inv_n1
                * word;
            let join = if t > 0 {
                self.stirling.same_table_ratio(n, t) / denom
                    * (n - t + 1) as f64
                    * inv_n1
                    * word
            } else {
                0.0
            };
            self.weights[topic] = open;
            self.weights[k + topic] = join;
            total += open + join;
        }
        debug_assert!(total.is_finite() && total > 0.0, "degenerate conditional {total}");
        let j = categorical(rng, &self.weights, total);
        if j < k {
            (j, true)
        } else {
            (j - k, false)
        }
    }

    #[allow(clippy::too_many_arguments)]
    #[inline]
    fn add(&self, state: &mut SamplerState, i: usize, p: usize, d: usize, w: usize, topic: usize, head: bool) {
        let k = self.k;
        state.z[i] = topic as u32;
        state.u[i] = head;
        state.basket_topic[p * k + topic] += 1;
        if head {
            state.basket_tables[p * k + topic] += 1;
            state.basket_table_total[p] += 1;
            state.store_tables[d * k + topic] += 1;
            state.store_table_total[d] += 1;
        }
        if state.track_words {
            state.topic_word[topic * self.layout.vocab_size() + w] += 1;
        }
        state.topic_total[topic] += 1;
    }

    #[allow(clippy::too_many_arguments)]
    #[inline]
    fn remove(&self, state: &mut SamplerState, _i: usize, p: usize, d: usize, w: usize, topic: usize, head: bool) {
        let k = self.k;
        state.basket_topic[p * k + topic] -= 1;
        if head {
            state.basket_tables[p * k + topic] -= 1;
            state.basket_table_total[p] -= 1;
            state.store_tables[d * k + topic] -= 1;
            state.store_table_total[d] -= 1;
        }
        if state.track_words {
            state.topic_word[topic * self.layout.vocab_size() + w] -= 1;
        }
        state.topic_total[topic] -= 1;
    }

    /// Collapsed joint log-probability of `(z, u, w)`, including the
    /// `t! (n - t)! / n!` arrangement factor of the indicator representation.
    ///
    /// With fixed topics the product term is `sum_i log phi[z_i][w_i]`.
    pub fn joint_log_prob(&self, state: &SamplerState) -> f64 {
        let k = self.k;
        let layout = self.layout;
        let mut lp = 0.0;

        let prior = log_beta_vec(&self.alpha).expect("validated alpha");
        let mut buf = vec![0.0; k];
        for d in 0..layout.n_stores() {
            for (topic, slot) in buf.iter_mut().enumerate() {
                *slot = self.alpha[topic] + state.store_tables[d * k + topic] as f64;
            }
            lp += log_beta_vec(&buf).expect("positive") - prior;
        }

        for p in 0..layout.n_baskets() {
            let size = layout.basket_len(p);
            lp += log_pochhammer(self.strength, self.discount, state.basket_table_total[p] as usize)
                .expect("b > -a")
                - log_pochhammer(self.strength, 1.0, size).expect("b > -a");
            for topic in 0..k {
                let n = state.basket_topic[p * k + topic] as usize;
                if n == 0 {
                    continue;
                }
                let t = state.basket_tables[p * k + topic] as usize;
                lp += self.stirling.log(n, t) + ln_factorial(t) + ln_factorial(n - t)
                    - ln_factorial(n);
            }
        }

        match &self.terms {
            TopicTerms::Learned { beta, .. } => {
                let v = layout.vocab_size();
                let prior = log_beta_vec(beta).expect("validated beta");
                let mut row = vec![0.0; v];
                for topic in 0..k {
                    for (w, slot) in row.iter_mut().enumerate() {
                        *slot = beta[w] + state.topic_word[topic * v + w] as f64;
                    }
                    lp += log_beta_vec(&row).expect("positive") - prior;
                }
            }
            TopicTerms::Fixed(rows) => {
                for (i, &w) in layout.words.iter().enumerate() {
                    lp += rows[state.z[i] as usize][w as usize].max(f64::MIN_POSITIVE).ln();
                }
            }
        }
        lp
    }
}

fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// Builds a learned-topics sampler and its seeded initial state.
pub fn init_state<R: Rng + ?Sized>(
    layout: &TokenLayout,
    config: &StmConfig,
    cache: &StirlingCache,
    rng: &mut R,
) -> Result<SamplerState> {
    let mut sampler = BlockGibbs::new(layout, config, cache)?;
    Ok(sampler.init(rng))
}
