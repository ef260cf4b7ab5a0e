//! Multi-chain runs and refitting store mixtures against fixed topics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{sample_schedule, Hyper, StmConfig};
use super::estimate::PosteriorSample;
use super::sampler::BlockGibbs;
use super::state::TokenLayout;
use crate::corpus::Corpus;
use crate::error::Result;
use crate::pdp::StirlingCache;
use crate::rng::seeded;

/// Joint log-probability recorded every few sweeps of one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub chain: usize,
    pub sweeps: Vec<usize>,
    pub log_prob: Vec<f64>,
}

impl Trace {
    /// Values recorded strictly after `burn_in`.
    pub fn after(&self, burn_in: usize) -> Vec<f64> {
        self.sweeps
            .iter()
            .zip(&self.log_prob)
            .filter(|(&s, _)| s > burn_in)
            .map(|(_, &v)| v)
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainRun {
    pub samples: Vec<PosteriorSample>,
    pub traces: Vec<Trace>,
}

fn run_one(
    layout: &TokenLayout,
    config: &StmConfig,
    cache: &StirlingCache,
    chain: usize,
) -> Result<(Vec<PosteriorSample>, Trace)> {
    let mut rng = seeded(config.seed.wrapping_add(chain as u64));
    let mut sampler = BlockGibbs::new(layout, config, cache)?;
    let mut state = sampler.init(&mut rng);
    let schedule = config.sample_sweeps();
    let mut next = schedule.iter().peekable();
    let mut samples = Vec::with_capacity(schedule.len());
    let mut trace = Trace {
        chain,
        sweeps: Vec::new(),
        log_prob: Vec::new(),
    };
    for sweep in 1..=config.iters {
        sampler.sweep(&mut state, &mut rng);
        if sweep % config.trace_every == 0 {
            trace.sweeps.push(sweep);
            trace.log_prob.push(sampler.joint_log_prob(&state));
        }
        if next.peek() == Some(&&sweep) {
            next.next();
            samples.push(sampler.estimate(&state, chain, sweep));
        }
    }
    log::debug!("chain {chain}: {} samples", samples.len());
    Ok((samples, trace))
}

/// Runs `config.chains` independent chains in parallel; chain `c` is seeded
/// with `seed + c`. Samples come back ordered by chain, then sweep.
pub fn run_chains(corpus: &Corpus, config: &StmConfig) -> Result<ChainRun> {
    config.validate()?;
    let layout = TokenLayout::from_corpus(corpus);
    let cache = StirlingCache::new(config.discount, layout.max_basket_len().max(1))?;
    let results: Vec<_> = (0..config.chains)
        .into_par_iter()
        .map(|c| run_one(&layout, config, &cache, c))
        .collect::<Result<_>>()?;
    let mut samples = Vec::new();
    let mut traces = Vec::new();
    for (s, t) in results {
        samples.extend(s);
        traces.push(t);
    }
    Ok(ChainRun { samples, traces })
}

/// Cadence and priors for refitting mixtures with fixed topics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefitConfig {
    /// Store-level prior; symmetric `1000 / K` when `None`.
    pub alpha: Option<Hyper>,
    pub discount: f64,
    pub strength: f64,
    pub burn_in: usize,
    pub thin: usize,
    pub samples: usize,
    pub seed: u64,
    pub trace_every: usize,
}

fn default_trace_every() -> usize {
    10
}

impl Default for RefitConfig {
    /// One chain, burn-in 1,000, thin 500, 30 samples.
    fn default() -> Self {
        Self {
            alpha: None,
            discount: 0.5,
            strength: 3.0,
            burn_in: 1_000,
            thin: 500,
            samples: 30,
            seed: 0,
            trace_every: default_trace_every(),
        }
    }
}

impl RefitConfig {
    pub fn iters(&self) -> usize {
        self.burn_in + self.thin * self.samples
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefitRun {
    /// One D x K' matrix per recorded sample.
    pub theta_samples: Vec<Vec<Vec<f64>>>,
    pub trace: Trace,
}

impl RefitRun {
    /// Average of the recorded store mixtures.
    pub fn theta_mean(&self) -> Vec<Vec<f64>> {
        let n = self.theta_samples.len() as f64;
        let mut mean = self.theta_samples[0].clone();
        for row in mean.iter_mut() {
            row.iter_mut().for_each(|x| *x = 0.0);
        }
        for sample in &self.theta_samples {
            for (m, r) in mean.iter_mut().zip(sample) {
                for (a, b) in m.iter_mut().zip(r) {
                    *a += b / n;
                }
            }
        }
        mean
    }
}

/// Block Gibbs over store and basket mixtures with the topic rows held fixed.
pub fn refit_fixed_topics(corpus: &Corpus, topics: &[Vec<f64>], config: &RefitConfig) -> Result<RefitRun> {
    let layout = TokenLayout::from_corpus(corpus);
    let k = topics.len();
    let alpha = config
        .alpha
        .clone()
        .unwrap_or(Hyper::Symmetric(1000.0 / k.max(1) as f64))
        .resolve(k)?;
    let cache = StirlingCache::new(config.discount, layout.max_basket_len().max(1))?;
    let mut sampler =
        BlockGibbs::with_fixed_topics(&layout, topics, alpha, config.discount, config.strength, &cache)?;
    let mut rng = seeded(config.seed);
    let mut state = sampler.init(&mut rng);
    let schedule = sample_schedule(config.iters(), config.burn_in, config.thin.max(1));
    let mut next = schedule.iter().peekable();
    let mut run = RefitRun {
        theta_samples: Vec::with_capacity(schedule.len()),
        trace: Trace {
            chain: 0,
            sweeps: Vec::new(),
            log_prob: Vec::new(),
        },
    };
    for sweep in 1..=config.iters() {
        sampler.sweep(&mut state, &mut rng);
        if sweep % config.trace_every.max(1) == 0 {
            run.trace.sweeps.push(sweep);
            run.trace.log_prob.push(sampler.joint_log_prob(&state));
        }
        if next.peek() == Some(&&sweep) {
            next.next();
            run.theta_samples.push(sampler.theta_hat(&state));
        }
    }
    Ok(run)
}
