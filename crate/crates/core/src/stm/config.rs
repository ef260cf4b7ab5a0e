use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A Dirichlet hyperparameter: either one value shared by every component or
/// an explicit vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Hyper {
    Symmetric(f64),
    Vector(Vec<f64>),
}

impl Hyper {
    pub fn resolve(&self, len: usize) -> Result<Vec<f64>> {
        let v = match self {
            Hyper::Symmetric(x) => vec![*x; len],
            Hyper::Vector(v) if v.len() == len => v.clone(),
            Hyper::Vector(v) => {
                return Err(Error::Dimension(format!(
                    "hyperparameter vector has {} entries, expected {len}",
                    v.len()
                )))
            }
        };
        if let Some(bad) = v.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "Dirichlet hyperparameters must be positive, got {bad}"
            )));
        }
        Ok(v)
    }
}

/// Settings for the segmented topic model and its block Gibbs sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StmConfig {
    pub k: usize,
    /// Store-level Dirichlet prior over topics.
    pub alpha: Hyper,
    /// Topic-level Dirichlet prior over products.
    pub beta: Hyper,
    /// Pitman-Yor discount `a`.
    pub discount: f64,
    /// Pitman-Yor strength `b`.
    pub strength: f64,
    pub iters: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub chains: usize,
    pub seed: u64,
    /// Visit tokens in a fresh random order every sweep instead of corpus order.
    #[serde(default)]
    pub shuffle_tokens: bool,
    /// Sweeps between joint log-probability evaluations.
    #[serde(default = "default_trace_every")]
    pub trace_every: usize,
}

fn default_trace_every() -> usize {
    10
}

impl StmConfig {
    /// `alpha_k = 1000 / K`, `beta_v = 0.01`, `a = 0.5`, `b = 3`, with the
    /// long-run cadence of 4 chains x 100k sweeps.
    pub fn with_topics(k: usize) -> Self {
        Self {
            k,
            alpha: Hyper::Symmetric(1000.0 / k.max(1) as f64),
            beta: Hyper::Symmetric(0.01),
            discount: 0.5,
            strength: 3.0,
            iters: 100_000,
            burn_in: 80_000,
            thin: 5_000,
            chains: 4,
            seed: 0,
            shuffle_tokens: false,
            trace_every: default_trace_every(),
        }
    }

    /// Same priors, desk-scale cadence: 4 chains x 2,000 sweeps.
    pub fn desk(k: usize) -> Self {
        Self {
            iters: 2_000,
            burn_in: 1_000,
            thin: 200,
            ..Self::with_topics(k)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("K must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.discount) {
            return Err(Error::InvalidArgument(format!(
                "discount must lie in [0, 1), got {}",
                self.discount
            )));
        }
        if !(self.strength + self.discount > 0.0) || !(self.strength > -self.discount) {
            return Err(Error::InvalidArgument(format!(
                "strength must exceed -discount, got b = {}",
                self.strength
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidArgument("thin must be at least 1".into()));
        }
        if self.burn_in > self.iters {
            return Err(Error::InvalidArgument("burn-in exceeds iteration count".into()));
        }
        if self.chains == 0 {
            return Err(Error::InvalidArgument("need at least one chain".into()));
        }
        if self.trace_every == 0 {
            return Err(Error::InvalidArgument("trace_every must be at least 1".into()));
        }
        self.alpha.resolve(self.k)?;
        if let Hyper::Symmetric(b) = self.beta {
            Hyper::Symmetric(b).resolve(1)?;
        }
        Ok(())
    }

    /// Sweeps (1-based) after which a posterior sample is recorded.
    pub fn sample_sweeps(&self) -> Vec<usize> {
        sample_schedule(self.iters, self.burn_in, self.thin)
    }
}

/// Sweeps `s` with `s > burn_in` and `(s - burn_in) % thin == 0`.
pub fn sample_schedule(iters: usize, burn_in: usize, thin: usize) -> Vec<usize> {
    (burn_in + thin..=iters).step_by(thin.max(1)).collect()
}
