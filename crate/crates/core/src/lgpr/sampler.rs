//! Metropolis-within-Gibbs for the GP regression.
//!
//! The scalars `(log alpha, log rho, log sigma)` are updated one at a time by
//! random-walk Metropolis on their marginal posterior, with `beta`
//! integrated out under its Gaussian prior (`y ~ N(0, Sigma + s^2 X X')`).
//! After each sweep over the scalars `beta` is drawn exactly from its
//! Gaussian full conditional. Step sizes adapt towards an acceptance rate of
//! 0.3 during burn-in and stay fixed afterwards.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{factorize, marginal_cov, mvn_log_density};
use super::{GPDataset, GPParams, GPPriors};
use crate::error::{Error, Result};
use crate::eval::split_rhat;
use crate::rng::{seeded, SeededRng};

const TARGET_ACCEPT: f64 = 0.3;
const ADAPT_BATCH: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GpModel {
    /// Linear model plus GP residual.
    Lgpr,
    /// Linear model alone: amplitude held at zero.
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcConfig {
    pub chains: usize,
    pub iters: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            chains: 2,
            iters: 2000,
            burn_in: 1000,
            thin: 5,
            seed: 1,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 || self.thin == 0 || self.burn_in >= self.iters {
            return Err(Error::InvalidArgument(format!(
                "need chains >= 1, thin >= 1 and burn_in < iters: {self:?}"
            )));
        }
        Ok(())
    }

    fn keep(&self, iter: usize) -> bool {
        iter >= self.burn_in && (iter + 1 - self.burn_in).is_multiple_of(self.thin)
    }

    pub fn draws_per_chain(&self) -> usize {
        (self.burn_in..self.iters).filter(|&i| self.keep(i)).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhatEntry {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDraws {
    pub model: GpModel,
    pub priors: GPPriors,
    pub mcmc: McmcConfig,
    /// `draws[c]` holds the kept draws of chain `c`.
    pub draws: Vec<Vec<GPParams>>,
    /// Unnormalized log posterior at every kept draw.
    pub log_post: Vec<Vec<f64>>,
    /// Post-burn-in acceptance rate per chain and updated scalar.
    pub acceptance: Vec<Vec<f64>>,
    /// Split R-hat; empty unless there are two chains of ten draws or more.
    pub rhat: Vec<RhatEntry>,
}

impl PosteriorDraws {
    pub fn iter(&self) -> impl Iterator<Item = &GPParams> + '_ {
        self.draws.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.draws.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn beta_mean(&self) -> Vec<f64> {
        let p = self.iter().next().map_or(0, |d| d.beta.len());
        let mut m = vec![0.0; p];
        for d in self.iter() {
            for (acc, b) in m.iter_mut().zip(&d.beta) {
                *acc += b;
            }
        }
        let n = self.len() as f64;
        m.iter().map(|v| v / n).collect()
    }

    /// Largest R-hat over every monitored quantity.
    pub fn max_rhat(&self) -> Option<f64> {
        self.rhat.iter().map(|r| r.value).reduce(f64::max)
    }

    fn scalar_traces(&self, f: impl Fn(&GPParams) -> f64) -> Vec<Vec<f64>> {
        self.draws.iter().map(|c| c.iter().map(&f).collect()).collect()
    }

    fn compute_rhat(&mut self) {
        self.rhat.clear();
        if self.draws.len() < 2 || self.draws[0].len() < 10 {
            return;
        }
        let mut monitored = vec![("log_post".to_string(), self.log_post.clone())];
        if self.model == GpModel::Lgpr {
            monitored.push(("amplitude".into(), self.scalar_traces(|d| d.amplitude)));
            monitored.push(("length_scale".into(), self.scalar_traces(|d| d.length_scale)));
        }
        monitored.push(("sigma".into(), self.scalar_traces(|d| d.sigma)));
        let p = self.draws[0][0].beta.len();
        for j in 0..p {
            monitored.push((format!("beta[{j}]"), self.scalar_traces(|d| d.beta[j])));
        }
        for (name, traces) in monitored {
            if let Ok(value) = split_rhat(&traces) {
                self.rhat.push(RhatEntry { name, value });
            }
        }
    }
}

struct Target<'a> {
    data: &'a GPDataset,
    priors: GPPriors,
    model: GpModel,
    /// `s^2 X X'`, the covariance contributed by the coefficient prior.
    beta_cov: DMatrix<f64>,
}

impl<'a> Target<'a> {
    fn new(data: &'a GPDataset, priors: GPPriors, model: GpModel) -> Self {
        let s2 = priors.beta_sd * priors.beta_sd;
        let beta_cov = &data.x * data.x.transpose() * s2;
        Self {
            data,
            priors,
            model,
            beta_cov,
        }
    }

    /// Scalars on their natural scale. The linear model pins the amplitude
    /// at zero; its length scale is never used and is reported at the prior
    /// mean.
    fn scalars(&self, th: &[f64; 3]) -> (f64, f64, f64) {
        match self.model {
            GpModel::Lgpr => (th[0].exp(), th[1].exp(), th[2].exp()),
            GpModel::Linear => (
                0.0,
                self.priors.length_scale_scale / (self.priors.length_scale_shape - 1.0).max(1.0),
                th[2].exp(),
            ),
        }
    }

    fn active(&self) -> &'static [usize] {
        match self.model {
            GpModel::Lgpr => &[0, 1, 2],
            GpModel::Linear => &[2],
        }
    }

    /// Log marginal posterior of the log-scalars, `beta` integrated out.
    fn log_marginal(&self, th: &[f64; 3]) -> Option<f64> {
        let (a, rho, sigma) = self.scalars(th);
        let cov = marginal_cov(self.data, a, rho, sigma) + &self.beta_cov;
        let chol = factorize(cov, a).ok()?;
        let ll = mvn_log_density(&chol, &self.data.y);
        let jacobian: f64 = self.active().iter().map(|&c| th[c]).sum();
        let lp = ll + self.priors.log_scalar_prior(self.model, a, rho, sigma) + jacobian;
        lp.is_finite().then_some(lp)
    }

    /// Draws `beta` from `N(m, P^-1)` with `P = X' Sigma^-1 X + I / s^2` and
    /// `m = P^-1 X' Sigma^-1 y`. Returns the draw and the log joint posterior.
    fn draw_beta(&self, th: &[f64; 3], rng: &mut SeededRng) -> Result<(Vec<f64>, f64)> {
        let (a, rho, sigma) = self.scalars(th);
        let chol = factorize(marginal_cov(self.data, a, rho, sigma), a)?;
        let l = chol.l_dirty();
        let wx = l
            .solve_lower_triangular(&self.data.x)
            .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
        let wy = l
            .solve_lower_triangular(&self.data.y)
            .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
        let p = self.data.n_coef();
        let inv_s2 = 1.0 / (self.priors.beta_sd * self.priors.beta_sd);
        let mut precision = wx.transpose() * &wx;
        for j in 0..p {
            precision[(j, j)] += inv_s2;
        }
        let pchol = factorize(precision, 0.0)?;
        let mean = pchol.solve(&(wx.transpose() * &wy));
        let z = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
        let offset = pchol
            .l_dirty()
            .transpose()
            .solve_upper_triangular(&z)
            .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
        let beta = mean + offset;
        let resid = &self.data.y - &self.data.x * &beta;
        let log_joint = mvn_log_density(&chol, &resid) - 0.5 * inv_s2 * beta.norm_squared()
            + self.priors.log_scalar_prior(self.model, a, rho, sigma);
        Ok((beta.iter().copied().collect(), log_joint))
    }
}

struct ChainOutput {
    draws: Vec<GPParams>,
    log_post: Vec<f64>,
    acceptance: Vec<f64>,
}

fn run_chain(target: &Target<'_>, mcmc: &McmcConfig, chain: usize) -> Result<ChainOutput> {
    let mut rng = seeded(mcmc.seed.wrapping_add(chain as u64));
    let y = &target.data.y;
    let n = y.len() as f64;
    let mean_y = y.sum() / n;
    let sd_y = (y.iter().map(|v| (v - mean_y).powi(2)).sum::<f64>() / n).sqrt();
    let scale = if sd_y > 1e-8 { 0.5 * sd_y } else { 1.0 };
    let mut th = [
        scale.ln() + rng.random_range(-0.5..0.5),
        target.priors.length_scale_scale.ln() + rng.random_range(-0.5..0.5),
        scale.ln() + rng.random_range(-0.5..0.5),
    ];
    let mut lp = target.log_marginal(&th).ok_or_else(|| {
        Error::Numerical(format!("non-finite posterior at initialization of chain {chain}"))
    })?;

    let mut log_step = [(0.5f64).ln(); 3];
    let mut batch_accepts = [0usize; 3];
    let mut kept_accepts = [0usize; 3];
    let mut out = ChainOutput {
        draws: Vec::with_capacity(mcmc.draws_per_chain()),
        log_post: Vec::with_capacity(mcmc.draws_per_chain()),
        acceptance: Vec::new(),
    };
    for iter in 0..mcmc.iters {
        for &c in target.active() {
            let mut prop = th;
            prop[c] += log_step[c].exp() * rng.sample::<f64, _>(StandardNormal);
            let accept = match target.log_marginal(&prop) {
                Some(lp_prop) => rng.random::<f64>().ln() < lp_prop - lp,
                None => false,
            };
            if accept {
                th = prop;
                lp = target.log_marginal(&th).expect("accepted state is finite");
                batch_accepts[c] += 1;
                if iter >= mcmc.burn_in {
                    kept_accepts[c] += 1;
                }
            }
        }
        if iter < mcmc.burn_in && (iter + 1) % ADAPT_BATCH == 0 {
            let batch = ((iter + 1) / ADAPT_BATCH) as f64;
            let gain = (1.0 / batch.sqrt()).min(0.5);
            for &c in target.active() {
                let rate = batch_accepts[c] as f64 / ADAPT_BATCH as f64;
                log_step[c] += gain * (rate - TARGET_ACCEPT) * 4.0;
                batch_accepts[c] = 0;
            }
        }
        if mcmc.keep(iter) {
            let (beta, log_joint) = target.draw_beta(&th, &mut rng)?;
            let (amplitude, length_scale, sigma) = target.scalars(&th);
            out.draws.push(GPParams {
                beta,
                amplitude,
                length_scale,
                sigma,
            });
            out.log_post.push(log_joint);
        }
    }
    let post = (mcmc.iters - mcmc.burn_in) as f64;
    out.acceptance = target
        .active()
        .iter()
        .map(|&c| kept_accepts[c] as f64 / post)
        .collect();
    Ok(out)
}

fn sample(data: &GPDataset, priors: &GPPriors, mcmc: &McmcConfig, model: GpModel) -> Result<PosteriorDraws> {
    data.validate()?;
    priors.validate()?;
    mcmc.validate()?;
    if data.len() < 2 {
        return Err(Error::InvalidArgument("GP fit needs at least two stores".into()));
    }
    let target = Target::new(data, *priors, model);
    let chains: Vec<ChainOutput> = (0..mcmc.chains)
        .into_par_iter()
        .map(|c| run_chain(&target, mcmc, c))
        .collect::<Result<_>>()?;
    let mut draws = PosteriorDraws {
        model,
        priors: *priors,
        mcmc: mcmc.clone(),
        draws: Vec::with_capacity(chains.len()),
        log_post: Vec::with_capacity(chains.len()),
        acceptance: Vec::with_capacity(chains.len()),
        rhat: Vec::new(),
    };
    for c in chains {
        draws.draws.push(c.draws);
        draws.log_post.push(c.log_post);
        draws.acceptance.push(c.acceptance);
    }
    draws.compute_rhat();
    Ok(draws)
}

/// Posterior draws of the linear GP regression.
pub fn sample_posterior(data: &GPDataset, priors: &GPPriors, mcmc: &McmcConfig) -> Result<PosteriorDraws> {
    sample(data, priors, mcmc, GpModel::Lgpr)
}

/// Posterior draws of the linear model with independent noise only.
pub fn fit_lr_baseline(data: &GPDataset, priors: &GPPriors, mcmc: &McmcConfig) -> Result<PosteriorDraws> {
    sample(data, priors, mcmc, GpModel::Linear)
}
