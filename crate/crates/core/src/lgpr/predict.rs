use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf::erfc;

use super::kernel::{cov_matrix, cross_cov, factorize, marginal_cov};
use super::{GPDataset, PosteriorDraws};
use crate::error::{Error, Result};
use crate::geo::cross_distances;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Predictive distribution at new stores on the logit scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub store_ids: Vec<String>,
    /// `means[s][i]`: conditional mean at store `i` under draw `s`.
    pub means: Vec<Vec<f64>>,
    /// Conditional variances, nugget included.
    pub variances: Vec<Vec<f64>>,
    /// Moments and 95% interval of the mixture over draws.
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

fn normal_cdf(x: f64, mu: f64, var: f64) -> f64 {
    if var <= 0.0 {
        return if x >= mu { 1.0 } else { 0.0 };
    }
    0.5 * erfc(-(x - mu) / (2.0 * var).sqrt())
}

fn mixture_quantile(q: f64, means: &[f64], vars: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&m, &v) in means.iter().zip(vars) {
        let sd = v.max(0.0).sqrt();
        lo = lo.min(m - 10.0 * sd);
        hi = hi.max(m + 10.0 * sd);
    }
    let n = means.len() as f64;
    let cdf = |x: f64| {
        means
            .iter()
            .zip(vars)
            .map(|(&m, &v)| normal_cdf(x, m, v))
            .sum::<f64>()
            / n
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Kriging at `x_new` given distances `cross[i][j]` from new store `i` to
/// training store `j`.
pub fn predict_with(
    train: &GPDataset,
    draws: &PosteriorDraws,
    x_new: &DMatrix<f64>,
    cross: &DMatrix<f64>,
    store_ids: Vec<String>,
) -> Result<Prediction> {
    let m = x_new.nrows();
    if cross.nrows() != m || cross.ncols() != train.len() || x_new.ncols() != train.n_coef() || store_ids.len() != m {
        return Err(Error::Dimension("new-store inputs do not match the training data".into()));
    }
    if draws.is_empty() {
        return Err(Error::InvalidArgument("no posterior draws".into()));
    }
    let mut means = Vec::with_capacity(draws.len());
    let mut variances = Vec::with_capacity(draws.len());
    for d in draws.iter() {
        let beta = DVector::from_column_slice(&d.beta);
        let mut mu = x_new * &beta;
        let prior_var = d.amplitude * d.amplitude + d.sigma * d.sigma;
        let mut var = vec![prior_var; m];
        if d.amplitude > 0.0 {
            let chol = factorize(marginal_cov(train, d.amplitude, d.length_scale, d.sigma), d.amplitude)?;
            let k21 = cross_cov(cross, d.amplitude, d.length_scale);
            let resid = &train.y - &train.x * &beta;
            mu += &k21 * chol.solve(&resid);
            let v = chol
                .l_dirty()
                .solve_lower_triangular(&k21.transpose())
                .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
            for (i, slot) in var.iter_mut().enumerate() {
                *slot = (prior_var - v.column(i).norm_squared()).max(0.0);
            }
        }
        means.push(mu.iter().copied().collect::<Vec<f64>>());
        variances.push(var);
    }
    let s = means.len() as f64;
    let mut pred = Prediction {
        store_ids,
        mean: vec![0.0; m],
        variance: vec![0.0; m],
        lower: vec![0.0; m],
        upper: vec![0.0; m],
        means,
        variances,
    };
    for i in 0..m {
        let col_m: Vec<f64> = pred.means.iter().map(|r| r[i]).collect();
        let col_v: Vec<f64> = pred.variances.iter().map(|r| r[i]).collect();
        let mean = col_m.iter().sum::<f64>() / s;
        let second = col_m.iter().zip(&col_v).map(|(mu, v)| v + mu * mu).sum::<f64>() / s;
        pred.mean[i] = mean;
        pred.variance[i] = (second - mean * mean).max(0.0);
        pred.lower[i] = mixture_quantile(0.025, &col_m, &col_v);
        pred.upper[i] = mixture_quantile(0.975, &col_m, &col_v);
    }
    Ok(pred)
}

/// Kriging at the stores of `new`; both datasets must carry locations.
pub fn predict(train: &GPDataset, draws: &PosteriorDraws, new: &GPDataset) -> Result<Prediction> {
    if train.stores.is_empty() || new.stores.is_empty() {
        return Err(Error::InvalidArgument(
            "prediction by location needs store coordinates; use predict_with".into(),
        ));
    }
    let cross = cross_distances(&new.stores, &train.stores);
    predict_with(train, draws, &new.x, &cross, new.store_ids.clone())
}

impl Prediction {
    /// Pointwise `log mean_s N(y_i; mu_si, v_si)`.
    pub fn pointwise_lpd(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.mean.len() {
            return Err(Error::Dimension("observations do not match predictions".into()));
        }
        let s = self.means.len() as f64;
        Ok((0..y.len())
            .map(|i| {
                let terms: Vec<f64> = self
                    .means
                    .iter()
                    .zip(&self.variances)
                    .map(|(mu, v)| {
                        let r = y[i] - mu[i];
                        -0.5 * (LN_2PI + v[i].ln() + r * r / v[i])
                    })
                    .collect();
                let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln() - s.ln()
            })
            .collect())
    }

    pub fn squared_errors(&self, y: &[f64]) -> Vec<f64> {
        self.mean.iter().zip(y).map(|(m, v)| (v - m).powi(2)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub n: usize,
    pub mse_a: f64,
    pub mse_b: f64,
    pub lppd_a: f64,
    pub lppd_b: f64,
    pub p_mse: f64,
    pub p_lppd: f64,
}

/// Two-sided paired t-test of `mean(d) = 0`.
pub(crate) fn paired_t_test(d: &[f64]) -> f64 {
    let n = d.len();
    if n < 2 || d.iter().all(|&v| v == 0.0) {
        return 1.0;
    }
    let nf = n as f64;
    let mean = d.iter().sum::<f64>() / nf;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    if var == 0.0 {
        return 0.0;
    }
    let t = mean / (var / nf).sqrt();
    let dist = StudentsT::new(0.0, 1.0, nf - 1.0).expect("positive degrees of freedom");
    (2.0 * dist.cdf(-t.abs())).min(1.0)
}

/// Held-out MSE and lppd of two models, with paired tests on the pointwise
/// differences.
pub fn compare(a: &Prediction, b: &Prediction, heldout: &GPDataset) -> Result<Comparison> {
    if a.store_ids != heldout.store_ids || b.store_ids != heldout.store_ids {
        return Err(Error::Dimension("predictions were made for a different held-out set".into()));
    }
    let y: Vec<f64> = heldout.y.iter().copied().collect();
    let (se_a, se_b) = (a.squared_errors(&y), b.squared_errors(&y));
    let (lp_a, lp_b) = (a.pointwise_lpd(&y)?, b.pointwise_lpd(&y)?);
    let n = y.len();
    let diff = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, y)| x - y).collect::<Vec<f64>>();
    Ok(Comparison {
        n,
        mse_a: se_a.iter().sum::<f64>() / n as f64,
        mse_b: se_b.iter().sum::<f64>() / n as f64,
        lppd_a: lp_a.iter().sum(),
        lppd_b: lp_b.iter().sum(),
        p_mse: paired_t_test(&diff(&se_a, &se_b)),
        p_lppd: paired_t_test(&diff(&lp_a, &lp_b)),
    })
}

/// Observed values split into fixed effect, spatial residual and noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub store_ids: Vec<String>,
    pub observed: Vec<f64>,
    pub fixed: Vec<f64>,
    pub spatial: Vec<f64>,
    pub noise: Vec<f64>,
}

/// `X beta_hat`, the posterior mean of `C Sigma^-1 (y - X beta)`, and what
/// remains.
pub fn decompose(data: &GPDataset, draws: &PosteriorDraws) -> Result<Decomposition> {
    if draws.is_empty() {
        return Err(Error::InvalidArgument("no posterior draws".into()));
    }
    let n = data.len();
    let fixed = &data.x * DVector::from_vec(draws.beta_mean());
    let mut spatial = DVector::zeros(n);
    for d in draws.iter() {
        if d.amplitude == 0.0 {
            continue;
        }
        let c = cov_matrix(&data.dist, d.amplitude, d.length_scale);
        let chol = factorize(marginal_cov(data, d.amplitude, d.length_scale, d.sigma), d.amplitude)?;
        let resid = &data.y - &data.x * DVector::from_column_slice(&d.beta);
        spatial += c * chol.solve(&resid);
    }
    spatial /= draws.len() as f64;
    let noise = &data.y - &fixed - &spatial;
    let v = |x: &DVector<f64>| x.iter().copied().collect::<Vec<f64>>();
    Ok(Decomposition {
        store_ids: data.store_ids.clone(),
        observed: v(&data.y),
        fixed: v(&fixed),
        spatial: v(&spatial),
        noise: v(&noise),
    })
}
