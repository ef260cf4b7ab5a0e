//! Linear regression with a squared-exponential Gaussian-process residual.
//!
//! For one topic, the logit store probabilities are modelled as
//!
//! ```text
//! y = X beta + eta + eps,   eta ~ GP(0, C),   eps ~ N(0, sigma^2 I)
//! C_ij = alpha^2 exp(-d_ij^2 / (2 rho^2))
//! ```
//!
//! with `d_ij` the great-circle distance between stores in kilometres.

mod kernel;
mod predict;
mod report;
mod sampler;
mod simulate;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{design_matrix, distance_matrix, StoreGeo};

pub use kernel::{cov_matrix, cross_cov, factorize, log_likelihood, mvn_log_density};
pub use predict::{compare, decompose, predict, predict_with, Comparison, Decomposition, Prediction};
pub use report::{coefficient_summary, write_coefficients, write_comparison, write_decomposition, CoefficientRow};
pub use sampler::{fit_lr_baseline, sample_posterior, GpModel, McmcConfig, PosteriorDraws, RhatEntry};
pub use simulate::{simulate_field, SimulatedField};

#[derive(Debug, Clone, PartialEq)]
pub struct GPDataset {
    pub store_ids: Vec<String>,
    /// Locations; empty when the dataset was assembled from raw matrices.
    pub stores: Vec<StoreGeo>,
    pub y: DVector<f64>,
    pub x: DMatrix<f64>,
    pub dist: DMatrix<f64>,
}

impl GPDataset {
    pub fn from_stores(stores: &[StoreGeo], y: Vec<f64>) -> Result<Self> {
        if stores.len() != y.len() {
            return Err(Error::Dimension(format!(
                "{} stores but {} responses",
                stores.len(),
                y.len()
            )));
        }
        let data = Self {
            store_ids: stores.iter().map(|s| s.store_id.clone()).collect(),
            stores: stores.to_vec(),
            y: DVector::from_vec(y),
            x: design_matrix(stores),
            dist: distance_matrix(stores),
        };
        data.validate()?;
        Ok(data)
    }

    pub fn from_parts(y: Vec<f64>, x: DMatrix<f64>, dist: DMatrix<f64>) -> Result<Self> {
        let data = Self {
            store_ids: (0..y.len()).map(|i| format!("s{i}")).collect(),
            stores: Vec::new(),
            y: DVector::from_vec(y),
            x,
            dist,
        };
        data.validate()?;
        Ok(data)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.y.len();
        if self.x.nrows() != n || self.dist.nrows() != n || self.dist.ncols() != n {
            return Err(Error::Dimension(format!(
                "y has {n} rows, X is {}x{}, dist is {}x{}",
                self.x.nrows(),
                self.x.ncols(),
                self.dist.nrows(),
                self.dist.ncols()
            )));
        }
        if self.store_ids.len() != n || (!self.stores.is_empty() && self.stores.len() != n) {
            return Err(Error::Dimension("store list does not match y".into()));
        }
        for i in 0..n {
            if self.dist[(i, i)] != 0.0 {
                return Err(Error::Domain(format!("dist[{i},{i}] is not zero")));
            }
            for j in 0..i {
                if self.dist[(i, j)] != self.dist[(j, i)] {
                    return Err(Error::Domain("distance matrix is not symmetric".into()));
                }
            }
        }
        if self.y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite response".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_coef(&self) -> usize {
        self.x.ncols()
    }

    /// Rows `idx` of the dataset, in the given order.
    pub fn subset(&self, idx: &[usize]) -> Self {
        let n = idx.len();
        Self {
            store_ids: idx.iter().map(|&i| self.store_ids[i].clone()).collect(),
            stores: if self.stores.is_empty() {
                Vec::new()
            } else {
                idx.iter().map(|&i| self.stores[i].clone()).collect()
            },
            y: DVector::from_fn(n, |r, _| self.y[idx[r]]),
            x: DMatrix::from_fn(n, self.x.ncols(), |r, c| self.x[(idx[r], c)]),
            dist: DMatrix::from_fn(n, n, |r, c| self.dist[(idx[r], idx[c])]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GPParams {
    pub beta: Vec<f64>,
    pub amplitude: f64,
    pub length_scale: f64,
    pub sigma: f64,
}

impl GPParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0 && self.length_scale > 0.0 && self.sigma > 0.0) {
            return Err(Error::Domain(format!(
                "need amplitude >= 0, length scale > 0, sigma > 0; got {}, {}, {}",
                self.amplitude, self.length_scale, self.sigma
            )));
        }
        Ok(())
    }
}

/// Prior scales; defaults are the weakly informative choices
/// `sigma ~ halfN(0, 1)`, `beta ~ N(0, 10)`, `alpha ~ halfN(0, 2)`,
/// `rho ~ InvGamma(2, 50)`, all normal scales being standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GPPriors {
    pub sigma_scale: f64,
    pub beta_sd: f64,
    pub amplitude_scale: f64,
    pub length_scale_shape: f64,
    pub length_scale_scale: f64,
}

impl Default for GPPriors {
    fn default() -> Self {
        Self {
            sigma_scale: 1.0,
            beta_sd: 10.0,
            amplitude_scale: 2.0,
            length_scale_shape: 2.0,
            length_scale_scale: 50.0,
        }
    }
}

impl GPPriors {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.sigma_scale,
            self.beta_sd,
            self.amplitude_scale,
            self.length_scale_shape,
            self.length_scale_scale,
        ];
        if all.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument(format!("prior scales must be positive: {self:?}")));
        }
        Ok(())
    }

    /// Log prior density of the scalar parameters, up to a constant.
    pub(crate) fn log_scalar_prior(&self, model: GpModel, amplitude: f64, length_scale: f64, sigma: f64) -> f64 {
        let mut lp = -0.5 * (sigma / self.sigma_scale).powi(2);
        if model == GpModel::Lgpr {
            lp -= 0.5 * (amplitude / self.amplitude_scale).powi(2);
            lp -= (self.length_scale_shape + 1.0) * length_scale.ln() + self.length_scale_scale / length_scale;
        }
        lp
    }
}
