use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{GPDataset, GPParams};
use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Squared-exponential covariance `alpha^2 exp(-d^2 / (2 rho^2))`.
pub fn cov_matrix(dist: &DMatrix<f64>, amplitude: f64, length_scale: f64) -> DMatrix<f64> {
    cross_cov(dist, amplitude, length_scale)
}

/// Same kernel applied to a rectangular distance matrix.
pub fn cross_cov(dist: &DMatrix<f64>, amplitude: f64, length_scale: f64) -> DMatrix<f64> {
    let a2 = amplitude * amplitude;
    let denom = 2.0 * length_scale * length_scale;
    dist.map(|d| a2 * (-(d * d) / denom).exp())
}

/// Cholesky factor of `sigma`, retrying once with `1e-8 * alpha^2` added to
/// the diagonal.
pub fn factorize(mut sigma: DMatrix<f64>, amplitude: f64) -> Result<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(sigma.clone()) {
        return Ok(c);
    }
    let jitter = 1e-8 * amplitude * amplitude;
    for i in 0..sigma.nrows() {
        sigma[(i, i)] += jitter;
    }
    Cholesky::new(sigma).ok_or_else(|| {
        Error::Numerical(format!(
            "covariance not positive definite even after jitter {jitter:e}"
        ))
    })
}

/// `log N(r; 0, Sigma)` given the Cholesky factor of `Sigma`.
pub fn mvn_log_density(chol: &Cholesky<f64, Dyn>, r: &DVector<f64>) -> f64 {
    let l = chol.l_dirty();
    let n = r.len();
    let log_det: f64 = (0..n).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0;
    let z = l
        .solve_lower_triangular(r)
        .expect("Cholesky factor has a positive diagonal");
    -0.5 * (n as f64 * LN_2PI + log_det + z.norm_squared())
}

pub(crate) fn marginal_cov(data: &GPDataset, amplitude: f64, length_scale: f64, sigma: f64) -> DMatrix<f64> {
    let mut s = if amplitude > 0.0 {
        cov_matrix(&data.dist, amplitude, length_scale)
    } else {
        DMatrix::zeros(data.len(), data.len())
    };
    for i in 0..data.len() {
        s[(i, i)] += sigma * sigma;
    }
    s
}

/// `log N(y; X beta, C + sigma^2 I)`.
pub fn log_likelihood(data: &GPDataset, params: &GPParams) -> Result<f64> {
    params.validate()?;
    if params.beta.len() != data.n_coef() {
        return Err(Error::Dimension(format!(
            "{} coefficients for {} design columns",
            params.beta.len(),
            data.n_coef()
        )));
    }
    let sigma = marginal_cov(data, params.amplitude, params.length_scale, params.sigma);
    let chol = factorize(sigma, params.amplitude)?;
    let r = &data.y - &data.x * DVector::from_column_slice(&params.beta);
    Ok(mvn_log_density(&chol, &r))
}
