use nalgebra::{Cholesky, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::kernel::cov_matrix;
use super::{GPDataset, GPParams};
use crate::error::{Error, Result};
use crate::geo::{design_matrix, distance_matrix, StoreGeo};

/// Responses drawn from the model, with the latent field kept for checks.
#[derive(Debug, Clone)]
pub struct SimulatedField {
    pub data: GPDataset,
    pub eta: Vec<f64>,
}

/// `y = X beta + eta + sigma * eps` at the given stores, `eta ~ GP(0, C)`.
pub fn simulate_field<R: Rng + ?Sized>(rng: &mut R, stores: &[StoreGeo], params: &GPParams) -> Result<SimulatedField> {
    params.validate()?;
    let n = stores.len();
    let x = design_matrix(stores);
    if params.beta.len() != x.ncols() {
        return Err(Error::Dimension(format!("{} coefficients for {} columns", params.beta.len(), x.ncols())));
    }
    let dist = distance_matrix(stores);
    let mut c = cov_matrix(&dist, params.amplitude, params.length_scale);
    let jitter = 1e-10 * params.amplitude * params.amplitude;
    for i in 0..n {
        c[(i, i)] += jitter;
    }
    let eta = if params.amplitude > 0.0 {
        let chol = Cholesky::new(c).ok_or_else(|| Error::Numerical("field covariance is singular".into()))?;
        let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        chol.l() * z
    } else {
        DVector::zeros(n)
    };
    let fixed = &x * DVector::from_column_slice(&params.beta);
    let y: Vec<f64> = (0..n)
        .map(|i| fixed[i] + eta[i] + params.sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(SimulatedField {
        data: GPDataset::from_stores(stores, y)?,
        eta: eta.iter().copied().collect(),
    })
}
