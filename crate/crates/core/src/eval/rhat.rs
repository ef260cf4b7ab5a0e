//! Potential scale reduction factor.

use crate::error::{Error, Result};

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sample_var(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Classic between/within R-hat over chains of equal length:
/// `sqrt(((n - 1) / n * W + B / n) / W)`.
///
/// Returns 1 when every draw of every chain is identical and infinity when
/// chains are internally constant but disagree.
pub fn rhat(chains: &[Vec<f64>]) -> Result<f64> {
    if chains.len() < 2 {
        return Err(Error::InvalidArgument("R-hat needs at least two chains".into()));
    }
    let n = chains[0].len();
    if n < 2 || chains.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidArgument("R-hat chains must have equal length >= 2".into()));
    }
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let within = mean(&chains.iter().map(|c| sample_var(c)).collect::<Vec<_>>());
    let between = n as f64 * sample_var(&means);
    if within == 0.0 {
        return Ok(if between == 0.0 { 1.0 } else { f64::INFINITY });
    }
    let nf = n as f64;
    Ok((((nf - 1.0) / nf * within + between / nf) / within).sqrt())
}

/// Split R-hat: every chain is cut into two halves (dropping the middle draw
/// of odd-length chains) before applying [`rhat`]. Needs at least two chains
/// of at least 10 draws each, all the same length.
pub fn split_rhat(chains: &[Vec<f64>]) -> Result<f64> {
    if chains.len() < 2 {
        return Err(Error::InvalidArgument("R-hat needs at least two chains".into()));
    }
    let n = chains[0].len();
    if n < 10 || chains.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidArgument(
            "split R-hat needs chains of equal length >= 10".into(),
        ));
    }
    let half = n / 2;
    let mut split = Vec::with_capacity(2 * chains.len());
    for c in chains {
        split.push(c[..half].to_vec());
        split.push(c[n - half..].to_vec());
    }
    rhat(&split)
}
