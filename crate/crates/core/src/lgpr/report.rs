use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{Comparison, Decomposition, GPParams, GpModel, PosteriorDraws};
use crate::error::{Error, Result};
use crate::geo::StoreGeo;

/// Posterior summary of one parameter. `se` is the Monte Carlo standard
/// error of the mean, `sd / sqrt(draws)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub parameter: String,
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
    pub lower: f64,
    pub upper: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn summarize(parameter: String, mut values: Vec<f64>) -> CoefficientRow {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    values.sort_by(f64::total_cmp);
    CoefficientRow {
        parameter,
        mean,
        sd,
        se: sd / n.sqrt(),
        lower: quantile(&values, 0.025),
        upper: quantile(&values, 0.975),
    }
}

/// One row per coefficient (named by `names`) followed by the length scale,
/// amplitude and nugget rows.
pub fn coefficient_summary(draws: &PosteriorDraws, names: &[&str]) -> Result<Vec<CoefficientRow>> {
    let all: Vec<&GPParams> = draws.iter().collect();
    let Some(first) = all.first() else {
        return Err(Error::InvalidArgument("no posterior draws".into()));
    };
    if first.beta.len() != names.len() {
        return Err(Error::Dimension(format!(
            "{} names for {} coefficients",
            names.len(),
            first.beta.len()
        )));
    }
    let mut rows: Vec<CoefficientRow> = names
        .iter()
        .enumerate()
        .map(|(j, name)| summarize(name.to_string(), all.iter().map(|d| d.beta[j]).collect()))
        .collect();
    if draws.model == GpModel::Lgpr {
        rows.push(summarize("Length-scale".into(), all.iter().map(|d| d.length_scale).collect()));
        rows.push(summarize("Amplitude".into(), all.iter().map(|d| d.amplitude).collect()));
    }
    rows.push(summarize("Sigma".into(), all.iter().map(|d| d.sigma).collect()));
    Ok(rows)
}

pub fn write_coefficients<W: Write>(rows: &[CoefficientRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ComparisonRecord<'a> {
    topic: &'a str,
    n: usize,
    mse_lgpr: f64,
    mse_lr: f64,
    p_mse: f64,
    lppd_lgpr: f64,
    lppd_lr: f64,
    p_lppd: f64,
}

/// One row per topic; model A is the GP regression, model B the baseline.
pub fn write_comparison<W: Write>(rows: &[(String, Comparison)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (topic, c) in rows {
        w.serialize(ComparisonRecord {
            topic,
            n: c.n,
            mse_lgpr: c.mse_a,
            mse_lr: c.mse_b,
            p_mse: c.p_mse,
            lppd_lgpr: c.lppd_a,
            lppd_lr: c.lppd_b,
            p_lppd: c.p_lppd,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ResidualRecord<'a> {
    store_id: &'a str,
    lat: f64,
    lon: f64,
    observed: f64,
    fixed: f64,
    spatial: f64,
    noise: f64,
}

/// `store_id,lat,lon,observed,fixed,spatial,noise`, stores matched by id.
pub fn write_decomposition<W: Write>(dec: &Decomposition, stores: &[StoreGeo], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (i, id) in dec.store_ids.iter().enumerate() {
        let s = stores
            .iter()
            .find(|s| &s.store_id == id)
            .ok_or_else(|| Error::InvalidArgument(format!("no location for store {id}")))?;
        w.serialize(ResidualRecord {
            store_id: id,
            lat: s.lat,
            lon: s.lon,
            observed: dec.observed[i],
            fixed: dec.fixed[i],
            spatial: dec.spatial[i],
            noise: dec.noise[i],
        })?;
    }
    w.flush()?;
    Ok(())
}
