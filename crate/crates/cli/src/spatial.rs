use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::{create, read_json, write_json, Ctx};
use segtopic::geo::{self, inv_logit, StoreGeo};
use segtopic::lgpr::{self, GPDataset, PosteriorDraws};
use segtopic::pipeline::{export_map, heldout_comparison, located_dataset, read_value_column, GpSection, Scale};

/// Column names of a theta CSV other than `store_id`.
fn topic_columns(path: &Path) -> Result<Vec<String>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(r.headers()?.iter().filter(|h| *h != "store_id").map(str::to_string).collect())
}

fn read_column(path: &Path, column: &str) -> Result<Vec<(String, f64)>> {
    let f = File::open(path).with_context(|| format!("reading {}", path.display()))?;
    read_value_column(f, column).with_context(|| format!("column {column} of {}", path.display()))
}

fn gp_section(ctx: &Ctx) -> GpSection {
    let mut gp = ctx.config.as_ref().map(|c| c.gp.clone()).unwrap_or_default();
    if let Some(s) = ctx.seed {
        gp.mcmc.seed = s;
        gp.heldout_seed = s;
    }
    gp
}

/// Topic column of a theta CSV joined with store locations.
#[derive(Debug, Args)]
pub struct TopicInput {
    /// CSV `store_id,topic_0,...` of store mixtures (probabilities).
    #[arg(long)]
    theta: PathBuf,
    /// Column to model, e.g. `topic_3`.
    #[arg(long)]
    column: String,
    /// Store metadata CSV `store_id,postcode,lat,lon,region`.
    #[arg(long)]
    stores: Option<PathBuf>,
}

impl TopicInput {
    fn load(&self, ctx: &Ctx) -> Result<(GPDataset, Vec<StoreGeo>)> {
        let path = ctx.path(self.stores.clone(), |c| &c.paths.stores, "stores")?;
        let stores = geo::read_stores_path(&path)?;
        let data = located_dataset(&read_column(&self.theta, &self.column)?, &stores)?;
        Ok((data, stores))
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Model {
    /// Linear predictor plus a squared-exponential spatial field.
    Lgpr,
    /// Linear predictor only.
    Lr,
}

#[derive(Debug, Args)]
pub struct McmcArgs {
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
}

impl McmcArgs {
    fn apply(&self, gp: &mut GpSection) {
        let m = &mut gp.mcmc;
        m.chains = self.chains.unwrap_or(m.chains);
        m.iters = self.iters.unwrap_or(m.iters);
        m.burn_in = self.burn_in.unwrap_or(m.burn_in);
        m.thin = self.thin.unwrap_or(m.thin);
    }
}

#[derive(Debug, Args)]
pub struct FitGpArgs {
    #[command(flatten)]
    input: TopicInput,
    #[arg(long, value_enum, default_value = "lgpr")]
    model: Model,
    #[command(flatten)]
    mcmc: McmcArgs,
}

pub fn fit_gp(ctx: &Ctx, a: FitGpArgs) -> Result<()> {
    let mut gp = gp_section(ctx);
    a.mcmc.apply(&mut gp);
    let (data, stores) = a.input.load(ctx)?;
    let draws = match a.model {
        Model::Lgpr => lgpr::sample_posterior(&data, &gp.priors, &gp.mcmc)?,
        Model::Lr => lgpr::fit_lr_baseline(&data, &gp.priors, &gp.mcmc)?,
    };
    let dir = ctx.out()?;
    write_json(&dir.join("draws.json"), &draws)?;
    let rows = lgpr::coefficient_summary(&draws, &geo::design_columns())?;
    lgpr::write_coefficients(&rows, create(&dir.join("coefficients.csv"))?)?;
    let dec = lgpr::decompose(&data, &draws)?;
    lgpr::write_decomposition(&dec, &stores, create(&dir.join("residuals.csv"))?)?;
    println!(
        "{} stores, {} draws; max R-hat {}",
        data.len(),
        draws.len(),
        draws.max_rhat().map_or("n/a".to_string(), |r| format!("{r:.3}"))
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Training data the draws were fitted on.
    #[command(flatten)]
    input: TopicInput,
    /// `draws.json` written by `fit-gp`.
    #[arg(long)]
    draws: PathBuf,
    /// Store metadata CSV of the locations to predict.
    #[arg(long)]
    new_stores: PathBuf,
}

#[derive(Serialize)]
struct PredictionRow<'a> {
    store_id: &'a str,
    lat: f64,
    lon: f64,
    mean: f64,
    sd: f64,
    lower: f64,
    upper: f64,
    /// Interval bounds mapped back to probabilities.
    prob_lower: f64,
    prob_upper: f64,
}

pub fn predict_gp(ctx: &Ctx, a: PredictArgs) -> Result<()> {
    let (train, _) = a.input.load(ctx)?;
    let draws: PosteriorDraws = read_json(&a.draws)?;
    if draws.iter().next().is_some_and(|d| d.beta.len() != train.n_coef()) {
        bail!("draws do not match the design of the training data");
    }
    let new = geo::read_stores_path(&a.new_stores)?;
    let cross = geo::cross_distances(&new, &train.stores);
    let ids = new.iter().map(|s| s.store_id.clone()).collect();
    let pred = lgpr::predict_with(&train, &draws, &geo::design_matrix(&new), &cross, ids)?;
    let mut w = csv::Writer::from_writer(create(ctx.out()?)?);
    for (i, s) in new.iter().enumerate() {
        w.serialize(PredictionRow {
            store_id: &s.store_id,
            lat: s.lat,
            lon: s.lon,
            mean: pred.mean[i],
            sd: pred.variance[i].sqrt(),
            lower: pred.lower[i],
            upper: pred.upper[i],
            prob_lower: inv_logit(pred.lower[i]),
            prob_upper: inv_logit(pred.upper[i]),
        })?;
    }
    w.flush()?;
    println!("{} predictions from {} draws", new.len(), draws.len());
    Ok(())
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    theta: PathBuf,
    #[arg(long)]
    stores: Option<PathBuf>,
    /// Columns to compare; every topic column when omitted.
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    /// Share of stores held out.
    #[arg(long)]
    heldout_fraction: Option<f64>,
    #[command(flatten)]
    mcmc: McmcArgs,
}

pub fn compare_gp_lr(ctx: &Ctx, a: CompareArgs) -> Result<()> {
    let mut gp = gp_section(ctx);
    a.mcmc.apply(&mut gp);
    gp.heldout_fraction = a.heldout_fraction.unwrap_or(gp.heldout_fraction);
    let columns = if a.columns.is_empty() { topic_columns(&a.theta)? } else { a.columns };
    let stores = geo::read_stores_path(&ctx.path(a.stores, |c| &c.paths.stores, "stores")?)?;
    let rows: Vec<(String, lgpr::Comparison)> = columns
        .par_iter()
        .map(|col| -> Result<_> {
            let data = located_dataset(&read_column(&a.theta, col)?, &stores)?;
            Ok((col.clone(), heldout_comparison(&data, &gp)?))
        })
        .collect::<Result<_>>()?;
    lgpr::write_comparison(&rows, create(ctx.out()?)?)?;
    for (col, c) in &rows {
        println!(
            "{col}: lppd {:.2} vs {:.2} (p {:.3}), MSE {:.4} vs {:.4} (p {:.3})",
            c.lppd_a, c.lppd_b, c.p_lppd, c.mse_a, c.mse_b, c.p_mse
        );
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScaleArg {
    /// Values as written.
    Identity,
    /// Logit values mapped to probabilities.
    Probability,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// CSV with a `store_id` column, e.g. `theta.csv` or `residuals.csv`.
    #[arg(long)]
    values: PathBuf,
    #[arg(long)]
    column: String,
    #[arg(long)]
    stores: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "identity")]
    scale: ScaleArg,
    /// Where to list rows that could not be placed; printed when omitted.
    #[arg(long)]
    skipped: Option<PathBuf>,
}

pub fn export(ctx: &Ctx, a: ExportArgs) -> Result<()> {
    let stores = geo::read_stores_path(&ctx.path(a.stores, |c| &c.paths.stores, "stores")?)?;
    let values = read_column(&a.values, &a.column)?;
    let scale = match a.scale {
        ScaleArg::Identity => Scale::Identity,
        ScaleArg::Probability => Scale::Probability,
    };
    let m = export_map(&values, &stores, scale);
    write_json(ctx.out()?, &m.geojson)?;
    match a.skipped {
        Some(p) => write_json(&p, &m.skipped)?,
        None => {
            for s in &m.skipped {
                eprintln!("skipped {}: {}", s.store_id, s.reason);
            }
        }
    }
    println!("{} features, {} rows skipped", values.len() - m.skipped.len(), m.skipped.len());
    Ok(())
}
