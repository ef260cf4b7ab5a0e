mod spatial;
mod topics;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use segtopic::pipeline::{read_manifest, run_pipeline, PipelineConfig};

/// Segmented topic models of store transactions and spatial regression of
/// topic prevalence.
#[derive(Debug, Parser)]
#[command(name = "segtopic", version)]
struct Cli {
    /// Pipeline config (TOML). Its sections supply defaults for every
    /// subcommand; flags given explicitly win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for the subcommand's random choices.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file or directory, depending on the subcommand.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for chains, topics and grid cells.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a corpus file from line-delimited JSON transactions.
    Ingest(topics::IngestArgs),
    /// Simulate transactions and store locations from the generative model.
    Simulate(topics::SimulateArgs),
    /// Re-tag a corpus into training and test baskets.
    Split(topics::SplitArgs),
    /// Run the block Gibbs sampler and save posterior samples.
    FitStm(topics::FitStmArgs),
    /// Cluster posterior topics and keep the recurrent ones.
    SummarizeTopics(topics::SummarizeArgs),
    /// Evaluate a grid of clustering thresholds and minimum sizes.
    Grid(topics::GridArgs),
    /// Re-estimate store mixtures with the clustered topics held fixed.
    RefitTheta(topics::RefitArgs),
    /// Coherence, distinctiveness, credibility and perplexity per topic.
    EvalTopics(topics::EvalArgs),
    /// Fit the spatial regression for one topic.
    FitGp(spatial::FitGpArgs),
    /// Predict a fitted topic at new store locations.
    PredictGp(spatial::PredictArgs),
    /// Held-out comparison of the spatial model against linear regression.
    CompareGpLr(spatial::CompareArgs),
    /// Write one CSV column as a GeoJSON point layer.
    ExportMap(spatial::ExportArgs),
    /// Run every stage from a config file.
    RunPipeline(RunArgs),
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Recompute every stage instead of reusing completed ones.
    #[arg(long)]
    fresh: bool,
}

/// Global options after parsing, shared by every subcommand.
pub struct Ctx {
    pub config: Option<PipelineConfig>,
    pub seed: Option<u64>,
    out: Option<PathBuf>,
}

impl Ctx {
    pub fn out(&self) -> Result<&Path> {
        self.out.as_deref().context("--out is required for this subcommand")
    }

    /// An explicit path, else the one from the config, else an error naming
    /// the flag.
    pub fn path(&self, given: Option<PathBuf>, from_config: impl Fn(&PipelineConfig) -> &PathBuf, flag: &str) -> Result<PathBuf> {
        given
            .or_else(|| self.config.as_ref().map(|c| from_config(c).clone()))
            .with_context(|| format!("--{flag} is required without a config file"))
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))
}

/// Creates the parent directory of `path` and opens it for writing.
pub fn create(path: &Path) -> Result<fs::File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn run_pipeline_cmd(ctx: &Ctx, args: RunArgs) -> Result<()> {
    let Some(mut cfg) = ctx.config.clone() else {
        bail!("run-pipeline needs --config");
    };
    if let Some(out) = &ctx.out {
        cfg.paths.output = out.clone();
    }
    if let Some(seed) = ctx.seed {
        cfg.reseed(seed);
    }
    if args.fresh {
        cfg.resume = false;
    }
    let manifest = match run_pipeline(&cfg) {
        Ok(m) => m,
        Err(e) => {
            if let Ok(m) = read_manifest(&cfg.paths.output) {
                eprintln!("completed before the failure: {}", m.completed.join(", "));
            }
            return Err(e.into());
        }
    };
    println!(
        "{} stages, {} artifacts, manifest at {}",
        manifest.completed.len(),
        manifest.artifacts.len(),
        cfg.paths.output.join("manifest.json").display()
    );
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let config = match &cli.config {
        Some(p) => Some(PipelineConfig::load(p).with_context(|| format!("loading {}", p.display()))?),
        None => None,
    };
    let ctx = Ctx {
        config,
        seed: cli.seed,
        out: cli.out,
    };
    match cli.command {
        Command::Ingest(a) => topics::ingest(&ctx, a),
        Command::Simulate(a) => topics::simulate(&ctx, a),
        Command::Split(a) => topics::split(&ctx, a),
        Command::FitStm(a) => topics::fit_stm(&ctx, a),
        Command::SummarizeTopics(a) => topics::summarize(&ctx, a),
        Command::Grid(a) => topics::grid(&ctx, a),
        Command::RefitTheta(a) => topics::refit(&ctx, a),
        Command::EvalTopics(a) => topics::eval(&ctx, a),
        Command::FitGp(a) => spatial::fit_gp(&ctx, a),
        Command::PredictGp(a) => spatial::predict_gp(&ctx, a),
        Command::CompareGpLr(a) => spatial::compare_gp_lr(&ctx, a),
        Command::ExportMap(a) => spatial::export(&ctx, a),
        Command::RunPipeline(a) => run_pipeline_cmd(&ctx, a),
    }
}
