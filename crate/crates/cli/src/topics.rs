use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;

use crate::{create, read_json, write_json, Ctx};
use segtopic::corpus::{self, Corpus, IngestOptions};
use segtopic::pipeline::{topic_metrics, trace_rhat, write_synthetic_inputs, write_theta_csv, ThetaFile};
use segtopic::stm::{self, Hyper, PosteriorSample, RefitConfig, SimulationSpec, StmConfig};
use segtopic::summary::{self, ClusteredTopic, GridContext, TopicBag};

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Line-delimited JSON transactions.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Vocabulary size, by number of baskets containing each product.
    #[arg(long)]
    top_v: Option<usize>,
    #[arg(long)]
    min_basket: Option<usize>,
    /// Share of each store's baskets tagged as test data.
    #[arg(long)]
    test_fraction: Option<f64>,
}

pub fn ingest(ctx: &Ctx, a: IngestArgs) -> Result<()> {
    let input = ctx.path(a.input, |c| &c.paths.corpus, "input")?;
    let defaults = ctx.config.as_ref().map(|c| c.ingest.clone()).unwrap_or_default();
    let opts = IngestOptions {
        top_v: a.top_v.unwrap_or(defaults.top_v),
        min_basket: a.min_basket.unwrap_or(defaults.min_basket),
    };
    let c = corpus::ingest_path(&input, opts).with_context(|| format!("ingesting {}", input.display()))?;
    let c = corpus::split(
        &c,
        a.test_fraction.unwrap_or(defaults.test_fraction),
        ctx.seed.unwrap_or(defaults.split_seed),
    )?;
    let out = ctx.out()?;
    c.save(out)?;
    println!(
        "{} stores, {} baskets ({} test), vocabulary {} -> {}",
        c.n_stores(),
        c.transactions().len(),
        c.iter_split(corpus::Split::Test).count(),
        c.vocab_size(),
        out.display()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    k: usize,
    /// Vocabulary size.
    #[arg(long)]
    v: usize,
    #[arg(long)]
    stores: usize,
    /// Baskets per store.
    #[arg(long)]
    baskets: usize,
    #[arg(long)]
    basket_size: usize,
    /// Symmetric store-level prior; defaults to 1000 / K.
    #[arg(long)]
    alpha: Option<f64>,
    /// Symmetric topic-level prior.
    #[arg(long, default_value_t = 0.01)]
    beta: f64,
}

pub fn simulate(ctx: &Ctx, a: SimulateArgs) -> Result<()> {
    let mut cfg = StmConfig::with_topics(a.k);
    if let Some(alpha) = a.alpha {
        cfg.alpha = Hyper::Symmetric(alpha);
    }
    cfg.beta = Hyper::Symmetric(a.beta);
    let spec = SimulationSpec {
        stores: a.stores,
        transactions_per_store: a.baskets,
        basket_size: a.basket_size,
        vocab_size: a.v,
    };
    let files = write_synthetic_inputs(ctx.out()?, &cfg, &spec, ctx.seed.unwrap_or(0))?;
    println!(
        "wrote {}, {} and {}",
        files.transactions.display(),
        files.stores.display(),
        files.truth.display()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Corpus file written by `ingest`.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    test_fraction: f64,
}

pub fn split(ctx: &Ctx, a: SplitArgs) -> Result<()> {
    let c = Corpus::load(&a.corpus)?;
    let s = corpus::split(&c, a.test_fraction, ctx.seed.unwrap_or(0))?;
    s.save(ctx.out()?)?;
    println!("{} test baskets of {}", s.iter_split(corpus::Split::Test).count(), s.transactions().len());
    Ok(())
}

#[derive(Debug, Args)]
pub struct FitStmArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    chains: Option<usize>,
    /// Symmetric store-level prior.
    #[arg(long)]
    alpha: Option<f64>,
    /// Symmetric topic-level prior.
    #[arg(long)]
    beta: Option<f64>,
    /// Pitman-Yor discount.
    #[arg(long)]
    discount: Option<f64>,
    /// Pitman-Yor strength.
    #[arg(long)]
    strength: Option<f64>,
    /// Visit tokens in a fresh random order each sweep.
    #[arg(long)]
    shuffle_tokens: bool,
    #[arg(long)]
    trace_every: Option<usize>,
}

#[derive(Serialize)]
struct FitEcho<'a> {
    config: &'a StmConfig,
    log_prob_rhat: Option<f64>,
}

fn stm_config(ctx: &Ctx, a: &FitStmArgs) -> StmConfig {
    let mut cfg = match (&ctx.config, a.k) {
        (Some(c), Some(k)) if k != c.stm.k => StmConfig::with_topics(k),
        (Some(c), _) => c.stm.clone(),
        (None, k) => StmConfig::with_topics(k.unwrap_or(100)),
    };
    cfg.iters = a.iters.unwrap_or(cfg.iters);
    cfg.burn_in = a.burn_in.unwrap_or(cfg.burn_in);
    cfg.thin = a.thin.unwrap_or(cfg.thin);
    cfg.chains = a.chains.unwrap_or(cfg.chains);
    cfg.discount = a.discount.unwrap_or(cfg.discount);
    cfg.strength = a.strength.unwrap_or(cfg.strength);
    cfg.trace_every = a.trace_every.unwrap_or(cfg.trace_every);
    cfg.shuffle_tokens |= a.shuffle_tokens;
    if let Some(x) = a.alpha {
        cfg.alpha = Hyper::Symmetric(x);
    }
    if let Some(x) = a.beta {
        cfg.beta = Hyper::Symmetric(x);
    }
    if let Some(s) = ctx.seed {
        cfg.seed = s;
    }
    cfg
}

pub fn fit_stm(ctx: &Ctx, a: FitStmArgs) -> Result<()> {
    let cfg = stm_config(ctx, &a);
    let corpus = Corpus::load(&a.corpus).with_context(|| format!("loading {}", a.corpus.display()))?;
    let run = stm::run_chains(&corpus, &cfg)?;
    let dir = ctx.out()?;
    write_json(&dir.join("samples.json"), &run.samples)?;
    write_json(&dir.join("traces.json"), &run.traces)?;
    let (rhat, _) = trace_rhat(&run.traces, cfg.burn_in);
    write_json(&dir.join("config.json"), &FitEcho { config: &cfg, log_prob_rhat: rhat })?;
    println!(
        "{} samples from {} chains; log-probability R-hat {}",
        run.samples.len(),
        cfg.chains,
        rhat.map_or("n/a".to_string(), |r| format!("{r:.3}"))
    );
    Ok(())
}

/// `samples.json` inside a directory, or the path itself.
fn samples_file(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join("samples.json")
    } else {
        path.to_path_buf()
    }
}

fn load_bag(path: &Path) -> Result<TopicBag> {
    let samples: Vec<PosteriorSample> = read_json(&samples_file(path))?;
    Ok(TopicBag::from_samples(&samples))
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    /// Output directory of `fit-stm`, or its samples file.
    #[arg(long)]
    samples: PathBuf,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    min_size: Option<usize>,
}

pub fn summarize(ctx: &Ctx, a: SummarizeArgs) -> Result<()> {
    let defaults = ctx.config.as_ref().map(|c| c.summary.clone()).unwrap_or_default();
    let bag = load_bag(&a.samples)?;
    let clusters = summary::cluster(&bag, a.threshold.unwrap_or(defaults.threshold))?;
    let selected = summary::select(&clusters, a.min_size.unwrap_or(defaults.min_size))?;
    write_json(ctx.out()?, &selected)?;
    println!(
        "{} topics from {} samples form {} clusters; {} kept",
        bag.len(),
        bag.by_sample().len(),
        clusters.len(),
        selected.len()
    );
    Ok(())
}

fn refit_config(ctx: &Ctx) -> RefitConfig {
    let mut cfg = ctx.config.as_ref().map(|c| c.refit.clone()).unwrap_or_default();
    if let Some(s) = ctx.seed {
        cfg.seed = s;
    }
    cfg
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    samples: PathBuf,
    /// Corpus whose training split drives the refit and coherence and whose
    /// test split gives perplexity.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_delimiter = ',')]
    thresholds: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    min_sizes: Vec<usize>,
    #[arg(long)]
    top_n: Option<usize>,
}

pub fn grid(ctx: &Ctx, a: GridArgs) -> Result<()> {
    let defaults = ctx.config.as_ref().map(|c| c.summary.clone()).unwrap_or_default();
    let thresholds = if a.thresholds.is_empty() { defaults.grid_thresholds } else { a.thresholds };
    let min_sizes = if a.min_sizes.is_empty() { defaults.grid_min_sizes } else { a.min_sizes };
    let bag = load_bag(&a.samples)?;
    let corpus = Corpus::load(&a.corpus)?;
    let refit = refit_config(ctx);
    let ctx_grid = GridContext {
        corpus: &corpus,
        refit: &refit,
        top_n: a.top_n.unwrap_or(defaults.top_n),
    };
    let rows = summary::grid_evaluate(&bag, &thresholds, &min_sizes, &ctx_grid)?;
    let mut w = csv::Writer::from_writer(create(ctx.out()?)?);
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    println!("{} grid cells", rows.len());
    Ok(())
}

#[derive(Debug, Args)]
pub struct RefitArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Clustered topics written by `summarize-topics`.
    #[arg(long)]
    topics: PathBuf,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    /// Number of recorded sweeps averaged into the estimate.
    #[arg(long)]
    samples: Option<usize>,
    /// Symmetric store-level prior; defaults to 1000 / K.
    #[arg(long)]
    alpha: Option<f64>,
}

pub fn refit(ctx: &Ctx, a: RefitArgs) -> Result<()> {
    let mut cfg = refit_config(ctx);
    cfg.burn_in = a.burn_in.unwrap_or(cfg.burn_in);
    cfg.thin = a.thin.unwrap_or(cfg.thin);
    cfg.samples = a.samples.unwrap_or(cfg.samples);
    if let Some(x) = a.alpha {
        cfg.alpha = Some(Hyper::Symmetric(x));
    }
    let corpus = Corpus::load(&a.corpus)?;
    let clustered: Vec<ClusteredTopic> = read_json(&a.topics)?;
    let topics: Vec<Vec<f64>> = clustered.into_iter().map(|c| c.mean).collect();
    let run = stm::refit_fixed_topics(&corpus, &topics, &cfg)?;
    let theta = ThetaFile {
        store_ids: corpus.store_ids().to_vec(),
        theta: run.theta_mean(),
    };
    let dir = ctx.out()?;
    write_json(&dir.join("theta.json"), &theta)?;
    write_theta_csv(&theta.store_ids, &theta.theta, create(&dir.join("theta.csv"))?)?;
    write_json(&dir.join("trace.json"), &run.trace)?;
    println!("mixtures over {} topics for {} stores", topics.len(), theta.store_ids.len());
    Ok(())
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Clustered topics written by `summarize-topics`.
    #[arg(long)]
    topics: PathBuf,
    /// Corpus whose training split gives co-occurrence counts.
    #[arg(long)]
    corpus: PathBuf,
    /// Corpus scored in full for perplexity; the test split of `--corpus`
    /// when omitted.
    #[arg(long)]
    heldout: Option<PathBuf>,
    /// Store mixtures written by `refit-theta` (`theta.json`).
    #[arg(long)]
    theta: PathBuf,
    /// Output of `fit-stm`, for credibility.
    #[arg(long)]
    samples: PathBuf,
    #[arg(long)]
    top_n: Option<usize>,
}

#[derive(Serialize)]
struct MetricRow {
    topic: String,
    size: Option<usize>,
    npmi: Option<f64>,
    distinctiveness: Option<f64>,
    credibility: Option<f64>,
    perplexity: Option<f64>,
}

pub fn eval(ctx: &Ctx, a: EvalArgs) -> Result<()> {
    let top_n = a
        .top_n
        .or(ctx.config.as_ref().map(|c| c.summary.top_n))
        .unwrap_or(10);
    let corpus = Corpus::load(&a.corpus)?;
    let heldout = a.heldout.as_deref().map(Corpus::load).transpose()?;
    let clustered: Vec<ClusteredTopic> = read_json(&a.topics)?;
    let theta: ThetaFile = read_json(&a.theta)?;
    let bag = load_bag(&a.samples)?;
    let per_sample: Vec<Vec<Vec<f64>>> = bag.by_sample().into_iter().map(|(_, t)| t).collect();
    let m = topic_metrics(&corpus, heldout.as_ref(), &clustered, &theta.theta, &per_sample, top_n)?;

    let mut w = csv::Writer::from_writer(create(ctx.out()?)?);
    for k in 0..m.n_topics {
        w.serialize(MetricRow {
            topic: format!("topic_{k}"),
            size: Some(m.cluster_sizes[k]),
            npmi: Some(m.npmi[k]),
            distinctiveness: m.distinctiveness[k],
            credibility: Some(m.credibility[k]),
            perplexity: None,
        })?;
    }
    w.serialize(MetricRow {
        topic: "all".into(),
        size: None,
        npmi: Some(m.mean_npmi),
        distinctiveness: m.mean_distinctiveness,
        credibility: Some(m.mean_credibility),
        perplexity: Some(m.perplexity),
    })?;
    w.flush()?;
    println!(
        "{} topics: perplexity {:.4}, mean NPMI {:.4}",
        m.n_topics, m.perplexity, m.mean_npmi
    );
    Ok(())
}
