//! End-to-end run: ingest, topic model, summary, refit, evaluation, spatial
//! regression per topic, comparison and export.
//!
//! Every artifact lands under the output directory and is listed with its
//! SHA-256 in `manifest.json`. Paths in the manifest are relative and it
//! carries no timestamps, so equal inputs and seeds give identical bytes.

mod config;
mod export;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{self, Corpus, IngestOptions};
use crate::error::{Error, Result};
use crate::eval::{self, split_rhat, CoOccurrence};
use crate::geo::{self, logit, StoreGeo};
use crate::lgpr::{self, Comparison, Decomposition, GPDataset, PosteriorDraws, RhatEntry};
use crate::rng::seeded;
use crate::stm::{self, PosteriorSample, SimulationSpec, StmConfig, Trace};
use crate::summary::{self, ClusteredTopic, GridContext, TopicBag};

pub use config::{GpSection, IngestSection, Paths, PipelineConfig, SummarySection};
pub use export::{export_map, read_value_column, MapExport, Scale, SkippedRow};

pub const STAGES: [&str; 8] = [
    "ingest",
    "fit-stm",
    "summarize-topics",
    "refit-theta",
    "eval-topics",
    "fit-gp",
    "compare-gp-lr",
    "export-map",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Settings echoed into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub topics: usize,
    pub stm_chains: usize,
    pub stm_iters: usize,
    pub stm_burn_in: usize,
    pub stm_thin: usize,
    pub threshold: f64,
    pub min_size: usize,
    pub gp_chains: usize,
    pub gp_iters: usize,
    pub gp_burn_in: usize,
    pub gp_thin: usize,
}

impl From<&PipelineConfig> for RunSettings {
    fn from(c: &PipelineConfig) -> Self {
        Self {
            topics: c.stm.k,
            stm_chains: c.stm.chains,
            stm_iters: c.stm.iters,
            stm_burn_in: c.stm.burn_in,
            stm_thin: c.stm.thin,
            threshold: c.summary.threshold,
            min_size: c.summary.min_size,
            gp_chains: c.gp.mcmc.chains,
            gp_iters: c.gp.mcmc.iters,
            gp_burn_in: c.gp.mcmc.burn_in,
            gp_thin: c.gp.mcmc.thin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub settings: RunSettings,
    pub completed: Vec<String>,
    pub failed: Option<String>,
    pub artifacts: Vec<Artifact>,
}

/// R-hat summaries gathered along the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Split R-hat of the joint log-probability traces after burn-in;
    /// `None` with fewer than two chains or ten trace points.
    pub stm_log_prob_rhat: Option<f64>,
    pub stm_chains: usize,
    pub stm_trace_points: usize,
    pub gp: Vec<TopicDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicDiagnostics {
    pub topic: usize,
    pub rhat: Vec<RhatEntry>,
    pub acceptance: Vec<Vec<f64>>,
}

/// Topic-quality metrics of the selected clustered topics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicMetrics {
    pub n_topics: usize,
    /// Held-out negative log-likelihood per token.
    pub perplexity: f64,
    pub npmi: Vec<f64>,
    pub mean_npmi: f64,
    /// `None` for a topic with no peers.
    pub distinctiveness: Vec<Option<f64>>,
    pub mean_distinctiveness: Option<f64>,
    pub credibility: Vec<f64>,
    pub mean_credibility: f64,
    pub cluster_sizes: Vec<usize>,
}

/// Scores selected clustered topics. NPMI counts co-occurrence in the
/// training split of `corpus`. Perplexity scores the store mixtures `theta`
/// on every basket of `heldout` when given, else on the test split of
/// `corpus`. Credibility compares against the topics of every posterior
/// sample in `samples`.
pub fn topic_metrics(
    corpus: &Corpus,
    heldout: Option<&Corpus>,
    topics: &[ClusteredTopic],
    theta: &[Vec<f64>],
    samples: &[Vec<Vec<f64>>],
    top_n: usize,
) -> Result<TopicMetrics> {
    if topics.is_empty() {
        return Err(Error::InvalidArgument("no topics to evaluate".into()));
    }
    let rows: Vec<&[f64]> = topics.iter().map(|c| c.mean.as_slice()).collect();
    let counts = CoOccurrence::from_corpus(corpus);
    let npmi = rows
        .iter()
        .map(|t| eval::npmi(t, &counts, top_n.min(t.len())))
        .collect::<Result<Vec<f64>>>()?;
    let distinctiveness: Vec<Option<f64>> = (0..rows.len())
        .map(|i| {
            let peers: Vec<&[f64]> = (0..rows.len()).filter(|&j| j != i).map(|j| rows[j]).collect();
            eval::distinctiveness(rows[i], &peers)
        })
        .collect();
    let credibility = rows
        .iter()
        .map(|t| eval::credibility(t, samples))
        .collect::<Result<Vec<f64>>>()?;
    let phi: Vec<Vec<f64>> = rows.iter().map(|t| t.to_vec()).collect();
    let n = rows.len() as f64;
    let known: Vec<f64> = distinctiveness.iter().flatten().copied().collect();
    Ok(TopicMetrics {
        n_topics: rows.len(),
        perplexity: match heldout {
            Some(h) => {
                if h.store_ids() != corpus.store_ids() {
                    return Err(Error::InvalidArgument(
                        "held-out corpus indexes stores differently from the training corpus".into(),
                    ));
                }
                eval::perplexity_of(h.transactions().iter().map(|t| (t.store, t.items.as_slice())), &phi, theta)?
            }
            None => eval::perplexity(corpus, &phi, theta)?,
        },
        mean_npmi: npmi.iter().sum::<f64>() / n,
        npmi,
        mean_distinctiveness: (!known.is_empty()).then(|| known.iter().sum::<f64>() / known.len() as f64),
        distinctiveness,
        mean_credibility: credibility.iter().sum::<f64>() / n,
        credibility,
        cluster_sizes: topics.iter().map(|c| c.size).collect(),
    })
}

/// Output of the spatial stage for one clustered topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicFit {
    pub topic: usize,
    pub comparison: Comparison,
    pub decomposition: Decomposition,
    pub diagnostics: TopicDiagnostics,
}

struct Outputs {
    root: PathBuf,
    artifacts: BTreeMap<String, Artifact>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Outputs {
    fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    fn put(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let p = self.path(rel);
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(&p, bytes)?;
        self.record(rel, bytes);
        Ok(())
    }

    fn put_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.put(rel, &bytes)
    }

    fn record(&mut self, rel: &str, bytes: &[u8]) {
        self.artifacts.insert(
            rel.to_string(),
            Artifact {
                path: rel.to_string(),
                sha256: sha256_hex(bytes),
                bytes: bytes.len() as u64,
            },
        );
    }

    /// Registers a file written by an earlier, resumed run.
    fn adopt(&mut self, rel: &str) -> Result<()> {
        let bytes = fs::read(self.path(rel))?;
        self.record(rel, &bytes);
        Ok(())
    }

    fn get_json<T: DeserializeOwned>(&self, rel: &str) -> Result<T> {
        let bytes = fs::read(self.path(rel))?;
        Ok(serde_json::from_slice(&bytes)?)
    }

    fn marker(&self, stage: &str) -> PathBuf {
        self.root.join(".stages").join(format!("{stage}.json"))
    }

    /// Outputs recorded for a completed stage, if all of them still exist.
    fn completed(&self, stage: &str) -> Option<Vec<String>> {
        let files: Vec<String> = serde_json::from_slice(&fs::read(self.marker(stage)).ok()?).ok()?;
        files.iter().all(|f| self.path(f).exists()).then_some(files)
    }

    fn mark(&self, stage: &str, files: &[String]) -> Result<()> {
        let m = self.marker(stage);
        fs::create_dir_all(m.parent().expect("marker has a parent"))?;
        fs::write(m, serde_json::to_vec(files)?)?;
        Ok(())
    }
}

fn to_csv<F>(write: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut Vec<u8>) -> Result<()>,
{
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

/// `store_id,topic_0,...` with one row per store.
pub fn write_theta_csv<W: std::io::Write>(store_ids: &[String], theta: &[Vec<f64>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let k = theta.first().map_or(0, Vec::len);
    let mut header = vec!["store_id".to_string()];
    header.extend((0..k).map(|j| format!("topic_{j}")));
    w.write_record(&header)?;
    for (id, row) in store_ids.iter().zip(theta) {
        let mut rec = vec![id.clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Splits store indices into (train, held-out), held-out share `fraction`.
pub fn heldout_split(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let n_test = ((n as f64 * fraction).round() as usize).max(1);
    if n < n_test + 2 {
        return Err(Error::InvalidArgument(format!(
            "{n} located stores are too few for a held-out comparison"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seeded(seed));
    let mut test = idx[..n_test].to_vec();
    let mut train = idx[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

/// Joins `(store_id, probability)` rows with store locations on the logit
/// scale. Rows whose store has no location are dropped with a warning.
pub fn located_dataset(values: &[(String, f64)], stores: &[StoreGeo]) -> Result<GPDataset> {
    let mut located = Vec::new();
    let mut y = Vec::new();
    for (id, p) in values {
        match stores.iter().find(|s| &s.store_id == id) {
            Some(s) => {
                located.push(s.clone());
                y.push(logit(*p));
            }
            None => log::warn!("store {id} has no location and is left out of the spatial fit"),
        }
    }
    GPDataset::from_stores(&located, y)
}

/// [`located_dataset`] for column `topic` of a store-mixture matrix.
pub fn topic_dataset(
    store_ids: &[String],
    theta: &[Vec<f64>],
    topic: usize,
    stores: &[StoreGeo],
) -> Result<GPDataset> {
    let values: Vec<(String, f64)> = store_ids.iter().cloned().zip(theta.iter().map(|r| r[topic])).collect();
    located_dataset(&values, stores)
}

/// Fits LGPR and the linear baseline on a seeded share of the stores and
/// scores both on the rest.
pub fn heldout_comparison(data: &GPDataset, gp: &GpSection) -> Result<Comparison> {
    let (train_idx, test_idx) = heldout_split(data.len(), gp.heldout_fraction, gp.heldout_seed)?;
    let (train, test) = (data.subset(&train_idx), data.subset(&test_idx));
    let a = lgpr::sample_posterior(&train, &gp.priors, &gp.mcmc)?;
    let b = lgpr::fit_lr_baseline(&train, &gp.priors, &gp.mcmc)?;
    lgpr::compare(&lgpr::predict(&train, &a, &test)?, &lgpr::predict(&train, &b, &test)?, &test)
}

/// Full-data LGPR fit plus the held-out comparison against the baseline.
pub fn fit_topic(data: &GPDataset, topic: usize, gp: &GpSection) -> Result<(PosteriorDraws, TopicFit)> {
    let full = lgpr::sample_posterior(data, &gp.priors, &gp.mcmc)?;
    let decomposition = lgpr::decompose(data, &full)?;
    let comparison = heldout_comparison(data, gp)?;
    let diagnostics = TopicDiagnostics {
        topic,
        rhat: full.rhat.clone(),
        acceptance: full.acceptance.clone(),
    };
    Ok((
        full,
        TopicFit {
            topic,
            comparison,
            decomposition,
            diagnostics,
        },
    ))
}

/// Split R-hat over the post-burn-in parts of several traces, truncated to
/// a common length.
pub fn trace_rhat(traces: &[Trace], burn_in: usize) -> (Option<f64>, usize) {
    let parts: Vec<Vec<f64>> = traces.iter().map(|t| t.after(burn_in)).collect();
    let len = parts.iter().map(Vec::len).min().unwrap_or(0);
    let trimmed: Vec<Vec<f64>> = parts.into_iter().map(|p| p[..len].to_vec()).collect();
    (split_rhat(&trimmed).ok(), len)
}

fn stage<T>(name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    log::info!("stage {name}");
    f().map_err(|e| Error::Stage {
        stage: name.to_string(),
        source: Box::new(e),
    })
}

struct Run<'a> {
    cfg: &'a PipelineConfig,
    out: Outputs,
    completed: Vec<String>,
}

impl Run<'_> {
    /// Runs `compute` unless resuming a completed stage. `compute` returns
    /// the files it wrote (already registered).
    fn step(&mut self, name: &str, compute: impl FnOnce(&mut Outputs) -> Result<Vec<String>>) -> Result<()> {
        if self.cfg.resume {
            if let Some(files) = self.out.completed(name) {
                log::info!("stage {name}: reusing {} outputs", files.len());
                for f in &files {
                    self.out.adopt(f)?;
                }
                self.completed.push(name.to_string());
                return Ok(());
            }
        }
        let files = stage(name, || compute(&mut self.out))?;
        self.out.mark(name, &files)?;
        self.completed.push(name.to_string());
        Ok(())
    }

    fn manifest(&self, failed: Option<String>) -> Manifest {
        Manifest {
            settings: RunSettings::from(self.cfg),
            completed: self.completed.clone(),
            failed,
            artifacts: self.out.artifacts.values().cloned().collect(),
        }
    }
}

const CORPUS: &str = "corpus.json";
const SAMPLES: &str = "stm/samples.json";
const TRACES: &str = "stm/traces.json";
const CLUSTERS: &str = "summary/clustered_topics.json";
const GRID: &str = "summary/grid.csv";
const THETA_JSON: &str = "refit/theta.json";
const THETA_CSV: &str = "refit/theta.csv";
const REFIT_TRACE: &str = "refit/trace.json";
const METRICS: &str = "eval/metrics.json";
const FITS: &str = "gp/fits.json";
const COMPARISON: &str = "gp/comparison.csv";
const DIAGNOSTICS: &str = "diagnostics.json";
const SKIPPED: &str = "maps/skipped.json";

/// Refit store mixtures, one row per store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaFile {
    pub store_ids: Vec<String>,
    pub theta: Vec<Vec<f64>>,
}

/// Executes every stage in order and writes `manifest.json`.
///
/// On failure the manifest still lists the completed stages and their
/// artifacts, names the failed stage, and the error is returned.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Manifest> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.paths.output)?;
    let mut run = Run {
        cfg,
        out: Outputs {
            root: cfg.paths.output.clone(),
            artifacts: BTreeMap::new(),
        },
        completed: Vec::new(),
    };
    let result = run_stages(&mut run);
    let failed = match &result {
        Err(Error::Stage { stage, .. }) => Some(stage.clone()),
        Err(_) => Some("unknown".into()),
        Ok(()) => None,
    };
    let manifest = run.manifest(failed);
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    fs::write(cfg.paths.output.join("manifest.json"), bytes)?;
    result.map(|()| manifest)
}

fn run_stages(run: &mut Run<'_>) -> Result<()> {
    let cfg = run.cfg;

    run.step("ingest", |out| {
        let opts = IngestOptions {
            top_v: cfg.ingest.top_v,
            min_basket: cfg.ingest.min_basket,
        };
        let c = corpus::ingest_path(&cfg.paths.corpus, opts)?;
        let c = corpus::split(&c, cfg.ingest.test_fraction, cfg.ingest.split_seed)?;
        let mut bytes = serde_json::to_vec(&corpus::CorpusFile::from(&c))?;
        bytes.push(b'\n');
        out.put(CORPUS, &bytes)?;
        Ok(vec![CORPUS.into()])
    })?;
    let corpus = Corpus::load(&run.out.path(CORPUS))?;

    run.step("fit-stm", |out| {
        let chains = stm::run_chains(&corpus, &cfg.stm)?;
        out.put_json(SAMPLES, &chains.samples)?;
        out.put_json(TRACES, &chains.traces)?;
        Ok(vec![SAMPLES.into(), TRACES.into()])
    })?;
    let samples: Vec<PosteriorSample> = run.out.get_json(SAMPLES)?;
    let traces: Vec<Trace> = run.out.get_json(TRACES)?;
    let bag = TopicBag::from_samples(&samples);

    run.step("summarize-topics", |out| {
        let clusters = summary::cluster(&bag, cfg.summary.threshold)?;
        let selected = summary::select(&clusters, cfg.summary.min_size)?;
        if selected.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "no clustered topic reaches size {}",
                cfg.summary.min_size
            )));
        }
        out.put_json(CLUSTERS, &selected)?;
        let mut files = vec![CLUSTERS.to_string()];
        if !cfg.summary.grid_thresholds.is_empty() && !cfg.summary.grid_min_sizes.is_empty() {
            let ctx = GridContext {
                corpus: &corpus,
                refit: &cfg.refit,
                top_n: cfg.summary.top_n,
            };
            let rows = summary::grid_evaluate(&bag, &cfg.summary.grid_thresholds, &cfg.summary.grid_min_sizes, &ctx)?;
            let bytes = to_csv(|buf| {
                let mut w = csv::Writer::from_writer(buf);
                for r in &rows {
                    w.serialize(r)?;
                }
                w.flush()?;
                Ok(())
            })?;
            out.put(GRID, &bytes)?;
            files.push(GRID.into());
        }
        Ok(files)
    })?;
    let selected: Vec<ClusteredTopic> = run.out.get_json(CLUSTERS)?;
    let topics: Vec<Vec<f64>> = selected.iter().map(|c| c.mean.clone()).collect();

    run.step("refit-theta", |out| {
        let refit = stm::refit_fixed_topics(&corpus, &topics, &cfg.refit)?;
        let theta = ThetaFile {
            store_ids: corpus.store_ids().to_vec(),
            theta: refit.theta_mean(),
        };
        out.put_json(THETA_JSON, &theta)?;
        out.put(THETA_CSV, &to_csv(|b| write_theta_csv(&theta.store_ids, &theta.theta, b))?)?;
        out.put_json(REFIT_TRACE, &refit.trace)?;
        Ok(vec![THETA_JSON.into(), THETA_CSV.into(), REFIT_TRACE.into()])
    })?;
    let theta: ThetaFile = run.out.get_json(THETA_JSON)?;

    run.step("eval-topics", |out| {
        let per_sample: Vec<Vec<Vec<f64>>> = bag.by_sample().into_iter().map(|(_, t)| t).collect();
        let metrics = topic_metrics(&corpus, None, &selected, &theta.theta, &per_sample, cfg.summary.top_n)?;
        out.put_json(METRICS, &metrics)?;
        Ok(vec![METRICS.into()])
    })?;

    let stores = geo::read_stores_path(&cfg.paths.stores)?;
    let modelled: Vec<usize> = if cfg.gp.topics.is_empty() {
        (0..topics.len()).collect()
    } else {
        cfg.gp.topics.clone()
    };
    run.step("fit-gp", |out| {
        if let Some(&bad) = modelled.iter().find(|&&k| k >= topics.len()) {
            return Err(Error::InvalidArgument(format!("topic {bad} does not exist")));
        }
        let fits: Vec<(PosteriorDraws, TopicFit)> = modelled
            .par_iter()
            .map(|&k| {
                let data = topic_dataset(&theta.store_ids, &theta.theta, k, &stores)?;
                fit_topic(&data, k, &cfg.gp)
            })
            .collect::<Result<_>>()?;
        let mut files = Vec::new();
        for (draws, fit) in &fits {
            let dir = format!("gp/topic_{}", fit.topic);
            let rows = lgpr::coefficient_summary(draws, &geo::design_columns())?;
            let coef = format!("{dir}/coefficients.csv");
            out.put(&coef, &to_csv(|b| lgpr::write_coefficients(&rows, b))?)?;
            let resid = format!("{dir}/residuals.csv");
            out.put(&resid, &to_csv(|b| lgpr::write_decomposition(&fit.decomposition, &stores, b))?)?;
            let dj = format!("{dir}/draws.json");
            out.put_json(&dj, draws)?;
            files.extend([coef, resid, dj]);
        }
        let fits: Vec<TopicFit> = fits.into_iter().map(|(_, f)| f).collect();
        out.put_json(FITS, &fits)?;
        files.push(FITS.into());
        Ok(files)
    })?;
    let fits: Vec<TopicFit> = run.out.get_json(FITS)?;

    run.step("compare-gp-lr", |out| {
        let rows: Vec<(String, Comparison)> = fits
            .iter()
            .map(|f| (format!("topic_{}", f.topic), f.comparison.clone()))
            .collect();
        out.put(COMPARISON, &to_csv(|b| lgpr::write_comparison(&rows, b))?)?;
        let (rhat, points) = trace_rhat(&traces, cfg.stm.burn_in);
        let diag = Diagnostics {
            stm_log_prob_rhat: rhat,
            stm_chains: traces.len(),
            stm_trace_points: points,
            gp: fits.iter().map(|f| f.diagnostics.clone()).collect(),
        };
        out.put_json(DIAGNOSTICS, &diag)?;
        Ok(vec![COMPARISON.into(), DIAGNOSTICS.into()])
    })?;

    run.step("export-map", |out| {
        let mut files = Vec::new();
        let mut skipped: BTreeMap<String, Vec<SkippedRow>> = BTreeMap::new();
        for f in &fits {
            let k = f.topic;
            let prob: Vec<(String, f64)> = theta
                .store_ids
                .iter()
                .zip(&theta.theta)
                .map(|(id, row)| (id.clone(), row[k]))
                .collect();
            let spatial: Vec<(String, f64)> = f
                .decomposition
                .store_ids
                .iter()
                .cloned()
                .zip(f.decomposition.spatial.iter().copied())
                .collect();
            for (name, values) in [("probability", prob), ("spatial", spatial)] {
                let m = export_map(&values, &stores, Scale::Identity);
                let rel = format!("maps/topic_{k}_{name}.geojson");
                out.put_json(&rel, &m.geojson)?;
                files.push(rel.clone());
                if !m.skipped.is_empty() {
                    skipped.insert(rel, m.skipped);
                }
            }
        }
        out.put_json(SKIPPED, &skipped)?;
        files.push(SKIPPED.into());
        Ok(files)
    })?;
    Ok(())
}

/// Loads a manifest written by [`run_pipeline`].
pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    Ok(serde_json::from_slice(&fs::read(dir.join("manifest.json"))?)?)
}

/// Files written by [`write_synthetic_inputs`].
#[derive(Debug, Clone)]
pub struct SyntheticInputs {
    pub transactions: PathBuf,
    pub stores: PathBuf,
    pub truth: PathBuf,
}

/// Simulates transactions from the generative model and places the stores
/// uniformly in the UK box. Writes `transactions.jsonl`, `stores.csv` and
/// `truth.json` into `dir`.
pub fn write_synthetic_inputs(dir: &Path, stm: &StmConfig, spec: &SimulationSpec, seed: u64) -> Result<SyntheticInputs> {
    fs::create_dir_all(dir)?;
    let sim = stm::simulate(stm, spec, seed)?;
    let files = SyntheticInputs {
        transactions: dir.join("transactions.jsonl"),
        stores: dir.join("stores.csv"),
        truth: dir.join("truth.json"),
    };
    sim.corpus.write_records(fs::File::create(&files.transactions)?)?;
    let mut rng = seeded(seed.wrapping_add(1));
    let mut stores = geo::random_uk_stores(&mut rng, sim.corpus.n_stores(), "");
    for (s, id) in stores.iter_mut().zip(sim.corpus.store_ids()) {
        s.store_id = id.clone();
    }
    geo::write_stores(&stores, fs::File::create(&files.stores)?)?;
    fs::write(&files.truth, serde_json::to_vec_pretty(&sim.truth())?)?;
    Ok(files)
}
