use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lgpr::{GPPriors, McmcConfig};
use crate::stm::{RefitConfig, StmConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Paths {
    /// Line-delimited JSON transaction records.
    pub corpus: PathBuf,
    /// `store_id,postcode,lat,lon,region`
    pub stores: PathBuf,
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestSection {
    pub top_v: usize,
    pub min_basket: usize,
    pub test_fraction: f64,
    pub split_seed: u64,
}

impl Default for IngestSection {
    fn default() -> Self {
        Self {
            top_v: 10_000,
            min_basket: 3,
            test_fraction: 0.1,
            split_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SummarySection {
    pub threshold: f64,
    pub min_size: usize,
    /// Grid evaluated alongside the chosen cell; empty skips the grid.
    pub grid_thresholds: Vec<f64>,
    pub grid_min_sizes: Vec<usize>,
    /// Products per topic used for NPMI.
    pub top_n: usize,
}

impl Default for SummarySection {
    fn default() -> Self {
        Self {
            threshold: 0.35,
            min_size: 10,
            grid_thresholds: vec![0.25, 0.35, 0.45],
            grid_min_sizes: vec![5, 10, 15],
            top_n: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GpSection {
    pub priors: GPPriors,
    pub mcmc: McmcConfig,
    /// Share of stores held out for the LGPR vs LR comparison.
    pub heldout_fraction: f64,
    pub heldout_seed: u64,
    /// Clustered topics to model; all selected topics when empty.
    pub topics: Vec<usize>,
}

impl Default for GpSection {
    fn default() -> Self {
        Self {
            priors: GPPriors::default(),
            mcmc: McmcConfig::default(),
            heldout_fraction: 0.2,
            heldout_seed: 0,
            topics: Vec::new(),
        }
    }
}

/// Everything one end-to-end run needs. Defaults follow the published
/// analysis: 100 topics, four chains, threshold 0.35, minimum cluster size
/// 10, and two GP chains of 2,000 iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub paths: Paths,
    #[serde(default)]
    pub ingest: IngestSection,
    #[serde(default = "default_stm")]
    pub stm: StmConfig,
    #[serde(default)]
    pub summary: SummarySection,
    #[serde(default)]
    pub refit: RefitConfig,
    #[serde(default)]
    pub gp: GpSection,
    /// Reuse outputs of stages that already completed.
    #[serde(default = "default_true")]
    pub resume: bool,
}

fn default_stm() -> StmConfig {
    StmConfig::with_topics(100)
}

fn default_true() -> bool {
    true
}

impl PipelineConfig {
    pub fn new(paths: Paths) -> Self {
        Self {
            paths,
            ingest: IngestSection::default(),
            stm: default_stm(),
            summary: SummarySection::default(),
            refit: RefitConfig::default(),
            gp: GpSection::default(),
            resume: true,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(base) = path.parent() {
            for p in [&mut cfg.paths.corpus, &mut cfg.paths.stores, &mut cfg.paths.output] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    /// Derives every stage seed from one value.
    pub fn reseed(&mut self, seed: u64) {
        self.ingest.split_seed = seed;
        self.stm.seed = seed.wrapping_add(1_000);
        self.refit.seed = seed.wrapping_add(2_000);
        self.gp.mcmc.seed = seed.wrapping_add(3_000);
        self.gp.heldout_seed = seed.wrapping_add(4_000);
    }

    pub fn validate(&self) -> Result<()> {
        self.stm.validate()?;
        self.gp.priors.validate()?;
        self.gp.mcmc.validate()?;
        if !(self.ingest.test_fraction > 0.0 && self.ingest.test_fraction < 1.0) {
            return Err(Error::Config("ingest.test_fraction must lie in (0, 1)".into()));
        }
        if !(self.gp.heldout_fraction > 0.0 && self.gp.heldout_fraction < 1.0) {
            return Err(Error::Config("gp.heldout_fraction must lie in (0, 1)".into()));
        }
        if !(self.summary.threshold > 0.0 && self.summary.threshold < 1.0) || self.summary.min_size == 0 {
            return Err(Error::Config("summary threshold must lie in (0, 1) and min_size be >= 1".into()));
        }
        if self.summary.top_n < 2 {
            return Err(Error::Config("summary.top_n must be at least 2".into()));
        }
        for (name, p) in [("corpus", &self.paths.corpus), ("stores", &self.paths.stores)] {
            if !p.exists() {
                return Err(Error::Config(format!("{name} file {} does not exist", p.display())));
            }
        }
        Ok(())
    }
}
