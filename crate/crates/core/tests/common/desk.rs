//! Desk-scale end-to-end configuration on simulated inputs.

use std::path::Path;

use segtopic::lgpr::McmcConfig;
use segtopic::pipeline::{write_synthetic_inputs, Paths, PipelineConfig};
use segtopic::stm::{Hyper, RefitConfig, SimulationSpec, StmConfig};

pub fn desk_pipeline(inputs: &Path, output: &Path) -> PipelineConfig {
    let stm = StmConfig {
        alpha: Hyper::Symmetric(1.0),
        beta: Hyper::Symmetric(0.05),
        iters: 80,
        burn_in: 40,
        thin: 10,
        chains: 2,
        seed: 21,
        trace_every: 2,
        ..StmConfig::with_topics(3)
    };
    let spec = SimulationSpec {
        stores: 14,
        transactions_per_store: 25,
        basket_size: 7,
        vocab_size: 30,
    };
    let files = write_synthetic_inputs(inputs, &stm, &spec, 5).unwrap();
    let mut cfg = PipelineConfig::new(Paths {
        corpus: files.transactions,
        stores: files.stores,
        output: output.to_path_buf(),
    });
    cfg.ingest.top_v = 30;
    cfg.stm = stm;
    cfg.summary.min_size = 4;
    cfg.summary.grid_thresholds = vec![0.35];
    cfg.summary.grid_min_sizes = vec![2, 4];
    cfg.refit = RefitConfig {
        alpha: Some(Hyper::Symmetric(1.0)),
        burn_in: 20,
        thin: 5,
        samples: 4,
        seed: 3,
        ..RefitConfig::default()
    };
    cfg.gp.mcmc = McmcConfig {
        chains: 2,
        iters: 200,
        burn_in: 100,
        thin: 5,
        seed: 8,
    };
    cfg.gp.heldout_fraction = 0.25;
    cfg
}
