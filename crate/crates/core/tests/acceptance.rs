//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report reaches stdout under a
//! plain `cargo test`. Pass criterion numbers as arguments to run a subset,
//! e.g. `cargo test --test acceptance -- 1 7`.
//!
//! Criteria 8 and 9 are replicate-count statistics over a fixed set of seeds.
//! A shortfall there is reported as FAIL but does not change the exit
//! status; any other failure does.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use common::desk::desk_pipeline;
use common::{crp_tables_by_enumeration, dense_mvn_log_density, exact_stirling, ratio_ln, Tiny};
use segtopic::corpus::split;
use segtopic::eval::{align_greedy, perplexity, rhat};
use segtopic::geo::{design_columns, random_uk_stores, Region, StoreGeo};
use segtopic::lgpr::{
    coefficient_summary, compare, cov_matrix, fit_lr_baseline, log_likelihood, predict, predict_with,
    sample_posterior, simulate_field, GPDataset, GPParams, GPPriors, GpModel, McmcConfig, PosteriorDraws,
};
use segtopic::pdp::{log_pochhammer, StirlingCache};
use segtopic::pipeline::{run_pipeline, Diagnostics, Paths, PipelineConfig};
use segtopic::rng::{dirichlet, seeded};
use segtopic::stm::{
    refit_fixed_topics, run_chains, simulate, BlockGibbs, Hyper, RefitConfig, SimulationSpec, StmConfig, TokenLayout,
};
use segtopic::summary::{cluster, select, TopicBag};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

type Criterion = (u32, &'static str, bool, fn() -> Outcome);

fn main() {
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [Criterion; 11] = [
        (1, "sampler matches enumerated posterior", false, sampler_correctness),
        (2, "table and count invariants", false, constraint_invariants),
        (3, "Stirling numbers and CRP table law", false, stirling_and_crp),
        (4, "synthetic topic recovery", false, topic_recovery),
        (5, "clustering of noisy topic copies", false, clustering),
        (6, "perplexity ordering", false, perplexity_ordering),
        (7, "GP likelihood and prediction", false, gp_likelihood_and_prediction),
        (8, "GP calibration", true, gp_calibration),
        (9, "LGPR vs LR on held-out stores", true, gp_versus_lr),
        (10, "convergence diagnostics", false, convergence_tooling),
        (11, "pipeline determinism", false, determinism),
    ];
    let mut hard_failures = Vec::new();
    let mut reported = Vec::new();
    for (id, name, statistical, run) in criteria {
        if !args.is_empty() && !args.iter().any(|a| a == &id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let secs = start.elapsed().as_secs_f64();
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {verdict} {name} [{secs:.1}s]: {}", out.detail);
        if !out.pass {
            if statistical {
                reported.push(id);
            } else {
                hard_failures.push(id);
            }
        }
    }
    if !reported.is_empty() {
        println!("statistical shortfalls reported, not fatal: {reported:?}");
    }
    if !hard_failures.is_empty() {
        println!("failed: {hard_failures:?}");
        std::process::exit(1);
    }
}

fn tiny() -> Tiny {
    Tiny {
        baskets: vec![vec![0, 1], vec![0, 1]],
        k: 2,
        v: 2,
        alpha: 0.5,
        beta: 0.5,
        a: 0.5,
        b: 3.0,
    }
}

fn sampler_correctness() -> Outcome {
    let inst = tiny();
    let (exact, _) = inst.posterior();
    let layout = TokenLayout::from_baskets(inst.baskets.iter().map(|b| (0, b.as_slice())), 1, inst.v);
    let cfg = StmConfig {
        alpha: Hyper::Symmetric(inst.alpha),
        beta: Hyper::Symmetric(inst.beta),
        discount: inst.a,
        strength: inst.b,
        ..StmConfig::desk(inst.k)
    };
    let cache = StirlingCache::new(inst.a, 4).unwrap();
    let mut sampler = BlockGibbs::new(&layout, &cfg, &cache).unwrap();
    let mut rng = seeded(2024);
    let mut state = sampler.init(&mut rng);
    for _ in 0..1_000 {
        sampler.sweep(&mut state, &mut rng);
    }
    let sweeps = 2_000_000;
    let mut seen: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
    for _ in 0..sweeps {
        sampler.sweep(&mut state, &mut rng);
        *seen.entry(inst.key(state.topics(), state.indicators())).or_default() += 1;
    }
    let impossible = seen.keys().filter(|k| !exact.contains_key(*k)).count();
    let mut tv = 0.0;
    for (key, p) in &exact {
        tv += (seen.get(key).copied().unwrap_or(0) as f64 / sweeps as f64 - p).abs();
    }
    tv *= 0.5;
    Outcome::new(
        tv < 0.02 && impossible == 0,
        format!("TV {tv:.5} over {} states, {impossible} impossible states visited", exact.len()),
    )
}

fn constraint_invariants() -> Outcome {
    let mut updates = 0usize;
    let mut violations = 0usize;
    let mut corpora = 0usize;
    let mut seed = 0u64;
    while updates < 100_000 {
        seed += 1;
        let mut rng = seeded(seed);
        let k = rng.random_range(2..6);
        let cfg = StmConfig {
            alpha: Hyper::Symmetric(rng.random_range(0.1..2.0)),
            beta: Hyper::Symmetric(rng.random_range(0.01..0.5)),
            discount: rng.random_range(0.0..0.9),
            strength: rng.random_range(0.5..10.0),
            ..StmConfig::desk(k)
        };
        let spec = SimulationSpec {
            stores: rng.random_range(1..5),
            transactions_per_store: rng.random_range(1..8),
            basket_size: rng.random_range(1..9),
            vocab_size: rng.random_range(2..15),
        };
        let sim = simulate(&cfg, &spec, seed).unwrap();
        let layout = TokenLayout::from_corpus(&sim.corpus);
        let cache = StirlingCache::new(cfg.discount, layout.max_basket_len()).unwrap();
        // every third corpus exercises the fixed-topic sampler
        let topics: Vec<Vec<f64>> = (0..k).map(|_| dirichlet(&mut rng, &vec![0.5; spec.vocab_size])).collect();
        let mut sampler = if seed.is_multiple_of(3) {
            BlockGibbs::with_fixed_topics(&layout, &topics, vec![1.0; k], cfg.discount, cfg.strength, &cache).unwrap()
        } else {
            BlockGibbs::new(&layout, &cfg, &cache).unwrap()
        };
        let mut state = sampler.init(&mut rng);
        corpora += 1;
        let n = layout.n_tokens();
        for _ in 0..2_000 {
            let i = rng.random_range(0..n);
            sampler.update_token(&mut state, i, &mut rng);
            updates += 1;
            let total: u32 = (0..k).map(|t| state.topic_total(t)).sum();
            if state.check_invariants(&layout).is_err() || total as usize != n {
                violations += 1;
            }
        }
    }
    Outcome::new(
        violations == 0,
        format!("{violations} violations in {updates} token updates over {corpora} random corpora"),
    )
}

fn stirling_and_crp() -> Outcome {
    let mut worst = 0.0f64;
    let mut zero_mismatch = 0;
    for (num, den) in [(0i64, 1i64), (1, 2), (1, 3), (3, 4)] {
        let a = num as f64 / den as f64;
        let exact = exact_stirling(12, num, den);
        let cache = StirlingCache::new(a, 12).unwrap();
        for n in 0..=12 {
            for m in 0..=n {
                let got = cache.log_stirling(n, m);
                if num_traits::Zero::is_zero(&exact[n][m]) {
                    zero_mismatch += usize::from(got != f64::NEG_INFINITY);
                    continue;
                }
                worst = worst.max(((got - ratio_ln(&exact[n][m])).exp() - 1.0).abs());
            }
        }
    }
    let mut worst_sum = 0.0f64;
    let mut worst_walk = 0.0f64;
    for &(a, b) in &[(0.0, 1.0), (0.5, 3.0), (0.25, 0.7), (0.8, 10.0)] {
        let cache = StirlingCache::new(a, 8).unwrap();
        for n in 1..=8 {
            let walks = crp_tables_by_enumeration(n, a, b);
            let mut total = 0.0;
            for (m, walk) in walks.iter().enumerate().skip(1) {
                let p = (log_pochhammer(b, a, m).unwrap() - log_pochhammer(b, 1.0, n).unwrap()
                    + cache.log_stirling(n, m))
                .exp();
                worst_walk = worst_walk.max((p - walk).abs());
                total += p;
            }
            worst_sum = worst_sum.max((total - 1.0).abs());
        }
    }
    Outcome::new(
        worst <= 1e-10 && zero_mismatch == 0 && worst_sum <= 1e-8,
        format!(
            "max rel err {worst:.2e} (n <= 12); max |sum - 1| {worst_sum:.2e} (n <= 8); \
             max gap to seating walks {worst_walk:.2e}"
        ),
    )
}

fn l1_rows(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()).sum::<f64>())
        .sum::<f64>()
        / a.len() as f64
}

fn topic_recovery() -> Outcome {
    let k = 5;
    let cfg = StmConfig {
        alpha: Hyper::Symmetric(1.0),
        beta: Hyper::Symmetric(0.05),
        iters: 2_000,
        burn_in: 1_000,
        thin: 200,
        chains: 2,
        seed: 9,
        ..StmConfig::desk(k)
    };
    let spec = SimulationSpec {
        stores: 20,
        transactions_per_store: 200,
        basket_size: 8,
        vocab_size: 50,
    };
    let sim = simulate(&cfg, &spec, 4).unwrap();
    let run = run_chains(&sim.corpus, &cfg).unwrap();

    // posterior mean of one chain; labels do not switch within a chain
    let ours: Vec<_> = run.samples.iter().filter(|s| s.chain == 0).collect();
    let mut phi = vec![vec![0.0; spec.vocab_size]; k];
    for s in &ours {
        for (row, est) in phi.iter_mut().zip(&s.phi) {
            for (acc, x) in row.iter_mut().zip(est) {
                *acc += x / ours.len() as f64;
            }
        }
    }
    let alignment = align_greedy(&phi, &sim.phi);
    let cosine = alignment.mean_similarity();
    let mut aligned = vec![Vec::new(); k];
    for (a, b) in alignment.partner_of_a().into_iter().enumerate() {
        aligned[b.expect("K estimated topics for K true ones")] = phi[a].clone();
    }
    let refit = RefitConfig {
        alpha: Some(Hyper::Symmetric(1.0)),
        burn_in: 200,
        thin: 20,
        samples: 20,
        seed: 1,
        ..RefitConfig::default()
    };
    let theta = refit_fixed_topics(&sim.corpus, &aligned, &refit).unwrap().theta_mean();
    let l1 = l1_rows(&theta, &sim.theta);
    Outcome::new(
        cosine >= 0.90 && l1 <= 0.15,
        format!("mean aligned cosine {cosine:.4}, refit theta mean L1 {l1:.4}"),
    )
}

fn clustering() -> Outcome {
    let mut rng = seeded(5);
    let (v, s) = (60, 20);
    let mut topics = Vec::new();
    let mut sample_index = Vec::new();
    for sample in 0..s {
        for k in 0..6 {
            let conc: Vec<f64> = (0..v).map(|w| 500.0 * if w / 10 == k { 0.098 } else { 0.0004 }).collect();
            topics.push(dirichlet(&mut rng, &conc));
            sample_index.push(sample);
        }
    }
    let bag = TopicBag::new(topics, sample_index).unwrap();
    let clusters = cluster(&bag, 0.35).unwrap();
    let mut sizes: Vec<usize> = clusters.iter().map(|c| c.size).collect();
    sizes.sort_unstable();
    let kept = select(&clusters, 10).unwrap().len();
    Outcome::new(
        sizes == vec![20; 6] && kept == 6,
        format!("{} clusters with sizes {sizes:?}; {kept} kept at min size 10", clusters.len()),
    )
}

fn perplexity_ordering() -> Outcome {
    let mut wins = 0;
    let mut gaps = Vec::new();
    for rep in 0..20u64 {
        let cfg = StmConfig {
            alpha: Hyper::Symmetric(1.0),
            beta: Hyper::Symmetric(0.05),
            ..StmConfig::desk(5)
        };
        let spec = SimulationSpec {
            stores: 10,
            transactions_per_store: 50,
            basket_size: 6,
            vocab_size: 40,
        };
        let sim = simulate(&cfg, &spec, 100 + rep).unwrap();
        let corpus = split(&sim.corpus, 0.2, rep).unwrap();
        let mut rng = seeded(200 + rep);
        let shuffled: Vec<Vec<f64>> = sim
            .phi
            .iter()
            .map(|row| {
                let mut r = row.clone();
                r.shuffle(&mut rng);
                r
            })
            .collect();
        let truth = perplexity(&corpus, &sim.phi, &sim.theta).unwrap();
        let other = perplexity(&corpus, &shuffled, &sim.theta).unwrap();
        wins += usize::from(truth < other);
        gaps.push(other - truth);
    }
    let v = 40;
    let cfg = StmConfig::desk(1);
    let spec = SimulationSpec {
        stores: 3,
        transactions_per_store: 30,
        basket_size: 5,
        vocab_size: v,
    };
    let corpus = split(&simulate(&cfg, &spec, 1).unwrap().corpus, 0.3, 0).unwrap();
    let uniform = perplexity(&corpus, &[vec![1.0 / v as f64; v]], &vec![vec![1.0]; 3]).unwrap();
    let err = (uniform - (v as f64).ln()).abs();
    let min_gap = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    Outcome::new(
        wins == 20 && err <= 1e-9,
        format!("true < shuffled in {wins}/20 (smallest gap {min_gap:.3}); uniform model off log V by {err:.1e}"),
    )
}

fn fixed_draws(model: GpModel, params: Vec<GPParams>) -> PosteriorDraws {
    PosteriorDraws {
        model,
        priors: GPPriors::default(),
        mcmc: McmcConfig::default(),
        log_post: vec![vec![0.0; params.len()]],
        acceptance: vec![vec![]],
        draws: vec![params],
        rhat: vec![],
    }
}

fn gp_likelihood_and_prediction() -> Outcome {
    let mut rng = seeded(3);
    let mut worst_ll = 0.0f64;
    for n in 1..=5 {
        for _ in 0..20 {
            let pts: Vec<(f64, f64)> =
                (0..n).map(|_| (rng.random_range(0.0..200.0), rng.random_range(0.0..200.0))).collect();
            let dist = DMatrix::from_fn(n, n, |i, j| {
                ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt()
            });
            let x = DMatrix::from_fn(n, 2, |_, j| if j == 0 { 1.0 } else { rng.random_range(-1.0..1.0) });
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let data = GPDataset::from_parts(y.clone(), x.clone(), dist.clone()).unwrap();
            let params = GPParams {
                beta: vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
                amplitude: rng.random_range(0.1..2.0),
                length_scale: rng.random_range(10.0..150.0),
                sigma: rng.random_range(0.2..1.0),
            };
            let mut s = cov_matrix(&dist, params.amplitude, params.length_scale);
            for i in 0..n {
                s[(i, i)] += params.sigma * params.sigma;
            }
            let rows: Vec<Vec<f64>> = (0..n).map(|i| s.row(i).iter().copied().collect()).collect();
            let mu: Vec<f64> = (0..n).map(|i| x[(i, 0)] * params.beta[0] + x[(i, 1)] * params.beta[1]).collect();
            let want = dense_mvn_log_density(&y, &mu, &rows);
            worst_ll = worst_ll.max((log_likelihood(&data, &params).unwrap() - want).abs());
        }
    }

    let stores = vec![
        StoreGeo::new("a", 51.5, -0.1, Region::London).unwrap(),
        StoreGeo::new("b", 53.4, -2.2, Region::NorthWest).unwrap(),
        StoreGeo::new("c", 55.9, -3.2, Region::Scotland).unwrap(),
        StoreGeo::new("d", 51.6, -3.9, Region::Wales).unwrap(),
    ];
    let train = GPDataset::from_stores(&stores, vec![0.3, -0.5, 0.8, 0.1]).unwrap();
    let mut beta = vec![0.0; 12];
    beta[0] = 0.1;
    beta[2] = -0.4;
    let tight = fixed_draws(
        GpModel::Lgpr,
        vec![GPParams { beta: beta.clone(), amplitude: 1.0, length_scale: 100.0, sigma: 1e-6 }],
    );
    let at = predict(&train, &tight, &train).unwrap();
    let worst_interp = (0..4).map(|i| (at.mean[i] - train.y[i]).abs()).fold(0.0, f64::max);

    // an LGPR posterior whose amplitude is zero against the fitted LR baseline
    let lr = fit_lr_baseline(&train, &GPPriors::default(), &McmcConfig { iters: 400, burn_in: 200, ..Default::default() })
        .unwrap();
    let mut flat = lr.clone();
    flat.model = GpModel::Lgpr;
    let new_x = DMatrix::from_row_slice(1, 12, &{
        let mut r = vec![0.0; 12];
        r[0] = 1.0;
        r[3] = 1.0;
        r
    });
    let cross = DMatrix::from_row_slice(1, 4, &[5.0, 250.0, 500.0, 40.0]);
    let a = predict_with(&train, &flat, &new_x, &cross, vec!["n".into()]).unwrap();
    let b = predict_with(&train, &lr, &new_x, &cross, vec!["n".into()]).unwrap();
    let xb_exact = lr.iter().zip(&a.means).all(|(d, m)| m[0] == d.beta[0] + d.beta[3]);
    let equal = a.means == b.means && a.variances == b.variances && a.mean == b.mean && xb_exact;

    Outcome::new(
        worst_ll < 1e-8 && worst_interp < 1e-3 && equal,
        format!(
            "likelihood vs dense inverse max gap {worst_ll:.1e} (n <= 5); interpolation error {worst_interp:.1e}; \
             amplitude-0 predictions identical to LR: {equal}"
        ),
    )
}

fn calibration_beta() -> Vec<f64> {
    let mut beta = vec![0.0; 12];
    beta[0] = -1.0;
    beta[2] = 1.5;
    beta[3] = 1.0;
    beta[10] = -1.0;
    beta
}

fn gp_calibration() -> Outcome {
    let beta = calibration_beta();
    let truth = GPParams { beta: beta.clone(), amplitude: 1.0, length_scale: 60.0, sigma: 0.5 };
    let names = design_columns();
    let reps: Vec<(Vec<bool>, bool)> = (0..20u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = seeded(1000 + rep);
            let stores = random_uk_stores(&mut rng, 80, "s");
            let sim = simulate_field(&mut rng, &stores, &truth).unwrap();
            let mc = McmcConfig { seed: 7 + rep, ..Default::default() };
            let draws = sample_posterior(&sim.data, &GPPriors::default(), &mc).unwrap();
            let rows = coefficient_summary(&draws, &names).unwrap();
            let covered = (0..12).map(|j| rows[j].lower <= beta[j] && beta[j] <= rows[j].upper).collect();
            let mut rho: Vec<f64> = draws.iter().map(|p| p.length_scale).collect();
            rho.sort_by(f64::total_cmp);
            let median = rho[rho.len() / 2];
            (covered, (30.0..=120.0).contains(&median))
        })
        .collect();
    let coverage: Vec<usize> = (0..12).map(|j| reps.iter().filter(|r| r.0[j]).count()).collect();
    let rho_ok = reps.iter().filter(|r| r.1).count();
    let short: Vec<&str> = names.iter().zip(&coverage).filter(|(_, &c)| c < 18).map(|(n, _)| *n).collect();
    Outcome::new(
        short.is_empty() && rho_ok >= 16,
        format!(
            "coverage per coefficient {coverage:?}/20 (need 18; short: {short:?}); median length scale in \
             [30, 120] km in {rho_ok}/20 (need 16)"
        ),
    )
}

fn gp_versus_lr() -> Outcome {
    let beta = calibration_beta();
    let run = |amplitude: f64| -> Vec<segtopic::lgpr::Comparison> {
        let truth = GPParams { beta: beta.clone(), amplitude, length_scale: 60.0, sigma: 0.5 };
        (0..20u64)
            .into_par_iter()
            .map(|rep| {
                let mut rng = seeded(3000 + rep);
                let stores = random_uk_stores(&mut rng, 120, "s");
                let sim = simulate_field(&mut rng, &stores, &truth).unwrap();
                let train = sim.data.subset(&(0..80).collect::<Vec<_>>());
                let test = sim.data.subset(&(80..120).collect::<Vec<_>>());
                let mc = McmcConfig { seed: 11 + rep, ..Default::default() };
                let gp = sample_posterior(&train, &GPPriors::default(), &mc).unwrap();
                let lr = fit_lr_baseline(&train, &GPPriors::default(), &mc).unwrap();
                compare(&predict(&train, &gp, &test).unwrap(), &predict(&train, &lr, &test).unwrap(), &test).unwrap()
            })
            .collect()
    };
    let spatial = run(1.0);
    let noise = run(0.0);
    let count = |v: &[segtopic::lgpr::Comparison], f: &dyn Fn(&segtopic::lgpr::Comparison) -> bool| {
        v.iter().filter(|c| f(c)).count()
    };
    let lppd_sig = count(&spatial, &|c| c.lppd_a > c.lppd_b && c.p_lppd < 0.05);
    let mse_sig = count(&spatial, &|c| c.mse_a < c.mse_b && c.p_mse < 0.05);
    let lppd_dir = count(&spatial, &|c| c.lppd_a > c.lppd_b);
    let mse_dir = count(&spatial, &|c| c.mse_a < c.mse_b);
    let insig = count(&noise, &|c| c.p_mse > 0.05);
    Outcome::new(
        lppd_sig >= 18 && mse_sig >= 15 && insig >= 17,
        format!(
            "spatial data: LGPR better lppd with p < 0.05 in {lppd_sig}/20 (need 18), better MSE with p < 0.05 in \
             {mse_sig}/20 (need 15); direction alone {lppd_dir}/20 and {mse_dir}/20; uncorrelated data: MSE \
             difference p > 0.05 in {insig}/20 (need 17)"
        ),
    )
}

fn convergence_tooling() -> Outcome {
    let mut rng = seeded(10);
    let chain: Vec<f64> = (0..1_000_000).map(|_| rng.random_range(-1.0..1.0)).collect();
    let same = rhat(&[chain.clone(), chain.clone()]).unwrap();
    let shifted: Vec<f64> = chain.iter().map(|x| x + 3.0).collect();
    let apart = rhat(&[chain, shifted]).unwrap();

    let tmp = tempfile::tempdir().unwrap();
    let cfg = desk_pipeline(&tmp.path().join("in"), &tmp.path().join("out"));
    run_pipeline(&cfg).unwrap();
    let diag: Diagnostics = serde_json::from_slice(&fs::read(tmp.path().join("out/diagnostics.json")).unwrap()).unwrap();
    let stm = diag.stm_log_prob_rhat;
    let gp_ok = !diag.gp.is_empty()
        && diag.gp.iter().all(|g| {
            ["log_post", "amplitude", "length_scale", "sigma"]
                .iter()
                .all(|name| g.rhat.iter().any(|r| &r.name == name && r.value.is_finite()))
        });
    Outcome::new(
        (same - 1.0).abs() <= 1e-6 && apart > 1.5 && stm.is_some() && gp_ok,
        format!(
            "identical chains {same:.9}; shifted chains {apart:.2}; pipeline STM log-prob R-hat {stm:?}, GP scalar \
             R-hat for {} topics: {gp_ok}",
            diag.gp.len()
        ),
    )
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = desk_pipeline(&tmp.path().join("in"), &tmp.path().join("a"));
    run_pipeline(&cfg).unwrap();
    let again = PipelineConfig {
        paths: Paths {
            output: tmp.path().join("b"),
            ..cfg.paths.clone()
        },
        ..cfg.clone()
    };
    run_pipeline(&again).unwrap();
    let a = fs::read(tmp.path().join("a/manifest.json")).unwrap();
    let b = fs::read(tmp.path().join("b/manifest.json")).unwrap();
    Outcome::new(a == b, format!("two runs with identical seeds: manifests of {} bytes, identical: {}", a.len(), a == b))
}
