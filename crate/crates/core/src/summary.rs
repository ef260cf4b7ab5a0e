//! Summarizing topics pooled from many posterior samples.
//!
//! Topics are merged bottom-up by the cosine distance between cluster means,
//! never combining two topics drawn from the same posterior sample. Each
//! surviving cluster's mean is a *clustered topic*; its size counts how many
//! samples the topic recurred in.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::eval::{self, cosine_distance, CoOccurrence};
use crate::stm::{refit_fixed_topics, PosteriorSample, RefitConfig};

/// Topic distributions tagged with the posterior sample they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicBag {
    pub topics: Vec<Vec<f64>>,
    pub sample_index: Vec<usize>,
}

impl TopicBag {
    pub fn new(topics: Vec<Vec<f64>>, sample_index: Vec<usize>) -> Result<Self> {
        if topics.len() != sample_index.len() {
            return Err(Error::Dimension(format!(
                "{} topics but {} sample indices",
                topics.len(),
                sample_index.len()
            )));
        }
        Ok(Self {
            topics,
            sample_index,
        })
    }

    /// Pools the topics of every sample; sample `i` of the slice gets index `i`.
    pub fn from_samples(samples: &[PosteriorSample]) -> Self {
        let mut topics = Vec::new();
        let mut sample_index = Vec::new();
        for (i, s) in samples.iter().enumerate() {
            for row in &s.phi {
                topics.push(row.clone());
                sample_index.push(i);
            }
        }
        Self {
            topics,
            sample_index,
        }
    }

    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }

    /// Topics grouped by sample, in sample-index order.
    pub fn by_sample(&self) -> Vec<(usize, Vec<Vec<f64>>)> {
        let ids: BTreeSet<usize> = self.sample_index.iter().copied().collect();
        ids.into_iter()
            .map(|s| {
                let rows = self
                    .topics
                    .iter()
                    .zip(&self.sample_index)
                    .filter(|(_, &i)| i == s)
                    .map(|(t, _)| t.clone())
                    .collect();
                (s, rows)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteredTopic {
    pub mean: Vec<f64>,
    pub size: usize,
    /// Indices into the bag, ascending.
    pub members: Vec<usize>,
    /// Contributing sample indices, ascending.
    pub samples: Vec<usize>,
}

struct Cluster {
    sum: Vec<f64>,
    mean: Vec<f64>,
    members: Vec<usize>,
    samples: BTreeSet<usize>,
}

impl Cluster {
    fn refresh_mean(&mut self) {
        let total: f64 = self.sum.iter().sum();
        self.mean = self.sum.iter().map(|x| x / total).collect();
    }
}

#[derive(PartialEq)]
struct Candidate {
    dist: f64,
    a: usize,
    b: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    // min-heap on (distance, a, b)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then(other.a.cmp(&self.a))
            .then(other.b.cmp(&self.b))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Agglomerates the bag until the closest mergeable pair is farther apart
/// than `threshold` (cosine distance).
///
/// The closest pair overall is examined first; if the two clusters share a
/// posterior sample the pair is discarded for good, otherwise the clusters
/// merge into a new one whose distances to all live clusters are computed
/// afresh. Ties go to the pair with the lower cluster ids; original topics
/// hold ids `0..n` and merged clusters take fresh ids after that.
pub fn cluster(bag: &TopicBag, threshold: f64) -> Result<Vec<ClusteredTopic>> {
    if bag.is_empty() {
        return Err(Error::InvalidArgument("empty topic bag".into()));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let mut clusters: Vec<Option<Cluster>> = bag
        .topics
        .iter()
        .zip(&bag.sample_index)
        .enumerate()
        .map(|(i, (t, &s))| {
            let mut c = Cluster {
                sum: t.clone(),
                mean: Vec::new(),
                members: vec![i],
                samples: BTreeSet::from([s]),
            };
            c.refresh_mean();
            Some(c)
        })
        .collect();

    let n = clusters.len();
    let mut heap = BinaryHeap::with_capacity(n * n / 2);
    for a in 0..n {
        let ca = clusters[a].as_ref().expect("live");
        for b in (a + 1)..n {
            let cb = clusters[b].as_ref().expect("live");
            if ca.samples.is_disjoint(&cb.samples) {
                heap.push(Candidate {
                    dist: cosine_distance(&ca.mean, &cb.mean),
                    a,
                    b,
                });
            }
        }
    }

    while let Some(Candidate { dist, a, b }) = heap.pop() {
        if dist > threshold {
            break;
        }
        let (Some(ca), Some(cb)) = (&clusters[a], &clusters[b]) else {
            continue;
        };
        if !ca.samples.is_disjoint(&cb.samples) {
            continue;
        }
        let ca = clusters[a].take().expect("live");
        let cb = clusters[b].take().expect("live");
        let mut merged = Cluster {
            sum: ca.sum.iter().zip(&cb.sum).map(|(x, y)| x + y).collect(),
            mean: Vec::new(),
            members: ca.members.into_iter().chain(cb.members).collect(),
            samples: ca.samples.union(&cb.samples).copied().collect(),
        };
        merged.members.sort_unstable();
        merged.refresh_mean();
        let id = clusters.len();
        for (other, c) in clusters.iter().enumerate() {
            if let Some(c) = c {
                if c.samples.is_disjoint(&merged.samples) {
                    heap.push(Candidate {
                        dist: cosine_distance(&c.mean, &merged.mean),
                        a: other,
                        b: id,
                    });
                }
            }
        }
        clusters.push(Some(merged));
    }

    Ok(clusters
        .into_iter()
        .flatten()
        .map(|c| ClusteredTopic {
            size: c.members.len(),
            mean: c.mean,
            members: c.members,
            samples: c.samples.into_iter().collect(),
        })
        .collect())
}

/// Clusters of at least `min_size` members, means renormalized.
pub fn select(clusters: &[ClusteredTopic], min_size: usize) -> Result<Vec<ClusteredTopic>> {
    if min_size == 0 {
        return Err(Error::InvalidArgument("min_size must be at least 1".into()));
    }
    let kept: Vec<ClusteredTopic> = clusters
        .iter()
        .filter(|c| c.size >= min_size)
        .map(|c| {
            let total: f64 = c.mean.iter().sum();
            ClusteredTopic {
                mean: c.mean.iter().map(|x| x / total).collect(),
                ..c.clone()
            }
        })
        .collect();
    if kept.is_empty() {
        log::warn!("no cluster has at least {min_size} members");
    }
    Ok(kept)
}

/// One cell of the (threshold, minimum size) grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub threshold: f64,
    pub min_size: usize,
    pub n_clusters: usize,
    /// `None` when no cluster survives the size filter.
    pub perplexity: Option<f64>,
    pub npmi: Option<f64>,
    pub distinctiveness: Option<f64>,
    pub credibility: Option<f64>,
}

/// Inputs shared by every grid cell.
pub struct GridContext<'a> {
    /// Training split feeds coherence and the refit; test split, perplexity.
    pub corpus: &'a Corpus,
    pub refit: &'a RefitConfig,
    pub top_n: usize,
}

/// Quality of a set of clustered topics.
///
/// Distinctiveness of a clustered topic is measured against the other
/// clustered topics of the same subset; credibility against every posterior
/// sample in the bag.
pub fn evaluate_subset(
    subset: &[ClusteredTopic],
    bag: &TopicBag,
    ctx: &GridContext<'_>,
    counts: &CoOccurrence,
) -> Result<GridRow> {
    let mut row = GridRow {
        threshold: f64::NAN,
        min_size: 0,
        n_clusters: subset.len(),
        perplexity: None,
        npmi: None,
        distinctiveness: None,
        credibility: None,
    };
    if subset.is_empty() {
        return Ok(row);
    }
    let topics: Vec<Vec<f64>> = subset.iter().map(|c| c.mean.clone()).collect();
    let refit = refit_fixed_topics(ctx.corpus, &topics, ctx.refit)?;
    row.perplexity = Some(eval::perplexity(ctx.corpus, &topics, &refit.theta_mean())?);

    let mut coherence = 0.0;
    for t in &topics {
        coherence += eval::npmi(t, counts, ctx.top_n.min(t.len()))?;
    }
    row.npmi = Some(coherence / topics.len() as f64);

    let distinct: Vec<f64> = (0..topics.len())
        .filter_map(|i| {
            let peers: Vec<&[f64]> = topics
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, t)| t.as_slice())
                .collect();
            eval::distinctiveness(&topics[i], &peers)
        })
        .collect();
    if !distinct.is_empty() {
        row.distinctiveness = Some(distinct.iter().sum::<f64>() / distinct.len() as f64);
    }

    let samples: Vec<Vec<Vec<f64>>> = bag.by_sample().into_iter().map(|(_, t)| t).collect();
    let mut cred = 0.0;
    for t in &topics {
        cred += eval::credibility(t, &samples)?;
    }
    row.credibility = Some(cred / topics.len() as f64);
    Ok(row)
}

/// Evaluates every (threshold, min size) combination. Clustering runs once
/// per threshold; cells are evaluated in parallel and returned in grid order.
pub fn grid_evaluate(
    bag: &TopicBag,
    thresholds: &[f64],
    min_sizes: &[usize],
    ctx: &GridContext<'_>,
) -> Result<Vec<GridRow>> {
    let counts = CoOccurrence::from_corpus(ctx.corpus);
    let clustered: Vec<Vec<ClusteredTopic>> = thresholds
        .par_iter()
        .map(|&t| cluster(bag, t))
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, usize)> = (0..thresholds.len())
        .flat_map(|i| (0..min_sizes.len()).map(move |j| (i, j)))
        .collect();
    cells
        .par_iter()
        .map(|&(i, j)| {
            let subset = select(&clustered[i], min_sizes[j])?;
            let mut row = evaluate_subset(&subset, bag, ctx, &counts)?;
            row.threshold = thresholds[i];
            row.min_size = min_sizes[j];
            Ok(row)
        })
        .collect()
}
