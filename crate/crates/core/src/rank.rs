//! PageRank by power iteration over a [`LinkGraph`].
//!
//! Each step computes, for every node `v`,
//!
//! ```text
//! s'[v] = (1 - d) / n + d * (D / n + sum_{u -> v} s[u] / outdeg(u))
//! ```
//!
//! where `D` is the total score held by dangling nodes (no out-links), which
//! is spread uniformly over all nodes. Iteration stops once the L1 distance
//! between consecutive vectors drops below `epsilon`.
//!
//! Every node's update is a pull over its in-neighbours in id order, so the
//! result is bitwise identical whatever the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::LinkGraph;

/// Parallelize steps only for graphs at least this large.
const PARALLEL_THRESHOLD: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankConfig {
    pub damping: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub k: usize,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig { damping: 0.85, epsilon: 1e-9, max_iterations: 1000, k: 25_000 }
    }
}

impl RankConfig {
    pub fn validate(&self) -> Result<(), RankError> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(RankError::InvalidConfig(format!("damping {} not in (0, 1)", self.damping)));
        }
        if !(self.epsilon > 0.0) {
            return Err(RankError::InvalidConfig(format!("epsilon {} must be positive", self.epsilon)));
        }
        if self.k == 0 {
            return Err(RankError::InvalidConfig("k must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(RankError::InvalidConfig("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RankError {
    #[error("cannot rank an empty graph")]
    EmptyGraph,
    #[error("invalid rank configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    pub scores: Vec<f64>,
    pub iterations_run: usize,
    pub final_residual: f64,
    /// False when `max_iterations` was reached before the residual fell
    /// under `epsilon`.
    pub converged: bool,
}

pub fn pagerank(graph: &LinkGraph, config: &RankConfig) -> Result<ScoreVector, RankError> {
    pagerank_observed(graph, config, |_, _| {})
}

/// Like [`pagerank`], calling `observe(iteration, scores)` after each step.
pub fn pagerank_observed(
    graph: &LinkGraph,
    config: &RankConfig,
    mut observe: impl FnMut(usize, &[f64]),
) -> Result<ScoreVector, RankError> {
    config.validate()?;
    let n = graph.node_count();
    if n == 0 {
        return Err(RankError::EmptyGraph);
    }

    let mut in_edges: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (src, dst) in graph.edges() {
        in_edges[dst as usize].push(src);
    }
    let out_degree: Vec<usize> = (0..n as u32).map(|v| graph.out_edges(v).len()).collect();
    let inv_out: Vec<f64> = out_degree.iter().map(|&d| if d == 0 { 0.0 } else { 1.0 / d as f64 }).collect();
    let dangling: Vec<u32> = (0..n as u32).filter(|&v| out_degree[v as usize] == 0).collect();

    let d = config.damping;
    let nf = n as f64;
    let mut scores = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;

    while iterations < config.max_iterations {
        let dangling_mass: f64 = dangling.iter().map(|&v| scores[v as usize]).sum();
        let base = (1.0 - d) / nf + d * dangling_mass / nf;
        let update = |v: usize| -> f64 {
            let pulled: f64 = in_edges[v].iter().map(|&u| scores[u as usize] * inv_out[u as usize]).sum();
            base + d * pulled
        };
        if n >= PARALLEL_THRESHOLD {
            next.par_iter_mut().enumerate().for_each(|(v, s)| *s = update(v));
        } else {
            next.iter_mut().enumerate().for_each(|(v, s)| *s = update(v));
        }
        residual = scores.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut scores, &mut next);
        iterations += 1;
        observe(iterations, &scores);
        if residual < config.epsilon {
            break;
        }
    }

    Ok(ScoreVector {
        scores,
        iterations_run: iterations,
        final_residual: residual,
        converged: residual < config.epsilon,
    })
}

/// Titles by descending score, ties broken by ascending title. Returns
/// `min(k, n)` entries.
pub fn top_k<'g>(scores: &ScoreVector, graph: &'g LinkGraph, k: usize) -> Vec<(&'g str, f64)> {
    let mut order: Vec<u32> = (0..graph.node_count() as u32).collect();
    order.sort_by(|&a, &b| {
        scores.scores[b as usize]
            .total_cmp(&scores.scores[a as usize])
            .then_with(|| graph.title(a).cmp(graph.title(b)))
    });
    order.truncate(k);
    order.into_iter().map(|v| (graph.title(v), scores.scores[v as usize])).collect()
}

/// Render ranked titles as `title<TAB>score` lines.
pub fn write_scores_tsv<W: std::io::Write>(ranked: &[(&str, f64)], mut out: W) -> std::io::Result<()> {
    for (title, score) in ranked {
        writeln!(out, "{title}\t{score}")?;
    }
    out.flush()
}

/// Read the titles of a `title<TAB>score` file in file order.
pub fn read_ranked_titles<R: std::io::BufRead>(input: R) -> std::io::Result<Vec<String>> {
    let mut titles = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let title = line.split('\t').next().unwrap_or_default();
        titles.push(title.to_string());
    }
    Ok(titles)
}
