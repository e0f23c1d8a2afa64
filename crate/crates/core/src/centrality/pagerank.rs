//! PageRank by power iteration over a single year slice.

use serde::{Deserialize, Serialize};

use super::CentralityError;
use crate::temporal::YearSlice;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankParams {
    pub damping: f64,
    /// Stop once the L1 change between iterations drops below this.
    pub epsilon: f64,
    pub max_iter: u32,
}

impl Default for PageRankParams {
    fn default() -> Self {
        PageRankParams {
            damping: 0.85,
            epsilon: 1e-9,
            max_iter: 100,
        }
    }
}

impl PageRankParams {
    pub fn validate(&self) -> Result<(), CentralityError> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(CentralityError::InvalidParams(format!(
                "damping must be in (0, 1), got {}",
                self.damping
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(CentralityError::InvalidParams(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.max_iter == 0 {
            return Err(CentralityError::InvalidParams(
                "max_iter must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Scores aligned with `YearSlice::nodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct PageRank {
    pub scores: Vec<f64>,
    pub iterations: u32,
    pub converged: bool,
}

/// Incoming adjacency of a slice in local (position) indices.
pub(crate) struct InAdjacency {
    /// `offsets[v]..offsets[v + 1]` indexes `sources` for node `v`.
    pub offsets: Vec<usize>,
    /// In-neighbors per node, ascending.
    pub sources: Vec<usize>,
    pub out_degree: Vec<u32>,
}

impl InAdjacency {
    pub fn new(slice: &YearSlice) -> Result<Self, CentralityError> {
        let n = slice.nodes.len();
        let mut local = Vec::with_capacity(slice.edges.len());
        for &(src, dst) in &slice.edges {
            match (slice.local_index(src), slice.local_index(dst)) {
                (Some(s), Some(d)) if s != d => local.push((s, d)),
                _ => {
                    return Err(CentralityError::InvalidSlice {
                        year: slice.year,
                        message: format!("edge {src}->{dst} is a self-loop or leaves the slice"),
                    })
                }
            }
        }
        let mut out_degree = vec![0u32; n];
        let mut offsets = vec![0usize; n + 1];
        for &(s, d) in &local {
            out_degree[s] += 1;
            offsets[d + 1] += 1;
        }
        for v in 0..n {
            offsets[v + 1] += offsets[v];
        }
        let mut fill = offsets.clone();
        let mut sources = vec![0usize; local.len()];
        // Edges are sorted by source, so each bucket fills in ascending order.
        for &(s, d) in &local {
            sources[fill[d]] = s;
            fill[d] += 1;
        }
        Ok(InAdjacency {
            offsets,
            sources,
            out_degree,
        })
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.sources[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// Runs power iteration from the uniform vector.
///
/// Mass on nodes without out-links is spread uniformly over all nodes. Every
/// sum runs in ascending id order so results are bit-reproducible.
pub fn pagerank(slice: &YearSlice, params: &PageRankParams) -> Result<PageRank, CentralityError> {
    params.validate()?;
    let n = slice.nodes.len();
    if n == 0 {
        return Err(CentralityError::EmptySlice { year: slice.year });
    }
    let adj = InAdjacency::new(slice)?;
    Ok(iterate(&adj, n, params))
}

pub(crate) fn iterate(adj: &InAdjacency, n: usize, params: &PageRankParams) -> PageRank {
    let d = params.damping;
    let nf = n as f64;
    let inv_out: Vec<f64> = adj
        .out_degree
        .iter()
        .map(|&o| if o == 0 { 0.0 } else { 1.0 / f64::from(o) })
        .collect();
    let dangling: Vec<usize> = (0..n).filter(|&v| adj.out_degree[v] == 0).collect();

    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut contrib = vec![0.0; n];
    for iteration in 1..=params.max_iter {
        let dangling_mass: f64 = dangling.iter().map(|&v| rank[v]).sum();
        let base = (1.0 - d) / nf + d * dangling_mass / nf;
        for v in 0..n {
            contrib[v] = rank[v] * inv_out[v];
        }
        let mut delta = 0.0;
        for v in 0..n {
            let incoming: f64 = adj.in_neighbors(v).iter().map(|&u| contrib[u]).sum();
            next[v] = base + d * incoming;
            delta += (next[v] - rank[v]).abs();
        }
        std::mem::swap(&mut rank, &mut next);
        if delta < params.epsilon {
            return PageRank {
                scores: rank,
                iterations: iteration,
                converged: true,
            };
        }
    }
    PageRank {
        scores: rank,
        iterations: params.max_iter,
        converged: false,
    }
}
