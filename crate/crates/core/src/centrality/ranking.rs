use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::pagerank::{iterate, InAdjacency, PageRankParams};
use super::CentralityError;
use crate::person::{PersonId, Year};
use crate::temporal::YearSlice;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub id: PersonId,
    pub pagerank: f64,
    /// Distinct in-neighbors within the slice.
    pub indegree: u32,
}

/// Leaderboard order: PageRank descending, then indegree descending, then id.
pub fn rank_order(a: &RankEntry, b: &RankEntry) -> Ordering {
    b.pagerank
        .total_cmp(&a.pagerank)
        .then(b.indegree.cmp(&a.indegree))
        .then(a.id.cmp(&b.id))
}

/// Indegree of every node, aligned with `slice.nodes`.
pub fn indegree(slice: &YearSlice) -> Vec<u32> {
    let mut counts = vec![0u32; slice.nodes.len()];
    for &(_, dst) in &slice.edges {
        if let Some(i) = slice.local_index(dst) {
            counts[i] += 1;
        }
    }
    counts
}

/// Every node's score for one year, in id order.
#[derive(Debug, Clone, PartialEq)]
pub struct YearScores {
    pub year: Year,
    pub entries: Vec<RankEntry>,
    pub iterations: u32,
    pub converged: bool,
}

impl YearScores {
    /// The top `k` entries in leaderboard order.
    pub fn top(&self, k: usize) -> YearRanking {
        let mut entries = self.entries.clone();
        entries.sort_unstable_by(rank_order);
        entries.truncate(k);
        YearRanking {
            year: self.year,
            k,
            entries,
            converged: self.converged,
        }
    }
}

pub fn score_year(
    slice: &YearSlice,
    params: &PageRankParams,
) -> Result<YearScores, CentralityError> {
    params.validate()?;
    if slice.nodes.is_empty() {
        return Err(CentralityError::EmptySlice { year: slice.year });
    }
    let adj = InAdjacency::new(slice)?;
    let pr = iterate(&adj, slice.nodes.len(), params);
    if !pr.converged {
        log::warn!(
            "year {}: PageRank did not converge within {} iterations",
            slice.year,
            params.max_iter
        );
    }
    let entries = slice
        .nodes
        .iter()
        .enumerate()
        .map(|(v, &id)| RankEntry {
            id,
            pagerank: pr.scores[v],
            indegree: (adj.offsets[v + 1] - adj.offsets[v]) as u32,
        })
        .collect();
    Ok(YearScores {
        year: slice.year,
        entries,
        iterations: pr.iterations,
        converged: pr.converged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct YearRanking {
    pub year: Year,
    pub k: usize,
    pub entries: Vec<RankEntry>,
    pub converged: bool,
}

pub fn rank_year(
    slice: &YearSlice,
    k: usize,
    params: &PageRankParams,
) -> Result<YearRanking, CentralityError> {
    if k == 0 {
        return Err(CentralityError::InvalidParams(
            "k must be at least 1".into(),
        ));
    }
    Ok(score_year(slice, params)?.top(k))
}
