use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ranking::YearScores;
use super::CentralityError;
use crate::person::{PersonId, Year};

/// How per-year PageRank folds into one all-time score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Sum,
    Mean,
    Max,
}

impl Aggregation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Aggregation::Sum => "sum",
            Aggregation::Mean => "mean",
            Aggregation::Max => "max",
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sum" => Ok(Aggregation::Sum),
            "mean" => Ok(Aggregation::Mean),
            "max" => Ok(Aggregation::Max),
            _ => Err(format!(
                "unknown aggregation {s:?} (expected sum, mean or max)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllTimeEntry {
    pub id: PersonId,
    pub score: f64,
    /// Sum over years of the within-year indegree.
    pub indegree: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllTimeRanking {
    pub edition: String,
    pub method: Aggregation,
    /// Score descending, then indegree descending, then id.
    pub entries: Vec<AllTimeEntry>,
}

impl AllTimeRanking {
    pub fn top(&self, n: usize) -> &[AllTimeEntry] {
        &self.entries[..n.min(self.entries.len())]
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    sum: f64,
    max: f64,
    years: u32,
    indegree: u64,
}

/// Running per-person totals over any set of years.
///
/// Accumulators over disjoint year sets merge into the accumulator of their
/// union. Merging in a fixed order keeps floating-point sums reproducible.
#[derive(Debug, Clone, Default)]
pub struct AllTimeAccumulator {
    tallies: BTreeMap<PersonId, Tally>,
    years: BTreeSet<Year>,
    duplicate: Option<Year>,
}

impl AllTimeAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a year that had an empty slice: it counts toward contiguity but
    /// scores nobody.
    pub fn add_empty_year(&mut self, year: Year) {
        if !self.years.insert(year) {
            self.duplicate.get_or_insert(year);
        }
    }

    pub fn add_year(&mut self, scores: &YearScores) {
        self.add_empty_year(scores.year);
        for e in &scores.entries {
            let t = self.tallies.entry(e.id).or_default();
            t.sum += e.pagerank;
            t.max = t.max.max(e.pagerank);
            t.years += 1;
            t.indegree += u64::from(e.indegree);
        }
    }

    pub fn merge(&mut self, other: AllTimeAccumulator) {
        for year in other.years {
            self.add_empty_year(year);
        }
        if let Some(y) = other.duplicate {
            self.duplicate.get_or_insert(y);
        }
        for (id, o) in other.tallies {
            let t = self.tallies.entry(id).or_default();
            t.sum += o.sum;
            t.max = t.max.max(o.max);
            t.years += o.years;
            t.indegree += o.indegree;
        }
    }

    pub fn finish(
        self,
        edition: impl Into<String>,
        method: Aggregation,
    ) -> Result<AllTimeRanking, CentralityError> {
        if let Some(year) = self.duplicate {
            return Err(CentralityError::DuplicateYear(year));
        }
        if let (Some(&first), Some(&last)) = (self.years.first(), self.years.last()) {
            let span = (i64::from(last) - i64::from(first) + 1) as usize;
            if span != self.years.len() {
                return Err(CentralityError::NonContiguous {
                    first,
                    last,
                    count: self.years.len(),
                });
            }
        }
        let mut entries: Vec<AllTimeEntry> = self
            .tallies
            .into_iter()
            .map(|(id, t)| AllTimeEntry {
                id,
                score: match method {
                    Aggregation::Sum => t.sum,
                    Aggregation::Mean => t.sum / f64::from(t.years),
                    Aggregation::Max => t.max,
                },
                indegree: t.indegree,
            })
            .collect();
        entries.sort_unstable_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then(b.indegree.cmp(&a.indegree))
                .then(a.id.cmp(&b.id))
        });
        Ok(AllTimeRanking {
            edition: edition.into(),
            method,
            entries,
        })
    }
}

/// Aggregates a stream of per-year scores, which must cover contiguous years.
pub fn aggregate_alltime<'a>(
    years: impl IntoIterator<Item = &'a YearScores>,
    edition: impl Into<String>,
    method: Aggregation,
) -> Result<AllTimeRanking, CentralityError> {
    let mut acc = AllTimeAccumulator::new();
    for y in years {
        acc.add_year(y);
    }
    acc.finish(edition, method)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centrality::RankEntry;

    fn year(year: Year, entries: &[(PersonId, f64, u32)]) -> YearScores {
        YearScores {
            year,
            entries: entries
                .iter()
                .map(|&(id, pagerank, indegree)| RankEntry {
                    id,
                    pagerank,
                    indegree,
                })
                .collect(),
            iterations: 1,
            converged: true,
        }
    }

    #[test]
    fn empty_input_gives_empty_ranking() {
        let r = aggregate_alltime([], "en", Aggregation::Sum).unwrap();
        assert!(r.entries.is_empty());
    }

    #[test]
    fn single_year_keeps_year_order() {
        let y = year(7, &[(0, 0.2, 0), (1, 0.5, 2), (2, 0.3, 1)]);
        let r = aggregate_alltime([&y], "en", Aggregation::Sum).unwrap();
        let order: Vec<_> = r.entries.iter().map(|e| e.id).collect();
        let year_order: Vec<_> = y.top(10).entries.iter().map(|e| e.id).collect();
        assert_eq!(order, year_order);
    }

    #[test]
    fn methods() {
        let a = year(0, &[(4, 0.3, 1), (5, 0.7, 0)]);
        let b = year(1, &[(4, 0.2, 2)]);
        let sum = aggregate_alltime([&a, &b], "en", Aggregation::Sum).unwrap();
        let p4 = sum.entries.iter().find(|e| e.id == 4).unwrap();
        assert!((p4.score - 0.5).abs() < 1e-15);
        assert_eq!(p4.indegree, 3);
        let mean = aggregate_alltime([&a, &b], "en", Aggregation::Mean).unwrap();
        assert!((mean.entries.iter().find(|e| e.id == 4).unwrap().score - 0.25).abs() < 1e-15);
        let max = aggregate_alltime([&a, &b], "en", Aggregation::Max).unwrap();
        assert_eq!(max.entries[0].id, 5);
        assert_eq!(max.entries[1].score, 0.3);
    }

    #[test]
    fn gaps_and_repeats_rejected() {
        let a = year(0, &[(0, 1.0, 0)]);
        let c = year(2, &[(0, 1.0, 0)]);
        assert!(matches!(
            aggregate_alltime([&a, &c], "en", Aggregation::Sum),
            Err(CentralityError::NonContiguous { .. })
        ));
        assert!(matches!(
            aggregate_alltime([&a, &a], "en", Aggregation::Sum),
            Err(CentralityError::DuplicateYear(0))
        ));
    }

    #[test]
    fn empty_years_bridge_gaps() {
        let a = year(0, &[(0, 1.0, 0)]);
        let c = year(2, &[(0, 1.0, 0)]);
        let mut acc = AllTimeAccumulator::new();
        acc.add_year(&a);
        acc.add_empty_year(1);
        acc.add_year(&c);
        assert_eq!(
            acc.finish("en", Aggregation::Sum).unwrap().entries[0].score,
            2.0
        );
    }
}
