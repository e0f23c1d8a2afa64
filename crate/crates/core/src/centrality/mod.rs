//! Per-year PageRank rankings with an indegree tiebreak, and their
//! aggregation into all-time leaderboards.

mod alltime;
mod pagerank;
mod ranking;

pub use alltime::{
    aggregate_alltime, Aggregation, AllTimeAccumulator, AllTimeEntry, AllTimeRanking,
};
pub use pagerank::{pagerank, PageRank, PageRankParams};
pub use ranking::{
    indegree, rank_order, rank_year, score_year, RankEntry, YearRanking, YearScores,
};

use crate::person::Year;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CentralityError {
    #[error("year {year}: cannot rank an empty slice")]
    EmptySlice { year: Year },
    #[error("year {year}: {message}")]
    InvalidSlice { year: Year, message: String },
    #[error("invalid PageRank parameters: {0}")]
    InvalidParams(String),
    #[error("year {0} aggregated more than once")]
    DuplicateYear(Year),
    #[error("aggregated years are not contiguous: {count} years between {first} and {last}")]
    NonContiguous {
        first: Year,
        last: Year,
        count: usize,
    },
}
