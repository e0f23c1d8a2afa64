//! Historical people networks from encyclopedia dumps.
//!
//! People pages are dated from their birth and death categories, linked into
//! a directed network, and sliced per year so that a link only counts while
//! both people are alive. Each year's slice is ranked by PageRank with
//! indegree as tiebreak; yearly scores fold into all-time leaderboards and
//! per-culture reports, and the whole run persists as a servable bundle.

pub mod bundle;
pub mod centrality;
pub mod corpus;
pub mod ingest;
pub mod person;
pub mod pipeline;
pub mod reports;
pub mod temporal;

pub use corpus::{Corpus, CorpusError, CorpusStats};
pub use person::{Horizon, Occupation, Person, PersonId, Year};
