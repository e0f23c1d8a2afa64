//! End-to-end run: sweep every year, rank, aggregate and report.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::bundle::{Manifest, BUNDLE_FORMAT};
use crate::centrality::{
    score_year, Aggregation, AllTimeAccumulator, AllTimeRanking, CentralityError, PageRankParams,
    RankEntry,
};
use crate::corpus::{write_corpus, Corpus};
use crate::person::{edition_culture, Horizon, Person, PersonId, Year};
use crate::reports::{
    category_distribution, ingroup_report, CategoryReport, IngroupReport, ReportError,
};
use crate::temporal::{TemporalError, TemporalGraph, YearSlice};

/// Years per work unit when sweeping in parallel. Fixed so output does not
/// depend on the worker count.
const CHUNK_YEARS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Years to sweep; must lie within the corpus horizon.
    pub range: Option<Horizon>,
    pub pagerank: PageRankParams,
    /// Entries kept per year.
    pub k: usize,
    pub aggregation: Aggregation,
    pub workers: usize,
    /// Ingroup culture tag; defaults to the edition's.
    pub culture: Option<String>,
    /// Top-n sizes for the stored category and ingroup reports.
    pub report_sizes: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            range: None,
            pagerank: PageRankParams::default(),
            k: 50,
            aggregation: Aggregation::Sum,
            workers: 1,
            culture: None,
            report_sizes: vec![10, 50],
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Temporal(#[from] TemporalError),
    #[error(transparent)]
    Centrality(#[from] CentralityError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

impl RunConfig {
    pub fn validate(&self, corpus: &Corpus) -> Result<Horizon, PipelineError> {
        self.pagerank
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.k == 0 {
            return Err(PipelineError::Config("k must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(PipelineError::Config("workers must be at least 1".into()));
        }
        let range = self.range.unwrap_or(corpus.horizon);
        if !corpus.horizon.contains_horizon(&range) {
            return Err(PipelineError::Config(format!(
                "year range {range} is outside the corpus horizon {}",
                corpus.horizon
            )));
        }
        Ok(range)
    }
}

/// The stored network of one year: top-k entries and the links among them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearRecord {
    pub year: Year,
    pub entries: Vec<RankEntry>,
    pub edges: Vec<(PersonId, PersonId)>,
}

impl YearRecord {
    /// Keeps the first `top` entries and the edges among them.
    pub fn truncated(&self, top: usize) -> YearRecord {
        let entries: Vec<RankEntry> = self.entries.iter().take(top).copied().collect();
        let keep: HashSet<PersonId> = entries.iter().map(|e| e.id).collect();
        let edges = self
            .edges
            .iter()
            .copied()
            .filter(|(s, d)| keep.contains(s) && keep.contains(d))
            .collect();
        YearRecord {
            year: self.year,
            entries,
            edges,
        }
    }
}

/// A year in which a person made the top-k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub year: Year,
    /// 1-based position in that year's ranking.
    pub rank: u32,
    pub pagerank: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Reports {
    pub categories: Vec<CategoryReport>,
    pub ingroup: Vec<IngroupReport>,
}

/// Everything a bundle stores.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutputs {
    pub manifest: Manifest,
    pub people: Vec<Person>,
    pub years: Vec<YearRecord>,
    pub alltime: AllTimeRanking,
    pub reports: Reports,
    pub series: BTreeMap<PersonId, Vec<SeriesPoint>>,
}

#[derive(Default)]
struct Chunk {
    records: Vec<YearRecord>,
    totals: AllTimeAccumulator,
    unconverged: Vec<Year>,
}

fn visit(
    chunk: &mut Chunk,
    slice: &YearSlice,
    params: &PageRankParams,
    k: usize,
) -> Result<(), PipelineError> {
    if slice.year % 100 == 0 {
        log::info!(
            "year {}: {} persons, {} links",
            slice.year,
            slice.nodes.len(),
            slice.edges.len()
        );
    }
    if slice.is_empty() {
        chunk.totals.add_empty_year(slice.year);
        chunk.records.push(YearRecord {
            year: slice.year,
            entries: Vec::new(),
            edges: Vec::new(),
        });
        return Ok(());
    }
    let scores = score_year(slice, params)?;
    chunk.totals.add_year(&scores);
    if !scores.converged {
        chunk.unconverged.push(slice.year);
    }
    let top = scores.top(k);
    let keep: HashSet<PersonId> = top.entries.iter().map(|e| e.id).collect();
    let edges = slice
        .edges
        .iter()
        .copied()
        .filter(|(s, d)| keep.contains(s) && keep.contains(d))
        .collect();
    chunk.records.push(YearRecord {
        year: slice.year,
        entries: top.entries,
        edges,
    });
    Ok(())
}

/// Runs the full pipeline over `corpus`.
pub fn run(corpus: &Corpus, config: &RunConfig) -> Result<RunOutputs, PipelineError> {
    let range = config.validate(corpus)?;
    let culture = config
        .culture
        .clone()
        .unwrap_or_else(|| edition_culture(&corpus.edition));

    let graph = TemporalGraph::build(corpus);
    log::info!(
        "{} persons, {} links, {} interval edges ({} never contemporaneous)",
        corpus.persons.len(),
        corpus.links.len(),
        graph.edges().len(),
        graph.dropped_links()
    );

    let params = config.pagerank;
    let k = config.k;
    let chunks = graph.sweep_chunked(
        range,
        config.workers,
        CHUNK_YEARS,
        Chunk::default,
        |c, s| visit(c, s, &params, k),
    )?;

    let mut years = Vec::with_capacity(range.len());
    let mut totals = AllTimeAccumulator::new();
    let mut unconverged = Vec::new();
    for (_, chunk) in chunks {
        years.extend(chunk.records);
        totals.merge(chunk.totals);
        unconverged.extend(chunk.unconverged);
    }
    let alltime = totals.finish(corpus.edition.clone(), config.aggregation)?;

    let mut series: BTreeMap<PersonId, Vec<SeriesPoint>> = BTreeMap::new();
    for record in &years {
        for (rank, e) in record.entries.iter().enumerate() {
            series.entry(e.id).or_default().push(SeriesPoint {
                year: record.year,
                rank: rank as u32 + 1,
                pagerank: e.pagerank,
            });
        }
    }

    let mut reports = Reports::default();
    for &n in &config.report_sizes {
        let categories = category_distribution(&alltime, &corpus.persons, &culture, n)?;
        reports.ingroup.push(ingroup_report(&categories));
        reports.categories.push(categories);
    }

    let mut manifest = Manifest {
        format: BUNDLE_FORMAT.to_owned(),
        edition: corpus.edition.clone(),
        culture,
        horizon: range,
        corpus_horizon: corpus.horizon,
        pagerank: params,
        k,
        aggregation: config.aggregation,
        report_sizes: config.report_sizes.clone(),
        persons: corpus.persons.len(),
        links: corpus.links.len(),
        interval_edges: graph.edges().len(),
        dropped_links: graph.dropped_links(),
        corpus_stats: corpus.stats.clone(),
        nonempty_year_count: graph.nonempty_year_count(),
        unconverged_years: unconverged,
        corpus_digest: corpus_digest(corpus),
        params_hash: String::new(),
    };
    manifest.params_hash = manifest.compute_hash();

    Ok(RunOutputs {
        manifest,
        people: corpus.persons.clone(),
        years,
        alltime,
        reports,
        series,
    })
}

fn corpus_digest(corpus: &Corpus) -> String {
    use sha2::{Digest, Sha256};
    let mut bytes = Vec::new();
    write_corpus(corpus, &mut bytes).expect("writing to memory cannot fail");
    hex::encode(Sha256::digest(&bytes))
}
