//! Interval-indexed temporal graph and per-year network slices.
//!
//! A link between two persons exists in year `y` only when both are alive in
//! `y`, so each corpus link becomes an edge valid over the intersection of
//! the two lifespans. Boundary years are inclusive.

mod interval;

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

pub use interval::IntervalIndex;

use crate::corpus::Corpus;
use crate::person::{Horizon, PersonId, Year};

/// A corpus link restricted to the years both endpoints are alive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IntervalEdge {
    pub start: Year,
    pub end: Year,
    pub src: PersonId,
    pub dst: PersonId,
}

/// The network of one year: persons alive and the links among them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct YearSlice {
    pub year: Year,
    /// Ascending.
    pub nodes: Vec<PersonId>,
    /// Ascending `(src, dst)`.
    pub edges: Vec<(PersonId, PersonId)>,
}

impl YearSlice {
    /// Builds a slice, putting nodes and edges in canonical order.
    pub fn new(year: Year, mut nodes: Vec<PersonId>, mut edges: Vec<(PersonId, PersonId)>) -> Self {
        nodes.sort_unstable();
        nodes.dedup();
        edges.sort_unstable();
        edges.dedup();
        YearSlice { year, nodes, edges }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Position of `id` in `nodes`.
    pub fn local_index(&self, id: PersonId) -> Option<usize> {
        self.nodes.binary_search(&id).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemporalError {
    #[error("year {year} outside horizon {horizon}")]
    OutOfHorizon { year: Year, horizon: Horizon },
    #[error("year range {range} not within horizon {horizon}")]
    RangeOutsideHorizon { range: Horizon, horizon: Horizon },
}

#[derive(Debug, Clone)]
pub struct TemporalGraph {
    horizon: Horizon,
    lifespans: Vec<(Year, Year)>,
    /// Sorted by `(start, end, src, dst)`; doubles as the activation list.
    edges: Vec<IntervalEdge>,
    dropped_links: usize,
    /// Edge positions sorted by `(end, position)`: deactivation at `end + 1`.
    edge_deactivations: Vec<u32>,
    /// Persons sorted by `(birth, id)`.
    node_activations: Vec<PersonId>,
    /// Persons sorted by `(death, id)`: deactivation at `death + 1`.
    node_deactivations: Vec<PersonId>,
    node_index: IntervalIndex,
    edge_index: IntervalIndex,
}

impl TemporalGraph {
    /// Indexes every corpus link whose endpoints' lifespans overlap.
    pub fn build(corpus: &Corpus) -> Self {
        let horizon = corpus.horizon;
        let lifespans: Vec<(Year, Year)> = corpus
            .persons
            .iter()
            .map(|p| (p.birth.max(horizon.start()), p.death.min(horizon.end())))
            .collect();

        let mut dropped_links = 0;
        let mut edges: Vec<IntervalEdge> = corpus
            .links
            .iter()
            .filter_map(|&(src, dst)| {
                let (bs, ds) = lifespans[src as usize];
                let (bd, dd) = lifespans[dst as usize];
                let (start, end) = (bs.max(bd), ds.min(dd));
                if start > end || src == dst {
                    dropped_links += 1;
                    None
                } else {
                    Some(IntervalEdge {
                        start,
                        end,
                        src,
                        dst,
                    })
                }
            })
            .collect();
        edges.sort_unstable();

        let mut edge_deactivations: Vec<u32> = (0..edges.len() as u32).collect();
        edge_deactivations.sort_unstable_by_key(|&i| (edges[i as usize].end, i));
        let mut node_activations: Vec<PersonId> = (0..lifespans.len() as PersonId).collect();
        node_activations.sort_unstable_by_key(|&i| (lifespans[i as usize].0, i));
        let mut node_deactivations = node_activations.clone();
        node_deactivations.sort_unstable_by_key(|&i| (lifespans[i as usize].1, i));

        let node_index = IntervalIndex::new(lifespans.clone());
        let edge_index = IntervalIndex::new(edges.iter().map(|e| (e.start, e.end)).collect());

        TemporalGraph {
            horizon,
            lifespans,
            edges,
            dropped_links,
            edge_deactivations,
            node_activations,
            node_deactivations,
            node_index,
            edge_index,
        }
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn person_count(&self) -> usize {
        self.lifespans.len()
    }

    pub fn edges(&self) -> &[IntervalEdge] {
        &self.edges
    }

    /// Corpus links that never coexist in any year.
    pub fn dropped_links(&self) -> usize {
        self.dropped_links
    }

    fn check_year(&self, year: Year) -> Result<(), TemporalError> {
        if self.horizon.contains(year) {
            Ok(())
        } else {
            Err(TemporalError::OutOfHorizon {
                year,
                horizon: self.horizon,
            })
        }
    }

    fn check_range(&self, range: Horizon) -> Result<(), TemporalError> {
        if self.horizon.contains_horizon(&range) {
            Ok(())
        } else {
            Err(TemporalError::RangeOutsideHorizon {
                range,
                horizon: self.horizon,
            })
        }
    }

    /// The network of `year`, answered by stabbing queries.
    pub fn slice(&self, year: Year) -> Result<YearSlice, TemporalError> {
        self.check_year(year)?;
        let mut hits = Vec::new();
        self.node_index.stab(year, &mut hits);
        let nodes = hits.clone();
        hits.clear();
        self.edge_index.stab(year, &mut hits);
        let edges = hits
            .iter()
            .map(|&i| {
                let e = &self.edges[i as usize];
                (e.src, e.dst)
            })
            .collect();
        Ok(YearSlice::new(year, nodes, edges))
    }

    /// Visits every year of `range` in ascending order.
    ///
    /// The active sets are seeded with a stabbing query at the range start and
    /// then maintained from activation and deactivation events, so the slice
    /// the visitor sees equals [`TemporalGraph::slice`] for that year. The
    /// first visitor error stops the sweep.
    pub fn sweep<E, F>(&self, range: Horizon, mut visitor: F) -> Result<(), E>
    where
        E: From<TemporalError>,
        F: FnMut(&YearSlice) -> Result<(), E>,
    {
        self.check_range(range)?;
        let seed = self.slice(range.start())?;
        let mut nodes: BTreeSet<PersonId> = seed.nodes.into_iter().collect();
        let mut edges: BTreeSet<(PersonId, PersonId)> = seed.edges.into_iter().collect();
        let mut view = YearSlice::default();

        for year in range.years() {
            if year > range.start() {
                for &id in self.events(
                    &self.node_deactivations,
                    |i| self.lifespans[i as usize].1,
                    year - 1,
                ) {
                    nodes.remove(&id);
                }
                for &id in self.events(
                    &self.node_activations,
                    |i| self.lifespans[i as usize].0,
                    year,
                ) {
                    nodes.insert(id);
                }
                for &i in self.events(
                    &self.edge_deactivations,
                    |i| self.edges[i as usize].end,
                    year - 1,
                ) {
                    let e = &self.edges[i as usize];
                    edges.remove(&(e.src, e.dst));
                }
                let lo = self.edges.partition_point(|e| e.start < year);
                let hi = self.edges.partition_point(|e| e.start <= year);
                edges.extend(self.edges[lo..hi].iter().map(|e| (e.src, e.dst)));
            }
            view.year = year;
            view.nodes.clear();
            view.nodes.extend(nodes.iter().copied());
            view.edges.clear();
            view.edges.extend(edges.iter().copied());
            visitor(&view)?;
        }
        Ok(())
    }

    /// The run of `list` whose key equals `year`. `list` is sorted by key.
    fn events<'a>(&self, list: &'a [u32], key: impl Fn(u32) -> Year, year: Year) -> &'a [u32] {
        let lo = list.partition_point(|&i| key(i) < year);
        let hi = list.partition_point(|&i| key(i) <= year);
        &list[lo..hi]
    }

    /// Sweeps `range` split into contiguous chunks across `workers` threads.
    ///
    /// Each chunk seeds its own sweep and folds its years into a fresh state
    /// from `init`. States come back in ascending year order, one per chunk.
    pub fn sweep_chunked<S, E, I, F>(
        &self,
        range: Horizon,
        workers: usize,
        chunk_years: usize,
        init: I,
        visit: F,
    ) -> Result<Vec<(Horizon, S)>, E>
    where
        S: Send,
        E: From<TemporalError> + Send,
        I: Fn() -> S + Sync,
        F: Fn(&mut S, &YearSlice) -> Result<(), E> + Sync,
    {
        self.check_range(range)?;
        let chunk_years = chunk_years.max(1);
        let chunks: Vec<Horizon> = range
            .years()
            .step_by(chunk_years)
            .map(|start| {
                let end = (i64::from(start) + chunk_years as i64 - 1).min(i64::from(range.end()));
                Horizon::new(start, end as Year).expect("chunk within range")
            })
            .collect();

        let next = AtomicUsize::new(0);
        let failed = AtomicBool::new(false);
        let results: Mutex<Vec<Option<S>>> = Mutex::new((0..chunks.len()).map(|_| None).collect());
        let first_error: Mutex<Option<(usize, E)>> = Mutex::new(None);

        std::thread::scope(|scope| {
            for _ in 0..workers.max(1).min(chunks.len()) {
                scope.spawn(|| loop {
                    if failed.load(Ordering::Relaxed) {
                        break;
                    }
                    let c = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&chunk) = chunks.get(c) else {
                        break;
                    };
                    let mut state = init();
                    match self.sweep(chunk, |slice| visit(&mut state, slice)) {
                        Ok(()) => results.lock().unwrap()[c] = Some(state),
                        Err(e) => {
                            failed.store(true, Ordering::Relaxed);
                            let mut slot = first_error.lock().unwrap();
                            if slot.as_ref().is_none_or(|(prev, _)| c < *prev) {
                                *slot = Some((c, e));
                            }
                        }
                    }
                });
            }
        });

        if let Some((_, e)) = first_error.into_inner().unwrap() {
            return Err(e);
        }
        Ok(chunks
            .into_iter()
            .zip(results.into_inner().unwrap())
            .map(|(chunk, state)| (chunk, state.expect("every chunk completed")))
            .collect())
    }

    /// Number of horizon years in which at least one person is alive.
    pub fn nonempty_year_count(&self) -> usize {
        let mut covered = 0usize;
        let mut reach: Option<Year> = None;
        for &id in &self.node_activations {
            let (birth, death) = self.lifespans[id as usize];
            let from = match reach {
                Some(r) if r >= death => continue,
                Some(r) if r >= birth => r + 1,
                _ => birth,
            };
            covered += (i64::from(death) - i64::from(from) + 1) as usize;
            reach = Some(death);
        }
        covered
    }
}
