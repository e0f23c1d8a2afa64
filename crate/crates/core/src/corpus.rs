//! The validated people-link corpus and its JSONL file format.
//!
//! Line 1 is a header object; every following line is one person with its
//! outgoing links. Persons appear in id order and ids are dense.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::person::{Horizon, Occupation, Person, PersonId};

pub const CORPUS_FORMAT: &str = "chronograph-corpus-v1";

/// Counts gathered while building a corpus from a dump.
#[derive(Debug, Default, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusStats {
    pub pages_seen: u64,
    pub oversized_pages: u64,
    pub redirects: u64,
    pub undated: u64,
    pub inconsistent_dates: u64,
    pub out_of_horizon: u64,
    pub date_conflicts: u64,
    pub dangling_links: u64,
    pub self_links: u64,
    pub duplicate_links: u64,
    pub unknown_occupations: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub edition: String,
    pub horizon: Horizon,
    pub persons: Vec<Person>,
    /// Directed `(src, dst)` pairs, sorted and unique.
    pub links: Vec<(PersonId, PersonId)>,
    pub stats: CorpusStats,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("line {line}: person {title:?}: {message}")]
    Invariant {
        line: usize,
        title: String,
        message: String,
    },
    #[error("empty corpus")]
    Empty,
}

impl Corpus {
    /// Builds a corpus from parts, sorting links and checking every invariant.
    ///
    /// Persons must already carry dense ids equal to their position.
    pub fn from_parts(
        edition: impl Into<String>,
        horizon: Horizon,
        persons: Vec<Person>,
        mut links: Vec<(PersonId, PersonId)>,
    ) -> Result<Self, CorpusError> {
        links.sort_unstable();
        let corpus = Corpus {
            edition: edition.into(),
            horizon,
            persons,
            links,
            stats: CorpusStats::default(),
        };
        corpus.validate()?;
        Ok(corpus)
    }

    /// Checks the corpus invariants. Line numbers in errors are those the
    /// person would occupy in the JSONL file.
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.persons.is_empty() {
            return Err(CorpusError::Empty);
        }
        let mut titles = HashSet::with_capacity(self.persons.len());
        for (idx, p) in self.persons.iter().enumerate() {
            let line = idx + 2;
            let invariant = |message: String| CorpusError::Invariant {
                line,
                title: p.title.clone(),
                message,
            };
            if p.id as usize != idx {
                return Err(CorpusError::Schema {
                    line,
                    message: format!("expected id {idx}, found {}", p.id),
                });
            }
            if p.title.is_empty() {
                return Err(invariant("empty title".into()));
            }
            if !titles.insert(p.title.as_str()) {
                return Err(invariant("duplicate title".into()));
            }
            if p.birth > p.death {
                return Err(invariant(format!(
                    "birth {} is after death {}",
                    p.birth, p.death
                )));
            }
            if !self.horizon.contains(p.birth) || !self.horizon.contains(p.death) {
                return Err(invariant(format!(
                    "lifespan {}..{} outside horizon {}",
                    p.birth, p.death, self.horizon
                )));
            }
        }
        let n = self.persons.len();
        for (i, &(src, dst)) in self.links.iter().enumerate() {
            let line = (src as usize).min(n.saturating_sub(1)) + 2;
            let title = self
                .persons
                .get(src as usize)
                .map(|p| p.title.clone())
                .unwrap_or_default();
            let message = if src as usize >= n || dst as usize >= n {
                format!("link {src}->{dst} references an unknown id")
            } else if src == dst {
                "self-link".to_owned()
            } else if i > 0 && self.links[i - 1] >= (src, dst) {
                format!("link {src}->{dst} is duplicated or out of order")
            } else {
                continue;
            };
            return Err(CorpusError::Invariant {
                line,
                title,
                message,
            });
        }
        Ok(())
    }

    pub fn person(&self, id: PersonId) -> Option<&Person> {
        self.persons.get(id as usize)
    }

    /// Outgoing links of `src`, ascending by target.
    pub fn out_links(&self, src: PersonId) -> impl Iterator<Item = PersonId> + '_ {
        let lo = self.links.partition_point(|&(s, _)| s < src);
        let hi = self.links.partition_point(|&(s, _)| s <= src);
        self.links[lo..hi].iter().map(|&(_, d)| d)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    edition: String,
    horizon: Horizon,
    format: String,
    #[serde(default, skip_serializing_if = "is_default")]
    stats: CorpusStats,
}

fn is_default(stats: &CorpusStats) -> bool {
    *stats == CorpusStats::default()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PersonLine {
    id: PersonId,
    title: String,
    birth: i32,
    death: i32,
    links: Vec<PersonId>,
    occupation: Occupation,
    culture: String,
}

/// Reads a corpus from JSONL.
pub fn read_corpus<R: BufRead>(input: R) -> Result<Corpus, CorpusError> {
    let mut lines = input.lines().enumerate();
    let header: Header = loop {
        match lines.next() {
            None => return Err(CorpusError::Empty),
            Some((i, line)) => {
                let line = line.map_err(|e| schema(i + 1, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                break serde_json::from_str(&line).map_err(|e| schema(i + 1, e))?;
            }
        }
    };
    if header.format != CORPUS_FORMAT {
        return Err(CorpusError::Schema {
            line: 1,
            message: format!(
                "unsupported format {:?}, expected {CORPUS_FORMAT:?}",
                header.format
            ),
        });
    }

    let mut persons = Vec::new();
    let mut links = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line.map_err(|e| schema(line_no, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let p: PersonLine = serde_json::from_str(&line).map_err(|e| schema(line_no, e))?;
        if p.id as usize != persons.len() {
            return Err(CorpusError::Schema {
                line: line_no,
                message: format!("expected id {}, found {}", persons.len(), p.id),
            });
        }
        if p.birth > p.death {
            return Err(CorpusError::Invariant {
                line: line_no,
                title: p.title,
                message: format!("birth {} is after death {}", p.birth, p.death),
            });
        }
        links.extend(p.links.iter().map(|&dst| (p.id, dst)));
        persons.push(Person {
            id: p.id,
            title: p.title,
            birth: p.birth,
            death: p.death,
            occupation: p.occupation,
            culture: p.culture,
        });
    }
    links.sort_unstable();
    let corpus = Corpus {
        edition: header.edition,
        horizon: header.horizon,
        persons,
        links,
        stats: header.stats,
    };
    corpus.validate()?;
    Ok(corpus)
}

fn schema(line: usize, e: impl ToString) -> CorpusError {
    CorpusError::Schema {
        line,
        message: e.to_string(),
    }
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_corpus(BufReader::new(file))
}

/// Writes the canonical JSONL form: links ascending per person.
pub fn write_corpus<W: Write>(corpus: &Corpus, mut out: W) -> io::Result<()> {
    let header = Header {
        edition: corpus.edition.clone(),
        horizon: corpus.horizon,
        format: CORPUS_FORMAT.to_owned(),
        stats: corpus.stats.clone(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for p in &corpus.persons {
        let line = PersonLine {
            id: p.id,
            title: p.title.clone(),
            birth: p.birth,
            death: p.death,
            links: corpus.out_links(p.id).collect(),
            occupation: p.occupation,
            culture: p.culture.clone(),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn write_corpus_file(corpus: &Corpus, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let io_err = |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    write_corpus(corpus, BufWriter::new(file)).map_err(io_err)
}
