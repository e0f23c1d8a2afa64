//! On-disk bundle of a pipeline run.
//!
//! ```text
//! manifest.json          run parameters and integrity hash
//! alltime.csv            rank,id,title,score,indegree
//! people.jsonl           one person per line, id order
//! series.jsonl           per-person top-k appearances
//! reports/*.json         category and ingroup reports
//! years/{+0001}.json     one file per year, sign and four digits
//! ```
//!
//! Writing is deterministic: identical run outputs produce identical bytes.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::centrality::{Aggregation, AllTimeEntry, AllTimeRanking, PageRankParams};
use crate::corpus::CorpusStats;
use crate::person::{Horizon, Person, PersonId, Year};
use crate::pipeline::{Reports, RunOutputs, SeriesPoint, YearRecord};
use crate::reports::{CategoryReport, IngroupReport};

pub const BUNDLE_FORMAT: &str = "chronograph-bundle-v1";

#[derive(Debug, thiserror::Error)]
pub enum BundleError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("refusing to write into non-empty directory {}", .0.display())]
    NotEmpty(PathBuf),
    #[error("unsupported bundle format {0:?}")]
    UnsupportedFormat(String),
    #[error("corrupt bundle: {0}")]
    Corrupt(String),
    #[error("year {year} outside bundle horizon {horizon}")]
    OutOfRange { year: Year, horizon: Horizon },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format: String,
    pub edition: String,
    pub culture: String,
    /// Years covered by the bundle.
    pub horizon: Horizon,
    pub corpus_horizon: Horizon,
    pub pagerank: PageRankParams,
    pub k: usize,
    pub aggregation: Aggregation,
    pub report_sizes: Vec<usize>,
    pub persons: usize,
    pub links: usize,
    pub interval_edges: usize,
    pub dropped_links: usize,
    pub corpus_stats: CorpusStats,
    pub nonempty_year_count: usize,
    /// Years where PageRank stopped at `max_iter` before reaching epsilon.
    pub unconverged_years: Vec<Year>,
    pub corpus_digest: String,
    /// SHA-256 over every other field.
    pub params_hash: String,
}

impl Manifest {
    pub fn compute_hash(&self) -> String {
        let mut unhashed = self.clone();
        unhashed.params_hash = String::new();
        let bytes = serde_json::to_vec(&unhashed).expect("manifest serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Parses and validates a manifest: format tag first, then schema, then
    /// hash.
    pub fn from_json(bytes: &[u8]) -> Result<Manifest, BundleError> {
        let value: serde_json::Value = serde_json::from_slice(bytes)
            .map_err(|e| BundleError::Corrupt(format!("manifest.json: {e}")))?;
        match value.get("format").and_then(|f| f.as_str()) {
            Some(BUNDLE_FORMAT) => {}
            Some(other) => return Err(BundleError::UnsupportedFormat(other.to_owned())),
            None => return Err(BundleError::UnsupportedFormat(String::new())),
        }
        let manifest: Manifest = serde_json::from_value(value)
            .map_err(|e| BundleError::Corrupt(format!("manifest.json: {e}")))?;
        if manifest.compute_hash() != manifest.params_hash {
            return Err(BundleError::Corrupt("manifest hash mismatch".into()));
        }
        Ok(manifest)
    }
}

impl YearRecord {
    pub fn from_json(bytes: &[u8]) -> Result<YearRecord, BundleError> {
        serde_json::from_slice(bytes).map_err(|e| BundleError::Corrupt(e.to_string()))
    }
}

/// File name of a year: sign plus at least four digits.
pub fn year_file_name(year: Year) -> String {
    format!("{year:+05}.json")
}

#[derive(Serialize, Deserialize)]
struct SeriesLine {
    id: PersonId,
    series: Vec<SeriesPoint>,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> BundleError + '_ {
    move |source| BundleError::Io {
        path: path.to_owned(),
        source,
    }
}

fn write_file(
    path: &Path,
    write: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
) -> Result<(), BundleError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    write(&mut out)
        .and_then(|()| out.flush())
        .map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T, pretty: bool) -> Result<(), BundleError> {
    write_file(path, |out| {
        if pretty {
            serde_json::to_writer_pretty(&mut *out, value)?;
        } else {
            serde_json::to_writer(&mut *out, value)?;
        }
        out.write_all(b"\n")
    })
}

fn write_jsonl<T: Serialize>(
    path: &Path,
    rows: impl IntoIterator<Item = T>,
) -> Result<(), BundleError> {
    write_file(path, |out| {
        for row in rows {
            serde_json::to_writer(&mut *out, &row)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    })
}

/// Writes `outputs` into `dir`, which must be absent or empty.
pub fn write_bundle(outputs: &RunOutputs, dir: impl AsRef<Path>) -> Result<Manifest, BundleError> {
    let dir = dir.as_ref();
    if dir.exists() {
        let mut entries = fs::read_dir(dir).map_err(io_err(dir))?;
        if entries.next().is_some() {
            return Err(BundleError::NotEmpty(dir.to_owned()));
        }
    }
    let years_dir = dir.join("years");
    let reports_dir = dir.join("reports");
    fs::create_dir_all(&years_dir).map_err(io_err(&years_dir))?;
    fs::create_dir_all(&reports_dir).map_err(io_err(&reports_dir))?;

    let m = &outputs.manifest;
    let expected: Vec<Year> = m.horizon.years().collect();
    let got: Vec<Year> = outputs.years.iter().map(|r| r.year).collect();
    if expected != got {
        return Err(BundleError::Corrupt(format!(
            "year records do not cover {} contiguously",
            m.horizon
        )));
    }

    for record in &outputs.years {
        write_json(&years_dir.join(year_file_name(record.year)), record, false)?;
    }
    write_jsonl(&dir.join("people.jsonl"), &outputs.people)?;
    write_jsonl(
        &dir.join("series.jsonl"),
        outputs.series.iter().map(|(&id, series)| SeriesLine {
            id,
            series: series.clone(),
        }),
    )?;

    let csv_path = dir.join("alltime.csv");
    let mut csv = csv::Writer::from_path(&csv_path)
        .map_err(|e| BundleError::Corrupt(format!("{}: {e}", csv_path.display())))?;
    let csv_result = (|| {
        csv.write_record(["rank", "id", "title", "score", "indegree"])?;
        for (rank, e) in outputs.alltime.entries.iter().enumerate() {
            let title = outputs
                .people
                .get(e.id as usize)
                .map(|p| p.title.as_str())
                .unwrap_or_default();
            csv.write_record([
                (rank + 1).to_string(),
                e.id.to_string(),
                title.to_owned(),
                e.score.to_string(),
                e.indegree.to_string(),
            ])?;
        }
        csv.flush()?;
        Ok::<_, csv::Error>(())
    })();
    csv_result.map_err(|e| BundleError::Corrupt(format!("{}: {e}", csv_path.display())))?;

    for (categories, ingroup) in outputs
        .reports
        .categories
        .iter()
        .zip(&outputs.reports.ingroup)
    {
        let n = categories.requested_n;
        write_json(
            &reports_dir.join(format!("categories-top{n}.json")),
            categories,
            true,
        )?;
        write_json(
            &reports_dir.join(format!("ingroup-top{n}.json")),
            ingroup,
            true,
        )?;
    }

    write_json(&dir.join("manifest.json"), m, true)?;
    Ok(m.clone())
}

/// A bundle opened for reading. Only the manifest is read up front; other
/// files load on first use and year files on every request.
#[derive(Debug)]
pub struct Bundle {
    dir: PathBuf,
    manifest: Manifest,
    people: OnceLock<Vec<Person>>,
    alltime: OnceLock<AllTimeRanking>,
    series: OnceLock<BTreeMap<PersonId, Vec<SeriesPoint>>>,
}

pub fn read_bundle(dir: impl AsRef<Path>) -> Result<Bundle, BundleError> {
    let dir = dir.as_ref().to_owned();
    let path = dir.join("manifest.json");
    let bytes = fs::read(&path).map_err(io_err(&path))?;
    let manifest = Manifest::from_json(&bytes)?;
    Ok(Bundle {
        dir,
        manifest,
        people: OnceLock::new(),
        alltime: OnceLock::new(),
        series: OnceLock::new(),
    })
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, BundleError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let row = serde_json::from_str(&line)
            .map_err(|e| BundleError::Corrupt(format!("{} line {}: {e}", path.display(), i + 1)))?;
        rows.push(row);
    }
    Ok(rows)
}

fn get_or_load<T>(
    cell: &OnceLock<T>,
    load: impl FnOnce() -> Result<T, BundleError>,
) -> Result<&T, BundleError> {
    if let Some(v) = cell.get() {
        return Ok(v);
    }
    let v = load()?;
    Ok(cell.get_or_init(|| v))
}

impl Bundle {
    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn edition(&self) -> &str {
        &self.manifest.edition
    }

    /// Reads one year file.
    pub fn year(&self, year: Year) -> Result<YearRecord, BundleError> {
        let horizon = self.manifest.horizon;
        if !horizon.contains(year) {
            return Err(BundleError::OutOfRange { year, horizon });
        }
        let path = self.dir.join("years").join(year_file_name(year));
        let bytes = match fs::read(&path) {
            Ok(bytes) => bytes,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(BundleError::Corrupt(format!(
                    "missing file for year {year}"
                )))
            }
            Err(e) => return Err(io_err(&path)(e)),
        };
        let record = YearRecord::from_json(&bytes)
            .map_err(|e| BundleError::Corrupt(format!("year {year}: {e}")))?;
        if record.year != year {
            return Err(BundleError::Corrupt(format!(
                "file for year {year} holds year {}",
                record.year
            )));
        }
        Ok(record)
    }

    /// All persons, indexed by id.
    pub fn people(&self) -> Result<&[Person], BundleError> {
        get_or_load(&self.people, || {
            let people: Vec<Person> = read_jsonl(&self.dir.join("people.jsonl"))?;
            if people.iter().enumerate().any(|(i, p)| p.id as usize != i) {
                return Err(BundleError::Corrupt(
                    "people.jsonl ids are not dense".into(),
                ));
            }
            Ok(people)
        })
        .map(Vec::as_slice)
    }

    pub fn person(&self, id: PersonId) -> Result<Option<&Person>, BundleError> {
        Ok(self.people()?.get(id as usize))
    }

    pub fn alltime(&self) -> Result<&AllTimeRanking, BundleError> {
        get_or_load(&self.alltime, || {
            let path = self.dir.join("alltime.csv");
            let corrupt = |e: &dyn std::fmt::Display| {
                BundleError::Corrupt(format!("{}: {e}", path.display()))
            };
            let mut reader = csv::Reader::from_path(&path).map_err(|e| corrupt(&e))?;
            let mut entries = Vec::new();
            for (i, row) in reader.records().enumerate() {
                let row = row.map_err(|e| corrupt(&e))?;
                let field = |n: usize| {
                    row.get(n)
                        .ok_or_else(|| corrupt(&format!("row {} too short", i + 1)))
                };
                let rank: usize = field(0)?.parse().map_err(|e| corrupt(&e))?;
                if rank != i + 1 {
                    return Err(corrupt(&format!("row {} has rank {rank}", i + 1)));
                }
                entries.push(AllTimeEntry {
                    id: field(1)?.parse().map_err(|e| corrupt(&e))?,
                    score: field(3)?.parse().map_err(|e| corrupt(&e))?,
                    indegree: field(4)?.parse().map_err(|e| corrupt(&e))?,
                });
            }
            Ok(AllTimeRanking {
                edition: self.manifest.edition.clone(),
                method: self.manifest.aggregation,
                entries,
            })
        })
    }

    pub fn series(&self) -> Result<&BTreeMap<PersonId, Vec<SeriesPoint>>, BundleError> {
        get_or_load(&self.series, || {
            let lines: Vec<SeriesLine> = read_jsonl(&self.dir.join("series.jsonl"))?;
            Ok(lines.into_iter().map(|l| (l.id, l.series)).collect())
        })
    }

    pub fn reports(&self) -> Result<Reports, BundleError> {
        let mut reports = Reports::default();
        for &n in &self.manifest.report_sizes {
            let path = self
                .dir
                .join("reports")
                .join(format!("categories-top{n}.json"));
            let bytes = fs::read(&path).map_err(io_err(&path))?;
            let report: CategoryReport =
                serde_json::from_slice(&bytes).map_err(|e| BundleError::Corrupt(e.to_string()))?;
            let path = self
                .dir
                .join("reports")
                .join(format!("ingroup-top{n}.json"));
            let bytes = fs::read(&path).map_err(io_err(&path))?;
            let ingroup: IngroupReport =
                serde_json::from_slice(&bytes).map_err(|e| BundleError::Corrupt(e.to_string()))?;
            reports.categories.push(report);
            reports.ingroup.push(ingroup);
        }
        Ok(reports)
    }

    /// Loads every file back into memory.
    pub fn load_all(&self) -> Result<RunOutputs, BundleError> {
        let years = self
            .manifest
            .horizon
            .years()
            .map(|y| self.year(y))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RunOutputs {
            manifest: self.manifest.clone(),
            people: self.people()?.to_vec(),
            years,
            alltime: self.alltime()?.clone(),
            reports: self.reports()?,
            series: self.series()?.clone(),
        })
    }
}
