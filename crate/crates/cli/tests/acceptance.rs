//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.
//!
//! Run with `cargo test -p chronograph --test acceptance`.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use chronograph_core::bundle::{read_bundle, write_bundle};
use chronograph_core::centrality::{pagerank, score_year, PageRankParams};
use chronograph_core::corpus::{load_corpus, write_corpus_file};
use chronograph_core::person::{Horizon, Occupation, Person};
use chronograph_core::pipeline::{run, RunConfig};
use chronograph_core::reports::{category_distribution, outgroup_share};
use chronograph_core::temporal::{TemporalError, TemporalGraph};
use chronograph_core::Corpus;
use chronograph_testkit as kit;
use rand::Rng;
use tempfile::TempDir;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

struct Message(String);

impl From<TemporalError> for Message {
    fn from(e: TemporalError) -> Self {
        Message(e.to_string())
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn contemporaneity_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = kit::rng(0xC0DE);
    let mut years_checked = 0usize;
    for seed in 0..100u64 {
        let persons = rng.gen_range(2..=200);
        let links = rng.gen_range(0..=1500);
        let lifespan = rng.gen_range(0..=120);
        let corpus = kit::synthetic_corpus(seed, Horizon::DEFAULT, persons, links, lifespan, 0.8);
        ensure(
            corpus.persons.len() <= 200 && corpus.links.len() <= 1500,
            || format!("corpus {seed} exceeds the size bounds"),
        )?;
        let graph = TemporalGraph::build(&corpus);
        let mut brute = Vec::with_capacity(corpus.horizon.len());
        for year in corpus.horizon.years() {
            let want = kit::brute_slice(&corpus, year);
            let got = graph.slice(year).map_err(|e| e.to_string())?;
            ensure(got == want, || {
                format!("corpus {seed}: slice({year}) differs")
            })?;
            brute.push(want);
        }
        let mut i = 0;
        graph
            .sweep(corpus.horizon, |s| {
                if *s != brute[i] {
                    return Err(Message(format!(
                        "corpus {seed}: sweep differs at {}",
                        s.year
                    )));
                }
                i += 1;
                Ok(())
            })
            .map_err(|Message(m)| m)?;
        ensure(i == brute.len(), || {
            format!("corpus {seed}: sweep visited {i} years")
        })?;
        years_checked += i;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {:.1}s, limit 60s", elapsed.as_secs_f64())
    })?;
    Ok(format!(
        "100 corpora, {years_checked} year slices equal via slice and sweep in {:.1}s",
        elapsed.as_secs_f64()
    ))
}

fn pagerank_oracle() -> Outcome {
    let mut rng = kit::rng(0x9A9E);
    let defaults = PageRankParams::default();
    let params = PageRankParams {
        max_iter: 1000,
        ..defaults
    };
    let mut worst_l1 = 0.0f64;
    let mut worst_sum = 0.0f64;
    let mut dangling_graphs = 0;
    let mut capped = 0;
    for g in 0..200 {
        let n = rng.gen_range(1..=50);
        let slice = kit::random_slice(&mut rng, n);
        let pr = pagerank(&slice, &params).map_err(|e| e.to_string())?;
        ensure(pr.converged, || {
            format!(
                "graph {g}: no convergence in {} iterations",
                params.max_iter
            )
        })?;
        if pr.iterations > defaults.max_iter {
            capped += 1;
        }
        let want = kit::dense_pagerank(n, &kit::local_edges(&slice), params.damping);
        let l1: f64 = pr
            .scores
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - b).abs())
            .sum();
        let sum: f64 = pr.scores.iter().sum();
        worst_l1 = worst_l1.max(l1);
        worst_sum = worst_sum.max((sum - 1.0).abs());
        ensure(l1 <= 1e-8, || format!("graph {g} (n={n}): L1 {l1:e}"))?;
        ensure((sum - 1.0).abs() <= 1e-9, || {
            format!("graph {g}: sum {sum}")
        })?;
        let mut out = vec![0; n];
        for (s, _) in kit::local_edges(&slice) {
            out[s] += 1;
        }
        if out.contains(&0) {
            dangling_graphs += 1;
        }
    }
    let mut slices = 0;
    for seed in 0..3 {
        let corpus = kit::synthetic_corpus(1000 + seed, Horizon::DEFAULT, 200, 1500, 90, 0.9);
        let graph = TemporalGraph::build(&corpus);
        for year in corpus.horizon.years() {
            let slice = graph.slice(year).map_err(|e| e.to_string())?;
            if slice.is_empty() {
                continue;
            }
            let scores = score_year(&slice, &defaults).map_err(|e| e.to_string())?;
            let sum: f64 = scores.entries.iter().map(|e| e.pagerank).sum();
            worst_sum = worst_sum.max((sum - 1.0).abs());
            ensure((sum - 1.0).abs() <= 1e-9, || {
                format!("year {year}: sum {sum}")
            })?;
            slices += 1;
        }
    }
    Ok(format!(
        "200 graphs ({dangling_graphs} with dangling nodes), max L1 {worst_l1:.1e}, \
         {capped} needed more than the default {} iterations; \
         {slices} corpus slices; max |sum-1| {worst_sum:.1e}",
        defaults.max_iter
    ))
}

fn node_entry() -> Outcome {
    let corpus = kit::turn_of_era_corpus();
    let jesus = corpus
        .persons
        .iter()
        .find(|p| p.title == "Jesus")
        .ok_or("fixture lacks Jesus")?
        .id;
    let tmp = TempDir::new().map_err(|e| e.to_string())?;
    let outputs = run(&corpus, &RunConfig::default()).map_err(|e| e.to_string())?;
    write_bundle(&outputs, tmp.path()).map_err(|e| e.to_string())?;
    let bundle = read_bundle(tmp.path()).map_err(|e| e.to_string())?;
    let has = |year| -> Result<bool, String> {
        let record = bundle.year(year).map_err(|e| e.to_string())?;
        Ok(record.entries.iter().any(|e| e.id == jesus))
    };
    let graph = TemporalGraph::build(&corpus);
    let in_slice = |year| graph.slice(year).map(|s| s.nodes.contains(&jesus));
    ensure(!has(0)? && in_slice(0) == Ok(false), || {
        "present in year 0".into()
    })?;
    ensure(has(1)? && in_slice(1) == Ok(true), || {
        "absent in year 1".into()
    })?;
    Ok("born in year 1: absent from year 0, present in year 1".into())
}

fn leaderboard(
    edition: &str,
    culture: &str,
    column: kit::Column,
) -> Result<(Corpus, RunConfig), String> {
    let corpus = kit::leaderboard_corpus(edition, culture, column, Horizon::DEFAULT);
    let config = RunConfig {
        culture: Some(culture.to_owned()),
        report_sizes: vec![50],
        workers: 4,
        ..RunConfig::default()
    };
    Ok((corpus, config))
}

fn check_column(edition: &str, culture: &str, column: kit::Column) -> Result<String, String> {
    let (corpus, config) = leaderboard(edition, culture, column)?;
    let outputs = run(&corpus, &config).map_err(|e| e.to_string())?;
    let report = &outputs.reports.categories[0];
    let got = (
        report.counts[&Occupation::Politician],
        report.counts[&Occupation::Religious],
        report.counts[&Occupation::ArtistScientist],
        report.ingroup_count,
    );
    let want = (
        column.politician,
        column.religious,
        column.artist_scientist,
        column.ingroup,
    );
    ensure(report.n == 50 && got == want, || {
        format!("{edition}: got {got:?} over n={}, want {want:?}", report.n)
    })?;
    Ok(format!(
        "{edition} {}/{}/{} ingroup {}",
        got.0, got.1, got.2, got.3
    ))
}

fn table2() -> Outcome {
    let en = check_column("en", "anglo", kit::ENGLISH)?;
    let zh = check_column("zh", "sinic", kit::CHINESE)?;
    Ok(format!("{en}; {zh}"))
}

fn outgroup_shares() -> Outcome {
    let mut parts = Vec::new();
    for (edition, culture, column, want) in [
        ("en", "anglo", kit::ENGLISH, 0.80),
        ("zh", "sinic", kit::CHINESE, 2.0 / 50.0),
        ("ja", "japonic", kit::JAPANESE, 0.38),
    ] {
        let (corpus, config) = leaderboard(edition, culture, column)?;
        let outputs = run(&corpus, &config).map_err(|e| e.to_string())?;
        let report = category_distribution(&outputs.alltime, &corpus.persons, culture, 50)
            .map_err(|e| e.to_string())?;
        let share = outgroup_share(&report).map_err(|e| e.to_string())?;
        ensure(share == want, || format!("{edition}: {share} != {want}"))?;
        ensure(
            outputs.reports.ingroup[0].outgroup_share == Some(want),
            || format!("{edition}: stored report disagrees"),
        )?;
        parts.push(format!("{edition} {share}"));
    }
    Ok(parts.join(", "))
}

fn horizon_count() -> Outcome {
    let person = Person {
        id: 0,
        title: "Everlasting".into(),
        birth: Horizon::DEFAULT.start(),
        death: Horizon::DEFAULT.end(),
        occupation: Occupation::Other,
        culture: "unknown".into(),
    };
    let corpus = Corpus::from_parts("en", Horizon::DEFAULT, vec![person], vec![])
        .map_err(|e| e.to_string())?;
    let outputs = run(&corpus, &RunConfig::default()).map_err(|e| e.to_string())?;
    let count = outputs.manifest.nonempty_year_count;
    let records = outputs
        .years
        .iter()
        .filter(|r| !r.entries.is_empty())
        .count();
    ensure(count == 4951 && records == 4951, || {
        format!("nonempty_year_count {count}, non-empty records {records}")
    })?;
    Ok(format!("nonempty_year_count = {count}"))
}

fn cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_chronograph"))
        .args(args)
        .env("CHRONOGRAPH_LOG", "warn")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut all = Vec::new();
    let mut stack = vec![dir.to_owned()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).expect("readable bundle") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                stack.push(path);
            } else {
                all.push(path.strip_prefix(dir).expect("under dir").to_owned());
            }
        }
    }
    all.sort();
    all
}

fn determinism() -> Outcome {
    let tmp = TempDir::new().map_err(|e| e.to_string())?;
    let corpus = kit::synthetic_corpus(42, Horizon::DEFAULT, 1000, 8000, 80, 0.9);
    let path = tmp.path().join("corpus.jsonl");
    write_corpus_file(&corpus, &path).map_err(|e| e.to_string())?;
    let p = |x: &Path| x.to_str().expect("utf-8 path").to_owned();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for out in [&a, &b] {
        cli(&[
            "build",
            "--corpus",
            &p(&path),
            "--out",
            &p(out),
            "--workers",
            "4",
        ])?;
    }
    let (fa, fb) = (files(&a), files(&b));
    ensure(fa == fb, || "file lists differ".into())?;
    let mut bytes = 0;
    for f in &fa {
        let (x, y) = (
            fs::read(a.join(f)).map_err(|e| e.to_string())?,
            fs::read(b.join(f)).map_err(|e| e.to_string())?,
        );
        ensure(x == y, || format!("{} differs", f.display()))?;
        bytes += x.len();
    }
    Ok(format!("{} files, {bytes} bytes identical", fa.len()))
}

fn ingestion_fixture() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/ingest");
    let tmp = TempDir::new().map_err(|e| e.to_string())?;
    let out = tmp.path().join("corpus.jsonl");
    let p = |x: &Path| x.to_str().expect("utf-8 path").to_owned();
    cli(&[
        "ingest",
        "--dump",
        &p(&dir.join("dump.xml")),
        "--annotations",
        &p(&dir.join("annotations.jsonl")),
        "--out",
        &p(&out),
    ])?;
    let got = fs::read(&out).map_err(|e| e.to_string())?;
    let want = fs::read(dir.join("expected.jsonl")).map_err(|e| e.to_string())?;
    ensure(got == want, || "corpus differs from expected.jsonl".into())?;
    let corpus = load_corpus(&out).map_err(|e| e.to_string())?;
    Ok(format!(
        "20 pages -> {} persons, {} links, exact match",
        corpus.persons.len(),
        corpus.links.len()
    ))
}

const PERF_CHILD: &str = "--perf-child";

/// Runs in a fresh process so peak memory covers only this workload.
fn perf_child(dir: &Path) -> Result<(), String> {
    let corpus_path = dir.join("corpus.jsonl");
    let corpus = kit::synthetic_corpus(10_000, Horizon::DEFAULT, 10_000, 100_000, 90, 0.95);
    if corpus.persons.len() != 10_000 || corpus.links.len() != 100_000 {
        return Err(format!(
            "generated {} persons, {} links",
            corpus.persons.len(),
            corpus.links.len()
        ));
    }
    write_corpus_file(&corpus, &corpus_path).map_err(|e| e.to_string())?;
    drop(corpus);

    let start = Instant::now();
    let corpus = load_corpus(&corpus_path).map_err(|e| e.to_string())?;
    let workers = std::thread::available_parallelism().map_or(1, usize::from);
    let config = RunConfig {
        k: 50,
        workers,
        ..RunConfig::default()
    };
    let outputs = run(&corpus, &config).map_err(|e| e.to_string())?;
    let manifest = write_bundle(&outputs, dir.join("bundle")).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let rss = kit::peak_rss_bytes().ok_or("peak RSS unavailable")?;
    println!(
        "{} {} {} {} {} {}",
        elapsed.as_secs_f64(),
        rss,
        workers,
        manifest.interval_edges,
        manifest.nonempty_year_count,
        manifest.unconverged_years.len()
    );
    Ok(())
}

fn performance() -> Outcome {
    let tmp = TempDir::new().map_err(|e| e.to_string())?;
    let exe = std::env::current_exe().map_err(|e| e.to_string())?;
    let out = Command::new(exe)
        .arg(PERF_CHILD)
        .arg(tmp.path())
        .output()
        .map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    ensure(out.status.success(), || {
        format!(
            "child failed: {}{}",
            stdout,
            String::from_utf8_lossy(&out.stderr)
        )
    })?;
    let fields: Vec<f64> = stdout
        .split_whitespace()
        .map(|f| {
            f.parse()
                .map_err(|_| format!("bad child output {stdout:?}"))
        })
        .collect::<Result<_, _>>()?;
    let [secs, rss, workers, edges, years, unconverged] = fields[..] else {
        return Err(format!("bad child output {stdout:?}"));
    };
    let mib = rss / (1024.0 * 1024.0);
    let summary = format!(
        "10000 persons / 100000 links ({edges} contemporaneous), {years} non-empty years, \
         {unconverged} unconverged, {workers} workers: {secs:.1}s, peak {mib:.0} MiB"
    );
    ensure(secs < 60.0 && rss < 1e9, || summary.clone())?;
    Ok(summary)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    if args.get(1).map(String::as_str) == Some(PERF_CHILD) {
        return match perf_child(Path::new(&args[2])) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("{e}");
                ExitCode::FAILURE
            }
        };
    }

    let criteria: [Criterion; 9] = [
        ("contemporaneity oracle", contemporaneity_oracle),
        ("pagerank oracle", pagerank_oracle),
        ("node entry semantics", node_entry),
        ("table 2 fixture", table2),
        ("outgroup shares", outgroup_shares),
        ("horizon count", horizon_count),
        ("determinism", determinism),
        ("ingestion fixture", ingestion_fixture),
        ("performance target", performance),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1}s): {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
