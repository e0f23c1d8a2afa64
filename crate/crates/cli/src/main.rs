//! `chronograph`: ingest dumps, build bundles, report, compare and serve.
//!
//! Exit status is 0 on success, 2 for bad arguments or unusable input and 1
//! for anything else. Logs go to stderr, filtered by `CHRONOGRAPH_LOG`.

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use chronograph_api::{serve, ServiceConfig, DEFAULT_CACHE_YEARS};
use chronograph_core::bundle::{read_bundle, write_bundle, Bundle, BundleError};
use chronograph_core::centrality::{Aggregation, PageRankParams};
use chronograph_core::corpus::{load_corpus, write_corpus_file, Corpus};
use chronograph_core::ingest::{
    ingest_dump, read_annotations, Annotations, ResolveOptions, DEFAULT_MAX_PAGE_BYTES,
};
use chronograph_core::person::{Horizon, Year};
use chronograph_core::pipeline::{run, PipelineError, RunConfig};
use chronograph_core::reports::{
    category_distribution, category_table, compare_editions, comparison_table, format_table,
    ingroup_report, ingroup_table, EditionView, IdentityMap,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "chronograph",
    version,
    about = "Historical leadership networks from encyclopedia dumps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a dump (or re-annotate a corpus) into a dated people-link corpus.
    Ingest(IngestArgs),
    /// Rank every year of a corpus and write a bundle.
    Build(BuildArgs),
    /// Print a report from a bundle.
    Report(ReportArgs),
    /// Compare the all-time top-n of several bundles.
    Compare(CompareArgs),
    /// Serve bundles over HTTP.
    Serve(ServeArgs),
}

#[derive(Args)]
#[group(id = "source", required = true, multiple = false)]
struct Source {
    /// MediaWiki XML dump.
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Existing corpus to re-annotate.
    #[arg(long)]
    corpus: Option<PathBuf>,
}

#[derive(Args)]
struct IngestArgs {
    #[command(flatten)]
    source: Source,
    /// JSONL of {"title","occupation","culture"}.
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Edition code; defaults to "en" for dumps and to the corpus's own.
    #[arg(long)]
    edition: Option<String>,
    #[arg(long, default_value_t = Horizon::DEFAULT.start(), allow_hyphen_values = true)]
    from: Year,
    #[arg(long, default_value_t = Horizon::DEFAULT.end(), allow_hyphen_values = true)]
    to: Year,
    /// Pages whose XML exceeds this many bytes are skipped.
    #[arg(long, default_value_t = DEFAULT_MAX_PAGE_BYTES)]
    max_page_bytes: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Output directory; must be empty or absent.
    #[arg(long)]
    out: PathBuf,
    /// First year to rank; defaults to the corpus horizon.
    #[arg(long, allow_hyphen_values = true)]
    from: Option<Year>,
    #[arg(long, allow_hyphen_values = true)]
    to: Option<Year>,
    #[arg(long, default_value_t = PageRankParams::default().damping)]
    damping: f64,
    #[arg(long, default_value_t = PageRankParams::default().epsilon)]
    eps: f64,
    #[arg(long, default_value_t = PageRankParams::default().max_iter)]
    max_iter: u32,
    /// Entries stored per year.
    #[arg(long, default_value_t = 50)]
    top: usize,
    #[arg(long, default_value_t = Aggregation::Sum)]
    agg: Aggregation,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Ingroup culture tag; defaults to the edition's.
    #[arg(long)]
    culture: Option<String>,
    /// Top-n sizes of the stored reports.
    #[arg(long = "report-size", default_values_t = [10, 50])]
    report_sizes: Vec<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportKind {
    Top,
    Categories,
    Ingroup,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Table,
    Json,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(value_enum)]
    kind: ReportKind,
    #[arg(long)]
    bundle: PathBuf,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct CompareArgs {
    /// Bundle directories, one per edition.
    #[arg(long = "bundle", required = true, num_args = 1..)]
    bundles: Vec<PathBuf>,
    /// JSONL of {"edition","title","key"} linking titles across editions.
    #[arg(long)]
    identity: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long = "bundle", required = true, num_args = 1..)]
    bundles: Vec<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    #[arg(long)]
    identity: Option<PathBuf>,
    /// Allowed CORS origin; repeat for several.
    #[arg(long = "cors-origin")]
    cors_origins: Vec<String>,
    /// Year records kept in memory per edition.
    #[arg(long, default_value_t = DEFAULT_CACHE_YEARS)]
    cache_years: usize,
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn usage(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: error.into(),
    }
}

fn internal(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 1,
        error: error.into(),
    }
}

fn bundle_failure(e: BundleError) -> Failure {
    match e {
        BundleError::Io { ref source, .. } if source.kind() != io::ErrorKind::NotFound => {
            internal(e)
        }
        _ => usage(e),
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CHRONOGRAPH_LOG", "info"))
        .format_timestamp(None)
        .init();
    let outcome = match cli.command {
        Command::Ingest(args) => ingest(args),
        Command::Build(args) => build(args),
        Command::Report(args) => report(args),
        Command::Compare(args) => compare(args),
        Command::Serve(args) => serve_cmd(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .with_context(|| format!("cannot open {}", path.display()))
        .map_err(usage)
}

fn load_annotations(path: &Path) -> Result<Annotations, Failure> {
    read_annotations(open(path)?)
        .with_context(|| format!("annotations {}", path.display()))
        .map_err(usage)
}

fn reannotate(corpus: &mut Corpus, annotations: &Annotations) {
    for p in &mut corpus.persons {
        if let Some(a) = annotations.get(&p.title) {
            p.occupation = a.occupation;
            p.culture = a.culture.clone();
        }
    }
    corpus.stats.unknown_occupations = annotations.unknown_occupations;
}

fn ingest(args: IngestArgs) -> Outcome {
    let horizon = Horizon::new(args.from, args.to).map_err(usage)?;
    let annotations = args
        .annotations
        .as_deref()
        .map(load_annotations)
        .transpose()?;
    let corpus = if let Some(dump) = &args.source.dump {
        let options = ResolveOptions {
            edition: args.edition.clone().unwrap_or_else(|| "en".into()),
            horizon,
            annotations: annotations.as_ref(),
        };
        ingest_dump(open(dump)?, args.max_page_bytes, &options)
            .with_context(|| format!("dump {}", dump.display()))
            .map_err(usage)?
    } else {
        let path = args
            .source
            .corpus
            .as_ref()
            .expect("clap enforces one source");
        let mut corpus = load_corpus(path).map_err(usage)?;
        if let Some(edition) = &args.edition {
            corpus.edition = edition.clone();
        }
        if let Some(a) = &annotations {
            reannotate(&mut corpus, a);
        }
        corpus
    };
    write_corpus_file(&corpus, &args.out).map_err(internal)?;

    let s = &corpus.stats;
    eprintln!(
        "{} persons, {} links written to {}",
        corpus.persons.len(),
        corpus.links.len(),
        args.out.display()
    );
    eprintln!(
        "pages {} (oversized {}), redirects {}, undated {}, inconsistent dates {}, out of horizon {}, date conflicts {}",
        s.pages_seen, s.oversized_pages, s.redirects, s.undated, s.inconsistent_dates, s.out_of_horizon, s.date_conflicts
    );
    eprintln!(
        "links dropped: dangling {}, self {}, duplicate {}; unknown occupations {}",
        s.dangling_links, s.self_links, s.duplicate_links, s.unknown_occupations
    );
    Ok(())
}

fn build(args: BuildArgs) -> Outcome {
    let corpus = load_corpus(&args.corpus).map_err(usage)?;
    let range = match (args.from, args.to) {
        (None, None) => None,
        (from, to) => Some(
            Horizon::new(
                from.unwrap_or(corpus.horizon.start()),
                to.unwrap_or(corpus.horizon.end()),
            )
            .map_err(usage)?,
        ),
    };
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from));
    let config = RunConfig {
        range,
        pagerank: PageRankParams {
            damping: args.damping,
            epsilon: args.eps,
            max_iter: args.max_iter,
        },
        k: args.top,
        aggregation: args.agg,
        workers,
        culture: args.culture,
        report_sizes: args.report_sizes,
    };
    let outputs = run(&corpus, &config).map_err(|e| match e {
        PipelineError::Config(_) => usage(e),
        e => internal(e),
    })?;
    let manifest = write_bundle(&outputs, &args.out).map_err(bundle_failure)?;
    if !manifest.unconverged_years.is_empty() {
        log::warn!(
            "PageRank hit max_iter in {} years",
            manifest.unconverged_years.len()
        );
    }
    eprintln!(
        "{} years ({} non-empty) written to {}",
        manifest.horizon.len(),
        manifest.nonempty_year_count,
        args.out.display()
    );
    Ok(())
}

fn open_bundle(path: &Path) -> Result<Bundle, Failure> {
    read_bundle(path)
        .with_context(|| format!("bundle {}", path.display()))
        .map_err(|e| match e.downcast::<BundleError>() {
            Ok(b) => bundle_failure(b),
            Err(e) => usage(e),
        })
}

fn print(text: &str) -> Outcome {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(internal(e)),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn report(args: ReportArgs) -> Outcome {
    if args.n == 0 {
        return Err(usage(anyhow::anyhow!("--n must be at least 1")));
    }
    let bundle = open_bundle(&args.bundle)?;
    let alltime = bundle.alltime().map_err(bundle_failure)?;
    let people = bundle.people().map_err(bundle_failure)?;
    let culture = &bundle.manifest().culture;
    let text = match args.kind {
        ReportKind::Top => {
            let top = alltime.top(args.n);
            match args.format {
                Format::Json => {
                    let rows: Vec<serde_json::Value> = top
                        .iter()
                        .enumerate()
                        .map(|(i, e)| {
                            serde_json::json!({
                                "rank": i + 1,
                                "id": e.id,
                                "title": people[e.id as usize].title,
                                "score": e.score,
                                "indegree": e.indegree,
                            })
                        })
                        .collect();
                    to_json(&rows)
                }
                Format::Table => {
                    let rows: Vec<Vec<String>> = top
                        .iter()
                        .enumerate()
                        .map(|(i, e)| {
                            vec![
                                (i + 1).to_string(),
                                e.id.to_string(),
                                people[e.id as usize].title.clone(),
                                format!("{:.6}", e.score),
                                e.indegree.to_string(),
                            ]
                        })
                        .collect();
                    format_table(&["rank", "id", "title", "score", "indegree"], &rows)
                }
            }
        }
        ReportKind::Categories | ReportKind::Ingroup => {
            let cats = category_distribution(alltime, people, culture, args.n).map_err(internal)?;
            match (args.kind, args.format) {
                (ReportKind::Categories, Format::Json) => to_json(&cats),
                (ReportKind::Categories, Format::Table) => category_table(&[cats]),
                (_, Format::Json) => to_json(&ingroup_report(&cats)),
                (_, Format::Table) => ingroup_table(&[ingroup_report(&cats)]),
            }
        }
    };
    print(&text)
}

fn compare(args: CompareArgs) -> Outcome {
    if args.n == 0 {
        return Err(usage(anyhow::anyhow!("--n must be at least 1")));
    }
    let bundles = args
        .bundles
        .iter()
        .map(|p| open_bundle(p))
        .collect::<Result<Vec<_>, _>>()?;
    let identity = match &args.identity {
        Some(path) => IdentityMap::read(open(path)?)
            .with_context(|| format!("identity map {}", path.display()))
            .map_err(usage)?,
        None => IdentityMap::default(),
    };
    let mut views = Vec::with_capacity(bundles.len());
    for b in &bundles {
        views.push(EditionView {
            ranking: b.alltime().map_err(bundle_failure)?,
            people: b.people().map_err(bundle_failure)?,
            culture: &b.manifest().culture,
        });
    }
    let report = compare_editions(&views, &identity, args.n).map_err(usage)?;
    match args.format {
        Format::Json => print(&to_json(&report)),
        Format::Table => print(&comparison_table(&report)),
    }
}

fn serve_cmd(args: ServeArgs) -> Outcome {
    let config = ServiceConfig {
        addr: args.addr,
        bundles: args.bundles,
        identity: args.identity,
        cors_origins: args.cors_origins,
        cache_years: args.cache_years,
    };
    let runtime = tokio::runtime::Runtime::new().map_err(internal)?;
    runtime.block_on(serve(config)).map_err(|e| match e {
        chronograph_api::ServiceError::Io(_) => internal(e),
        e => usage(e),
    })
}
