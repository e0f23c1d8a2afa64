//! Dump parsing, dating and resolution into a [`Corpus`].

pub mod annotations;
pub mod dates;
pub mod dump;
pub mod resolve;
pub mod wikitext;

use std::io::BufRead;

pub use annotations::{read_annotations, Annotation, AnnotationError, Annotations};
pub use dates::{extract_dates, Dating};
pub use dump::{parse_dump, DumpError, DumpReader, DumpStats, RawPage, DEFAULT_MAX_PAGE_BYTES};
pub use resolve::{resolve, ResolveError, ResolveOptions};

use crate::corpus::Corpus;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error(transparent)]
    Dump(#[from] DumpError),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
}

/// Parses a whole dump and resolves it into a corpus.
///
/// Raw pages are small (title plus link targets), so they are collected
/// before resolution; the page text itself is never retained.
pub fn ingest_dump<R: BufRead>(
    input: R,
    max_page_bytes: usize,
    options: &ResolveOptions<'_>,
) -> Result<Corpus, IngestError> {
    let mut reader = DumpReader::new(input, max_page_bytes);
    let pages = reader.by_ref().collect::<Result<Vec<_>, _>>()?;
    let mut corpus = resolve(&pages, options)?;
    let stats = reader.stats();
    corpus.stats.oversized_pages = stats.oversized;
    corpus.stats.pages_seen = stats.pages + stats.oversized;
    Ok(corpus)
}
