//! Streaming reader for the MediaWiki XML export format.
//!
//! Only `page`, `title`, `redirect`, `revision` and `text` are interpreted;
//! every other element is skipped. Pages are yielded one at a time so memory
//! stays proportional to the largest page, not the dump.

use std::io::BufRead;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::wikitext::{self, normalize_title};

/// Default cap on the wikitext of a single page.
pub const DEFAULT_MAX_PAGE_BYTES: usize = 8 << 20;

/// Nesting deeper than this is rejected as malformed.
const MAX_DEPTH: usize = 64;

/// A page as it appears in the dump, before dating and resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawPage {
    pub title: String,
    pub redirect_target: Option<String>,
    pub wikilinks: Vec<String>,
    pub categories: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum DumpError {
    #[error("malformed XML at byte {offset}: {message}")]
    Xml { offset: u64, message: String },
    #[error("page ending at byte {offset} has no usable title")]
    MissingTitle { offset: u64 },
}

impl DumpError {
    pub fn offset(&self) -> u64 {
        match self {
            DumpError::Xml { offset, .. } | DumpError::MissingTitle { offset } => *offset,
        }
    }
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct DumpStats {
    /// Pages yielded.
    pub pages: u64,
    /// Pages skipped because their text exceeded the size cap.
    pub oversized: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tag {
    Page,
    Title,
    Revision,
    Text,
    Other,
}

impl Tag {
    fn of(name: &[u8]) -> Tag {
        match name {
            b"page" => Tag::Page,
            b"title" => Tag::Title,
            b"revision" => Tag::Revision,
            b"text" => Tag::Text,
            _ => Tag::Other,
        }
    }
}

#[derive(Default)]
struct PageBuilder {
    title: String,
    redirect: Option<String>,
    text: String,
    oversized: bool,
}

/// Iterator over the pages of a dump.
///
/// Yields at most one error, after which it is exhausted.
pub struct DumpReader<R: BufRead> {
    reader: Reader<R>,
    buf: Vec<u8>,
    stack: Vec<Tag>,
    page: Option<PageBuilder>,
    max_page_bytes: usize,
    stats: DumpStats,
    done: bool,
}

/// Streams pages out of `input` with the default page size cap.
pub fn parse_dump<R: BufRead>(input: R) -> DumpReader<R> {
    DumpReader::new(input, DEFAULT_MAX_PAGE_BYTES)
}

impl<R: BufRead> DumpReader<R> {
    pub fn new(input: R, max_page_bytes: usize) -> Self {
        Self {
            reader: Reader::from_reader(input),
            buf: Vec::new(),
            stack: Vec::new(),
            page: None,
            max_page_bytes,
            stats: DumpStats::default(),
            done: false,
        }
    }

    pub fn stats(&self) -> DumpStats {
        self.stats
    }

    fn xml_error(&self, message: impl Into<String>) -> DumpError {
        DumpError::Xml {
            offset: self.reader.buffer_position(),
            message: message.into(),
        }
    }

    /// Where the enclosing text belongs: directly under `page/title` or
    /// `page/revision/text`.
    fn text_target(&self) -> Option<Tag> {
        match self.stack.as_slice() {
            [.., Tag::Page, Tag::Title] => Some(Tag::Title),
            [.., Tag::Page, Tag::Revision, Tag::Text] => Some(Tag::Text),
            _ => None,
        }
    }

    fn append_text(&mut self, s: &str) {
        let max = self.max_page_bytes;
        let target = self.text_target();
        let Some(page) = self.page.as_mut() else {
            return;
        };
        match target {
            Some(Tag::Title) => page.title.push_str(s),
            Some(Tag::Text) if !page.oversized => {
                if page.text.len() + s.len() > max {
                    page.oversized = true;
                    page.text = String::new();
                } else {
                    page.text.push_str(s);
                }
            }
            _ => {}
        }
    }

    fn open(&mut self, start: &BytesStart<'_>, empty: bool) -> Result<(), DumpError> {
        let tag = Tag::of(start.local_name().as_ref());
        match tag {
            Tag::Page if self.page.is_some() => {
                return Err(self.xml_error("nested <page> element"));
            }
            Tag::Page => self.page = Some(PageBuilder::default()),
            Tag::Other
                if start.local_name().as_ref() == b"redirect"
                    && self.stack.last() == Some(&Tag::Page) =>
            {
                let target = start
                    .try_get_attribute("title")
                    .map_err(|e| self.xml_error(e.to_string()))?
                    .map(|a| a.unescape_value().map(|v| v.into_owned()))
                    .transpose()
                    .map_err(|e| self.xml_error(e.to_string()))?;
                if let (Some(page), Some(target)) = (self.page.as_mut(), target) {
                    page.redirect = normalize_title(&target);
                }
            }
            _ => {}
        }
        if empty {
            if tag == Tag::Page {
                return Err(self.xml_error("empty <page/> element"));
            }
        } else {
            if self.stack.len() >= MAX_DEPTH {
                return Err(self.xml_error("element nesting too deep"));
            }
            self.stack.push(tag);
        }
        Ok(())
    }

    /// Handles an end tag; returns a finished page when `</page>` closes one.
    fn close(&mut self) -> Result<Option<RawPage>, DumpError> {
        let Some(tag) = self.stack.pop() else {
            return Err(self.xml_error("unbalanced end tag"));
        };
        if tag != Tag::Page {
            return Ok(None);
        }
        let page = self.page.take().unwrap_or_default();
        if page.oversized {
            self.stats.oversized += 1;
            log::warn!(
                "skipping page {:?}: text exceeds {} bytes",
                page.title,
                self.max_page_bytes
            );
            return Ok(None);
        }
        let Some(title) = normalize_title(&page.title) else {
            return Err(DumpError::MissingTitle {
                offset: self.reader.buffer_position(),
            });
        };
        self.stats.pages += 1;
        let raw = match page.redirect {
            Some(target) => RawPage {
                title,
                redirect_target: Some(target),
                wikilinks: Vec::new(),
                categories: Vec::new(),
            },
            None => {
                let extracted = wikitext::extract(&page.text);
                RawPage {
                    title,
                    redirect_target: None,
                    wikilinks: extracted.wikilinks,
                    categories: extracted.categories,
                }
            }
        };
        Ok(Some(raw))
    }

    fn next_page(&mut self) -> Result<Option<RawPage>, DumpError> {
        loop {
            self.buf.clear();
            let event = match self.reader.read_event_into(&mut self.buf) {
                Ok(event) => event.into_owned(),
                Err(e) => {
                    return Err(DumpError::Xml {
                        offset: self.reader.error_position(),
                        message: e.to_string(),
                    })
                }
            };
            match event {
                Event::Start(start) => self.open(&start, false)?,
                Event::Empty(start) => self.open(&start, true)?,
                Event::End(_) => {
                    if let Some(page) = self.close()? {
                        return Ok(Some(page));
                    }
                }
                Event::Text(text) => {
                    if self.text_target().is_some() {
                        let s = text.unescape().map_err(|e| self.xml_error(e.to_string()))?;
                        self.append_text(&s);
                    }
                }
                Event::CData(data) => {
                    if self.text_target().is_some() {
                        let s = std::str::from_utf8(&data)
                            .map_err(|e| self.xml_error(e.to_string()))?
                            .to_owned();
                        self.append_text(&s);
                    }
                }
                Event::Eof => {
                    if !self.stack.is_empty() {
                        return Err(self.xml_error("unexpected end of input inside element"));
                    }
                    return Ok(None);
                }
                _ => {}
            }
        }
    }
}

impl<R: BufRead> Iterator for DumpReader<R> {
    type Item = Result<RawPage, DumpError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.next_page() {
            Ok(Some(page)) => Some(Ok(page)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}
