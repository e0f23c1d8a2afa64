//! Sidecar annotations: occupation and culture per title.

use std::collections::HashMap;
use std::io::BufRead;

use serde::Deserialize;

use super::wikitext::normalize_title;
use crate::person::Occupation;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub occupation: Occupation,
    pub culture: String,
}

#[derive(Debug, Default, Clone)]
pub struct Annotations {
    by_title: HashMap<String, Annotation>,
    /// Entries whose occupation tag was not recognised and became `other`.
    pub unknown_occupations: u64,
}

#[derive(Debug, thiserror::Error)]
#[error("annotations line {line}: {message}")]
pub struct AnnotationError {
    pub line: usize,
    pub message: String,
}

#[derive(Deserialize)]
struct Line {
    title: String,
    occupation: String,
    culture: String,
}

impl Annotations {
    pub fn get(&self, title: &str) -> Option<&Annotation> {
        self.by_title.get(title)
    }

    pub fn insert(&mut self, title: &str, annotation: Annotation) {
        if let Some(title) = normalize_title(title) {
            self.by_title.insert(title, annotation);
        }
    }

    pub fn len(&self) -> usize {
        self.by_title.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_title.is_empty()
    }
}

/// Reads the annotation JSONL. Later lines win for repeated titles; unknown
/// occupation tags are kept as `other` and counted.
pub fn read_annotations<R: BufRead>(input: R) -> Result<Annotations, AnnotationError> {
    let mut out = Annotations::default();
    for (i, line) in input.lines().enumerate() {
        let err = |e: &dyn std::fmt::Display| AnnotationError {
            line: i + 1,
            message: e.to_string(),
        };
        let line = line.map_err(|e| err(&e))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: Line = serde_json::from_str(&line).map_err(|e| err(&e))?;
        let occupation = entry.occupation.parse().unwrap_or_else(|_| {
            log::warn!(
                "annotations line {}: unknown occupation {:?}, using \"other\"",
                i + 1,
                entry.occupation
            );
            out.unknown_occupations += 1;
            Occupation::Other
        });
        out.insert(
            &entry.title,
            Annotation {
                occupation,
                culture: entry.culture,
            },
        );
    }
    Ok(out)
}
