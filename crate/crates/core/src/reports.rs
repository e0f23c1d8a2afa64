//! Category distributions, ingroup shares and cross-edition comparison of
//! all-time rankings.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::centrality::AllTimeRanking;
use crate::person::{Occupation, Person, PersonId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReportError {
    #[error("person id {0} has no metadata")]
    UnknownPerson(PersonId),
    #[error("outgroup share is undefined for an empty top-n")]
    EmptyTopN,
    #[error("comparison needs at least two editions, got {0}")]
    TooFewEditions(usize),
    #[error("identity map line {line}: {message}")]
    IdentityMap { line: usize, message: String },
}

/// Occupation mix and ingroup size of an all-time top-n.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryReport {
    pub edition: String,
    pub culture: String,
    pub requested_n: usize,
    /// Entries actually counted; smaller than `requested_n` when the ranking
    /// is shorter.
    pub n: usize,
    pub truncated: bool,
    pub counts: BTreeMap<Occupation, usize>,
    pub ingroup_count: usize,
}

/// Ingroup count and outgroup share of an all-time top-n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngroupReport {
    pub edition: String,
    pub culture: String,
    pub n: usize,
    pub ingroup_count: usize,
    pub outgroup_share: Option<f64>,
}

fn lookup(people: &[Person], id: PersonId) -> Result<&Person, ReportError> {
    people
        .get(id as usize)
        .filter(|p| p.id == id)
        .ok_or(ReportError::UnknownPerson(id))
}

/// Counts occupations and ingroup members among the top `n` entries.
///
/// `people` is indexed by person id. Ingroup means the person's culture tag
/// equals `culture`.
pub fn category_distribution(
    ranking: &AllTimeRanking,
    people: &[Person],
    culture: &str,
    n: usize,
) -> Result<CategoryReport, ReportError> {
    let top = ranking.top(n);
    if top.len() < n {
        log::warn!(
            "{}: ranking has {} entries, fewer than the requested top {n}",
            ranking.edition,
            top.len()
        );
    }
    let mut counts: BTreeMap<Occupation, usize> = Occupation::ALL.iter().map(|&o| (o, 0)).collect();
    let mut ingroup_count = 0;
    for entry in top {
        let person = lookup(people, entry.id)?;
        *counts.entry(person.occupation).or_default() += 1;
        if person.culture == culture {
            ingroup_count += 1;
        }
    }
    Ok(CategoryReport {
        edition: ranking.edition.clone(),
        culture: culture.to_owned(),
        requested_n: n,
        n: top.len(),
        truncated: top.len() < n,
        counts,
        ingroup_count,
    })
}

/// Fraction of the top-n from outside the edition's culture.
pub fn outgroup_share(report: &CategoryReport) -> Result<f64, ReportError> {
    if report.n == 0 {
        return Err(ReportError::EmptyTopN);
    }
    Ok((report.n - report.ingroup_count) as f64 / report.n as f64)
}

pub fn ingroup_report(report: &CategoryReport) -> IngroupReport {
    IngroupReport {
        edition: report.edition.clone(),
        culture: report.culture.clone(),
        n: report.n,
        ingroup_count: report.ingroup_count,
        outgroup_share: outgroup_share(report).ok(),
    }
}

/// Maps `(edition, title)` to a key shared by the same person across
/// editions. Titles without an entry use the title itself as key.
#[derive(Debug, Clone, Default)]
pub struct IdentityMap {
    keys: HashMap<(String, String), String>,
}

#[derive(Deserialize)]
struct IdentityLine {
    edition: String,
    title: String,
    key: String,
}

impl IdentityMap {
    pub fn insert(&mut self, edition: &str, title: &str, key: &str) {
        self.keys
            .insert((edition.to_owned(), title.to_owned()), key.to_owned());
    }

    pub fn key<'a>(&'a self, edition: &str, title: &'a str) -> &'a str {
        self.keys
            .get(&(edition.to_owned(), title.to_owned()))
            .map_or(title, String::as_str)
    }

    /// Reads JSONL lines of `{"edition":..,"title":..,"key":..}`.
    pub fn read<R: BufRead>(input: R) -> Result<Self, ReportError> {
        let mut map = IdentityMap::default();
        for (i, line) in input.lines().enumerate() {
            let err = |message: String| ReportError::IdentityMap {
                line: i + 1,
                message,
            };
            let line = line.map_err(|e| err(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: IdentityLine =
                serde_json::from_str(&line).map_err(|e| err(e.to_string()))?;
            map.insert(&entry.edition, &entry.title, &entry.key);
        }
        Ok(map)
    }
}

/// One edition's inputs to a comparison.
#[derive(Debug, Clone, Copy)]
pub struct EditionView<'a> {
    pub ranking: &'a AllTimeRanking,
    pub people: &'a [Person],
    pub culture: &'a str,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairComparison {
    pub a: String,
    pub b: String,
    pub overlap: usize,
    /// Spearman correlation over the shared persons; absent below two.
    pub spearman: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub editions: Vec<String>,
    pub n: usize,
    /// Persons present in the top-n of every edition.
    pub overlap: usize,
    /// Identity keys of those persons, sorted.
    pub shared: Vec<String>,
    pub outgroup_share: BTreeMap<String, Option<f64>>,
    pub pairs: Vec<PairComparison>,
}

fn top_keys<'a>(
    view: &EditionView<'a>,
    identity: &'a IdentityMap,
    n: usize,
) -> Result<Vec<&'a str>, ReportError> {
    let mut seen = HashSet::new();
    let mut keys = Vec::new();
    for entry in view.ranking.top(n) {
        let person = lookup(view.people, entry.id)?;
        let key = identity.key(&view.ranking.edition, &person.title);
        if seen.insert(key) {
            keys.push(key);
        }
    }
    Ok(keys)
}

/// Spearman's rho between two rank lists, restricted to their common keys.
fn spearman(a: &[&str], b: &[&str]) -> (usize, Option<f64>) {
    let in_b: HashSet<&str> = b.iter().copied().collect();
    let shared_a: Vec<&str> = a.iter().copied().filter(|k| in_b.contains(k)).collect();
    let m = shared_a.len();
    if m < 2 {
        return (m, None);
    }
    let in_a: HashSet<&str> = shared_a.iter().copied().collect();
    let rank_b: HashMap<&str, usize> = b
        .iter()
        .copied()
        .filter(|k| in_a.contains(k))
        .enumerate()
        .map(|(r, k)| (k, r))
        .collect();
    let d2: f64 = shared_a
        .iter()
        .enumerate()
        .map(|(ra, k)| {
            let d = ra as f64 - rank_b[k] as f64;
            d * d
        })
        .sum();
    let mf = m as f64;
    (m, Some(1.0 - 6.0 * d2 / (mf * (mf * mf - 1.0))))
}

/// Compares the top-n of several editions pairwise and jointly.
pub fn compare_editions(
    views: &[EditionView<'_>],
    identity: &IdentityMap,
    n: usize,
) -> Result<ComparisonReport, ReportError> {
    if views.len() < 2 {
        return Err(ReportError::TooFewEditions(views.len()));
    }
    let keys = views
        .iter()
        .map(|v| top_keys(v, identity, n))
        .collect::<Result<Vec<_>, _>>()?;

    let mut shared: Vec<String> = keys[0]
        .iter()
        .filter(|k| keys[1..].iter().all(|other| other.contains(k)))
        .map(|k| k.to_string())
        .collect();
    shared.sort();

    let mut outgroup = BTreeMap::new();
    for v in views {
        let report = category_distribution(v.ranking, v.people, v.culture, n)?;
        outgroup.insert(v.ranking.edition.clone(), outgroup_share(&report).ok());
    }

    let mut pairs = Vec::new();
    for i in 0..views.len() {
        for j in i + 1..views.len() {
            let (overlap, rho) = spearman(&keys[i], &keys[j]);
            pairs.push(PairComparison {
                a: views[i].ranking.edition.clone(),
                b: views[j].ranking.edition.clone(),
                overlap,
                spearman: rho,
            });
        }
    }

    Ok(ComparisonReport {
        editions: views.iter().map(|v| v.ranking.edition.clone()).collect(),
        n,
        overlap: shared.len(),
        shared,
        outgroup_share: outgroup,
        pairs,
    })
}

/// Renders rows as left-aligned, space-separated columns.
pub fn format_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &mut dyn Iterator<Item = &str>| {
        let mut text = String::new();
        for (i, (cell, w)) in cells.zip(&widths).enumerate() {
            if i > 0 {
                text.push_str("  ");
            }
            text.push_str(cell);
            text.extend(std::iter::repeat_n(' ', w - cell.chars().count()));
        }
        out.push_str(text.trim_end());
        out.push('\n');
    };
    line(&mut header.iter().copied());
    for row in rows {
        line(&mut row.iter().map(String::as_str));
    }
    out
}

pub fn category_table(reports: &[CategoryReport]) -> String {
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let mut row = vec![r.edition.clone(), r.n.to_string()];
            row.extend(
                Occupation::ALL
                    .iter()
                    .map(|o| r.counts.get(o).copied().unwrap_or(0).to_string()),
            );
            row.push(r.ingroup_count.to_string());
            row
        })
        .collect();
    format_table(
        &[
            "edition",
            "n",
            "politician",
            "religious",
            "artist_scientist",
            "other",
            "ingroup",
        ],
        &rows,
    )
}

pub fn ingroup_table(reports: &[IngroupReport]) -> String {
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.edition.clone(),
                r.culture.clone(),
                r.n.to_string(),
                r.ingroup_count.to_string(),
                r.outgroup_share
                    .map_or_else(|| "-".to_owned(), |s| format!("{s:.4}")),
            ]
        })
        .collect();
    format_table(
        &["edition", "culture", "n", "ingroup", "outgroup_share"],
        &rows,
    )
}

pub fn comparison_table(report: &ComparisonReport) -> String {
    let mut out = format!(
        "top {} across {}: {} shared\n",
        report.n,
        report.editions.join(", "),
        report.overlap
    );
    let rows: Vec<Vec<String>> = report
        .pairs
        .iter()
        .map(|p| {
            vec![
                p.a.clone(),
                p.b.clone(),
                p.overlap.to_string(),
                p.spearman
                    .map_or_else(|| "-".to_owned(), |r| format!("{r:.4}")),
            ]
        })
        .collect();
    out.push_str(&format_table(&["a", "b", "overlap", "spearman"], &rows));
    let rows: Vec<Vec<String>> = report
        .outgroup_share
        .iter()
        .map(|(e, s)| {
            vec![
                e.clone(),
                s.map_or_else(|| "-".to_owned(), |s| format!("{s:.4}")),
            ]
        })
        .collect();
    out.push_str(&format_table(&["edition", "outgroup_share"], &rows));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centrality::{Aggregation, AllTimeEntry};

    fn people(titles: &[&str]) -> Vec<Person> {
        titles
            .iter()
            .enumerate()
            .map(|(i, t)| Person {
                id: i as PersonId,
                title: t.to_string(),
                birth: 0,
                death: 1,
                occupation: Occupation::Other,
                culture: "x".into(),
            })
            .collect()
    }

    fn ranking(edition: &str, order: &[PersonId]) -> AllTimeRanking {
        AllTimeRanking {
            edition: edition.into(),
            method: Aggregation::Sum,
            entries: order
                .iter()
                .enumerate()
                .map(|(r, &id)| AllTimeEntry {
                    id,
                    score: 1.0 / (r as f64 + 1.0),
                    indegree: 0,
                })
                .collect(),
        }
    }

    #[test]
    fn n_zero_counts_nothing() {
        let p = people(&["A"]);
        let r = category_distribution(&ranking("en", &[0]), &p, "x", 0).unwrap();
        assert_eq!(r.n, 0);
        assert!(r.counts.values().all(|&c| c == 0));
        assert_eq!(outgroup_share(&r), Err(ReportError::EmptyTopN));
    }

    #[test]
    fn short_ranking_is_flagged() {
        let p = people(&["A", "B"]);
        let r = category_distribution(&ranking("en", &[1, 0]), &p, "x", 50).unwrap();
        assert_eq!((r.n, r.truncated, r.ingroup_count), (2, true, 2));
        assert_eq!(r.counts[&Occupation::Other], 2);
    }

    #[test]
    fn unknown_person_is_an_error() {
        let p = people(&["A"]);
        assert_eq!(
            category_distribution(&ranking("en", &[3]), &p, "x", 5),
            Err(ReportError::UnknownPerson(3))
        );
    }

    #[test]
    fn identical_and_disjoint_editions() {
        let p = people(&["A", "B", "C"]);
        let r = ranking("en", &[0, 1, 2]);
        let views = [
            EditionView {
                ranking: &r,
                people: &p,
                culture: "x",
            },
            EditionView {
                ranking: &r,
                people: &p,
                culture: "x",
            },
        ];
        let c = compare_editions(&views, &IdentityMap::default(), 3).unwrap();
        assert_eq!(c.overlap, 3);
        assert_eq!(c.pairs[0].spearman, Some(1.0));

        let q = people(&["D", "E", "F"]);
        let views = [
            EditionView {
                ranking: &r,
                people: &p,
                culture: "x",
            },
            EditionView {
                ranking: &r,
                people: &q,
                culture: "x",
            },
        ];
        let c = compare_editions(&views, &IdentityMap::default(), 3).unwrap();
        assert_eq!(c.overlap, 0);
        assert_eq!(c.pairs[0].spearman, None);
    }

    #[test]
    fn reversed_lists_anticorrelate() {
        let p = people(&["A", "B", "C", "D"]);
        let a = ranking("en", &[0, 1, 2, 3]);
        let b = ranking("de", &[3, 2, 1, 0]);
        let views = [
            EditionView {
                ranking: &a,
                people: &p,
                culture: "x",
            },
            EditionView {
                ranking: &b,
                people: &p,
                culture: "x",
            },
        ];
        let c = compare_editions(&views, &IdentityMap::default(), 4).unwrap();
        assert_eq!(c.pairs[0].spearman, Some(-1.0));
    }

    #[test]
    fn needs_two_editions() {
        let p = people(&["A"]);
        let r = ranking("en", &[0]);
        let views = [EditionView {
            ranking: &r,
            people: &p,
            culture: "x",
        }];
        assert_eq!(
            compare_editions(&views, &IdentityMap::default(), 1),
            Err(ReportError::TooFewEditions(1))
        );
    }

    #[test]
    fn identity_map_reads_jsonl() {
        let text = r#"{"edition":"zh","title":"毛泽东","key":"Mao Zedong"}"#;
        let m = IdentityMap::read(text.as_bytes()).unwrap();
        assert_eq!(m.key("zh", "毛泽东"), "Mao Zedong");
        assert_eq!(m.key("en", "Mao Zedong"), "Mao Zedong");
        assert!(IdentityMap::read("{".as_bytes()).is_err());
    }

    #[test]
    fn table_alignment() {
        let t = format_table(&["a", "bb"], &[vec!["xyz".into(), "1".into()]]);
        assert_eq!(t, "a    bb\nxyz  1\n");
    }
}
