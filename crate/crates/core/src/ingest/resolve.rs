//! Turns raw pages into a dated, deduplicated corpus.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::annotations::Annotations;
use super::dates::extract_dates;
use super::dump::RawPage;
use crate::corpus::{Corpus, CorpusStats};
use crate::person::{Horizon, Occupation, Person, PersonId, Year, UNKNOWN_CULTURE};

/// Longest redirect chain that is followed.
pub const MAX_REDIRECT_DEPTH: usize = 16;

#[derive(Debug, Clone)]
pub struct ResolveOptions<'a> {
    pub edition: String,
    pub horizon: Horizon,
    pub annotations: Option<&'a Annotations>,
}

#[derive(Debug, thiserror::Error)]
pub enum ResolveError {
    #[error("duplicate page titles: {}", .0.join(", "))]
    DuplicateTitles(Vec<String>),
    #[error("empty corpus: no dated persons within horizon")]
    Empty,
}

struct Dated<'p> {
    birth: Year,
    death: Year,
    links: &'p [String],
}

/// Resolves redirects, dates pages and assigns ids in title order.
pub fn resolve(pages: &[RawPage], options: &ResolveOptions<'_>) -> Result<Corpus, ResolveError> {
    let horizon = options.horizon;
    let mut stats = CorpusStats {
        pages_seen: pages.len() as u64,
        ..CorpusStats::default()
    };

    let mut seen = HashSet::with_capacity(pages.len());
    let collisions: BTreeSet<&str> = pages
        .iter()
        .filter(|p| !seen.insert(p.title.as_str()))
        .map(|p| p.title.as_str())
        .collect();
    if !collisions.is_empty() {
        return Err(ResolveError::DuplicateTitles(
            collisions.into_iter().map(str::to_owned).collect(),
        ));
    }

    let mut redirects: HashMap<&str, &str> = HashMap::new();
    let mut dated: BTreeMap<&str, Dated<'_>> = BTreeMap::new();
    for page in pages {
        if let Some(target) = &page.redirect_target {
            stats.redirects += 1;
            redirects.insert(&page.title, target);
            continue;
        }
        let Some(dating) = extract_dates(&page.categories) else {
            stats.undated += 1;
            continue;
        };
        stats.date_conflicts += u64::from(dating.conflicts);
        if dating.death.is_some_and(|d| d < dating.birth) {
            stats.inconsistent_dates += 1;
            continue;
        }
        let death = dating.death.unwrap_or(horizon.end());
        if dating.birth > horizon.end() || death < horizon.start() {
            stats.out_of_horizon += 1;
            continue;
        }
        dated.insert(
            &page.title,
            Dated {
                birth: dating.birth.max(horizon.start()),
                death: death.min(horizon.end()),
                links: &page.wikilinks,
            },
        );
    }
    if dated.is_empty() {
        return Err(ResolveError::Empty);
    }

    let ids: HashMap<&str, PersonId> = dated
        .keys()
        .enumerate()
        .map(|(i, &t)| (t, i as PersonId))
        .collect();

    let follow = |start: &str| -> Option<PersonId> {
        let mut current = start;
        for _ in 0..=MAX_REDIRECT_DEPTH {
            match redirects.get(current) {
                Some(next) => current = next,
                None => return ids.get(current).copied(),
            }
        }
        None
    };

    let mut persons = Vec::with_capacity(dated.len());
    let mut links = Vec::new();
    for (id, (&title, d)) in dated.iter().enumerate() {
        let id = id as PersonId;
        let mut targets = BTreeSet::new();
        for link in d.links {
            match follow(link) {
                None => stats.dangling_links += 1,
                Some(dst) if dst == id => stats.self_links += 1,
                Some(dst) => {
                    if !targets.insert(dst) {
                        stats.duplicate_links += 1;
                    }
                }
            }
        }
        links.extend(targets.into_iter().map(|dst| (id, dst)));

        let (occupation, culture) = match options.annotations.and_then(|a| a.get(title)) {
            Some(a) => (a.occupation, a.culture.clone()),
            None => (Occupation::Other, UNKNOWN_CULTURE.to_owned()),
        };
        persons.push(Person {
            id,
            title: title.to_owned(),
            birth: d.birth,
            death: d.death,
            occupation,
            culture,
        });
    }
    stats.unknown_occupations = options.annotations.map_or(0, |a| a.unknown_occupations);

    Ok(Corpus {
        edition: options.edition.clone(),
        horizon,
        persons,
        links,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn person(title: &str, cats: &[&str], links: &[&str]) -> RawPage {
        RawPage {
            title: title.into(),
            redirect_target: None,
            wikilinks: links.iter().map(|s| s.to_string()).collect(),
            categories: cats.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn redirect(title: &str, target: &str) -> RawPage {
        RawPage {
            title: title.into(),
            redirect_target: Some(target.into()),
            wikilinks: vec![],
            categories: vec![],
        }
    }

    fn opts() -> ResolveOptions<'static> {
        ResolveOptions {
            edition: "en".into(),
            horizon: Horizon::DEFAULT,
            annotations: None,
        }
    }

    const DATED: &[&str] = &["46 births", "120 deaths"];

    #[test]
    fn redirects_resolve() {
        let pages = [
            person("A", DATED, &["B redirect"]),
            redirect("B redirect", "B"),
            person("B", DATED, &[]),
        ];
        let c = resolve(&pages, &opts()).unwrap();
        assert_eq!(c.links, [(0, 1)]);
        assert_eq!(c.stats.redirects, 1);
    }

    #[test]
    fn self_links_dropped() {
        let c = resolve(&[person("A", DATED, &["A"])], &opts()).unwrap();
        assert!(c.links.is_empty());
        assert_eq!(c.stats.self_links, 1);
    }

    #[test]
    fn undated_targets_are_dangling() {
        let c = resolve(
            &[person("A", DATED, &["X"]), person("X", &[], &[])],
            &opts(),
        )
        .unwrap();
        assert!(c.links.is_empty());
        assert_eq!(c.stats.dangling_links, 1);
        assert_eq!(c.stats.undated, 1);
        assert_eq!(c.persons.len(), 1);
    }

    #[test]
    fn redirect_cycles_and_long_chains_are_dangling() {
        let mut pages = vec![
            person("A", DATED, &["Loop1", "R0"]),
            redirect("Loop1", "Loop2"),
            redirect("Loop2", "Loop1"),
        ];
        for i in 0..20 {
            pages.push(redirect(&format!("R{i}"), &format!("R{}", i + 1)));
        }
        pages.push(person("R20", DATED, &[]));
        let c = resolve(&pages, &opts()).unwrap();
        assert!(c.links.is_empty());
        assert_eq!(c.stats.dangling_links, 2);
    }

    #[test]
    fn redirect_chain_within_cap_resolves() {
        let mut pages = vec![person("A", DATED, &["R0"])];
        for i in 0..MAX_REDIRECT_DEPTH - 1 {
            pages.push(redirect(&format!("R{i}"), &format!("R{}", i + 1)));
        }
        pages.push(redirect(&format!("R{}", MAX_REDIRECT_DEPTH - 1), "Z"));
        pages.push(person("Z", DATED, &[]));
        let c = resolve(&pages, &opts()).unwrap();
        assert_eq!(c.links, [(0, 1)]);
    }

    #[test]
    fn duplicates_collapse_and_ids_follow_title_order() {
        let pages = [
            person("Zeno", DATED, &["Aristo", "Aristo", "Aristo alias"]),
            redirect("Aristo alias", "Aristo"),
            person("Aristo", DATED, &[]),
        ];
        let c = resolve(&pages, &opts()).unwrap();
        assert_eq!(c.persons[0].title, "Aristo");
        assert_eq!(c.persons[1].title, "Zeno");
        assert_eq!(c.links, [(1, 0)]);
        assert_eq!(c.stats.duplicate_links, 2);
    }

    #[test]
    fn horizon_filtering_and_clamping() {
        let pages = [
            person("Ancient", &["3500 BC births", "2990 BC deaths"], &[]),
            person("Too old", &["4000 BC births", "3500 BC deaths"], &[]),
            person("Future", &["1990 births"], &[]),
            person("Alive", &["1946 births"], &[]),
            person("Backwards", &["50 births", "10 deaths"], &[]),
        ];
        let c = resolve(&pages, &opts()).unwrap();
        let spans: Vec<_> = c
            .persons
            .iter()
            .map(|p| (p.title.as_str(), p.birth, p.death))
            .collect();
        assert_eq!(spans, [("Alive", 1946, 1950), ("Ancient", -3000, -2989)]);
        assert_eq!(c.stats.out_of_horizon, 2);
        assert_eq!(c.stats.inconsistent_dates, 1);
    }

    #[test]
    fn duplicate_titles_are_listed() {
        let pages = [
            person("A", DATED, &[]),
            person("B", DATED, &[]),
            redirect("A", "B"),
        ];
        match resolve(&pages, &opts()) {
            Err(ResolveError::DuplicateTitles(t)) => assert_eq!(t, ["A"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_after_filtering() {
        let pages = [person("X", &[], &[])];
        assert!(matches!(resolve(&pages, &opts()), Err(ResolveError::Empty)));
    }

    #[test]
    fn annotations_apply() {
        let mut ann = Annotations::default();
        ann.insert(
            "A",
            super::super::annotations::Annotation {
                occupation: Occupation::Religious,
                culture: "levantine".into(),
            },
        );
        let o = ResolveOptions {
            annotations: Some(&ann),
            ..opts()
        };
        let c = resolve(&[person("A", DATED, &[]), person("B", DATED, &[])], &o).unwrap();
        assert_eq!(c.persons[0].occupation, Occupation::Religious);
        assert_eq!(c.persons[0].culture, "levantine");
        assert_eq!(c.persons[1].occupation, Occupation::Other);
        assert_eq!(c.persons[1].culture, UNKNOWN_CULTURE);
    }

    #[test]
    fn resolved_corpus_is_valid() {
        let pages = [
            person("A", DATED, &["B", "C", "A", "Missing"]),
            person("B", &["100 BC births", "44 BC deaths"], &["A"]),
            person("C", &["1 births"], &["B"]),
        ];
        let c = resolve(&pages, &opts()).unwrap();
        c.validate().unwrap();
    }
}
