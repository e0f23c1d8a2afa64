//! Synthetic corpora and brute-force reference implementations.
//!
//! Everything here recomputes results the slow, obvious way so tests can
//! compare the indexed and iterative code paths against it.

use std::collections::BTreeSet;

use chronograph_core::person::{Horizon, Occupation, Person, PersonId, Year};
use chronograph_core::temporal::YearSlice;
use chronograph_core::Corpus;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn person(id: usize, title: String, birth: Year, death: Year) -> Person {
    Person {
        id: id as PersonId,
        title,
        birth,
        death,
        occupation: Occupation::Other,
        culture: "unknown".into(),
    }
}

/// Random corpus with lifespans spread over `horizon`.
///
/// Roughly `local_fraction` of the links target a person born close in time
/// to the source, so many survive the contemporaneity filter. Draws repeat
/// until `links` distinct links exist or `20 * links` attempts are spent.
pub fn synthetic_corpus(
    seed: u64,
    horizon: Horizon,
    persons: usize,
    links: usize,
    max_lifespan: i32,
    local_fraction: f64,
) -> Corpus {
    let mut rng = rng(seed);
    let people: Vec<Person> = (0..persons)
        .map(|i| {
            let birth = rng.gen_range(horizon.start()..=horizon.end());
            let death = (birth + rng.gen_range(0..=max_lifespan)).min(horizon.end());
            person(i, format!("Person {i:05}"), birth, death)
        })
        .collect();
    let mut by_birth: Vec<usize> = (0..persons).collect();
    by_birth.sort_by_key(|&i| (people[i].birth, i));
    let window = 40usize;

    let mut set = BTreeSet::new();
    if persons > 1 {
        for _ in 0..links.saturating_mul(20) {
            if set.len() == links {
                break;
            }
            let rank = rng.gen_range(0..persons);
            let src = by_birth[rank];
            let dst = if rng.gen_bool(local_fraction) {
                let lo = rank.saturating_sub(window);
                let hi = (rank + window).min(persons - 1);
                by_birth[rng.gen_range(lo..=hi)]
            } else {
                rng.gen_range(0..persons)
            };
            if src != dst {
                set.insert((src as PersonId, dst as PersonId));
            }
        }
    }
    Corpus::from_parts("en", horizon, people, set.into_iter().collect())
        .expect("valid synthetic corpus")
}

/// The year network computed by filtering every person and link.
pub fn brute_slice(corpus: &Corpus, year: Year) -> YearSlice {
    let alive = |id: PersonId| corpus.persons[id as usize].is_alive(year);
    YearSlice {
        year,
        nodes: corpus
            .persons
            .iter()
            .filter(|p| p.is_alive(year))
            .map(|p| p.id)
            .collect(),
        edges: corpus
            .links
            .iter()
            .copied()
            .filter(|&(s, d)| alive(s) && alive(d))
            .collect(),
    }
}

pub fn brute_nonempty_years(corpus: &Corpus) -> usize {
    corpus
        .horizon
        .years()
        .filter(|&y| corpus.persons.iter().any(|p| p.is_alive(y)))
        .count()
}

/// PageRank from the explicit Google matrix, iterated far past convergence.
///
/// `edges` use local indices `0..n`. Columns of nodes without out-links are
/// uniform.
pub fn dense_pagerank(n: usize, edges: &[(usize, usize)], damping: f64) -> Vec<f64> {
    let mut out = vec![0usize; n];
    for &(s, _) in edges {
        out[s] += 1;
    }
    let teleport = (1.0 - damping) / n as f64;
    let mut google = vec![vec![teleport; n]; n];
    for (j, &o) in out.iter().enumerate() {
        if o == 0 {
            for row in google.iter_mut() {
                row[j] += damping / n as f64;
            }
        }
    }
    for &(s, d) in edges {
        google[d][s] += damping / out[s] as f64;
    }
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..600 {
        x = google
            .iter()
            .map(|row| row.iter().zip(&x).map(|(g, v)| g * v).sum())
            .collect();
    }
    x
}

/// Random directed graph on `n` nodes with sparse, non-contiguous ids.
///
/// Roughly a third of the nodes end up dangling and the graph is usually
/// disconnected.
pub fn random_slice(rng: &mut impl Rng, n: usize) -> YearSlice {
    let mut ids = BTreeSet::new();
    while ids.len() < n {
        ids.insert(rng.gen_range(0..10_000u32));
    }
    let nodes: Vec<PersonId> = ids.into_iter().collect();
    let sinks: BTreeSet<usize> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
    let p = rng.gen_range(0.02..0.3);
    let mut edges = Vec::new();
    for s in 0..n {
        if sinks.contains(&s) {
            continue;
        }
        for d in 0..n {
            if s != d && rng.gen_bool(p) {
                edges.push((nodes[s], nodes[d]));
            }
        }
    }
    YearSlice::new(0, nodes, edges)
}

/// Local-index edge list of a slice, for [`dense_pagerank`].
pub fn local_edges(slice: &YearSlice) -> Vec<(usize, usize)> {
    let pos = |id| {
        slice
            .nodes
            .iter()
            .position(|&n| n == id)
            .expect("edge endpoint in slice")
    };
    slice.edges.iter().map(|&(s, d)| (pos(s), pos(d))).collect()
}

/// Occupation and ingroup counts of one leaderboard column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Column {
    pub politician: usize,
    pub religious: usize,
    pub artist_scientist: usize,
    pub ingroup: usize,
}

pub const ENGLISH: Column = Column {
    politician: 26,
    religious: 11,
    artist_scientist: 13,
    ingroup: 10,
};
pub const CHINESE: Column = Column {
    politician: 46,
    religious: 1,
    artist_scientist: 3,
    ingroup: 48,
};
pub const JAPANESE: Column = Column {
    politician: 47,
    religious: 0,
    artist_scientist: 3,
    ingroup: 31,
};
pub const GERMAN: Column = Column {
    politician: 23,
    religious: 5,
    artist_scientist: 22,
    ingroup: 31,
};

/// A corpus whose all-time top 50 carries exactly `column`'s tags.
///
/// Fifty leaders live across the whole horizon and receive links from short
/// lived followers, who are tagged `other` with an outgroup culture and can
/// never accumulate enough yearly PageRank to enter the top 50.
pub fn leaderboard_corpus(
    edition: &str,
    culture: &str,
    column: Column,
    horizon: Horizon,
) -> Corpus {
    const LEADERS: usize = 50;
    let mut people = Vec::new();
    for i in 0..LEADERS {
        let mut p = person(i, format!("Leader {i:02}"), horizon.start(), horizon.end());
        p.occupation = if i < column.politician {
            Occupation::Politician
        } else if i < column.politician + column.religious {
            Occupation::Religious
        } else if i < column.politician + column.religious + column.artist_scientist {
            Occupation::ArtistScientist
        } else {
            Occupation::Other
        };
        // Spread ingroup members across occupations.
        p.culture = if (i * 7) % LEADERS < column.ingroup {
            culture.to_owned()
        } else {
            "outgroup".to_owned()
        };
        people.push(p);
    }
    let followers = 60;
    let span = horizon.len() as i64;
    let mut links = Vec::new();
    for f in 0..followers {
        let id = LEADERS + f;
        let birth = horizon.start() + (span * f as i64 / followers as i64) as i32;
        let death = (birth + 20).min(horizon.end());
        let mut p = person(id, format!("Follower {f:02}"), birth, death);
        p.culture = "outgroup".into();
        people.push(p);
        for l in 0..LEADERS {
            if (l + f) % 3 != 0 {
                links.push((id as PersonId, l as PersonId));
            }
        }
    }
    Corpus::from_parts(edition, horizon, people, links).expect("valid leaderboard corpus")
}

/// Five people around the turn of the era; "Jesus" (id 2) is born in year 1.
pub fn turn_of_era_corpus() -> Corpus {
    let spec: [(&str, Year, Year, Occupation, &str); 5] = [
        ("Augustus", -62, 14, Occupation::Politician, "roman"),
        ("Herod the Great", -72, -3, Occupation::Politician, "judean"),
        ("Jesus", 1, 33, Occupation::Religious, "levantine"),
        (
            "John the Baptist",
            -5,
            30,
            Occupation::Religious,
            "levantine",
        ),
        ("Tiberius", -41, 37, Occupation::Politician, "roman"),
    ];
    let people = spec
        .iter()
        .enumerate()
        .map(|(i, &(title, birth, death, occupation, culture))| Person {
            id: i as PersonId,
            title: title.into(),
            birth,
            death,
            occupation,
            culture: culture.into(),
        })
        .collect();
    let links = vec![
        (2, 3),
        (3, 2),
        (2, 4),
        (1, 0),
        (4, 0),
        (3, 1),
        (2, 1),
        (3, 4),
    ];
    Corpus::from_parts("en", Horizon::DEFAULT, people, links).expect("valid fixture")
}

/// Peak resident set size of this process in bytes, from `/proc`.
pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}
