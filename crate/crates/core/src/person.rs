//! People, lifespans and the year horizon.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Dense person identifier, assigned in lexicographic title order.
pub type PersonId = u32;

/// Astronomical year: year 0 is 1 BC, year -1 is 2 BC.
pub type Year = i32;

/// Inclusive range of years over which networks are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "[Year; 2]", try_from = "[Year; 2]")]
pub struct Horizon {
    start: Year,
    end: Year,
}

impl Horizon {
    /// 3000 BC through 1950 CE.
    pub const DEFAULT: Horizon = Horizon {
        start: -3000,
        end: 1950,
    };

    pub fn new(start: Year, end: Year) -> Result<Self, HorizonError> {
        if start > end {
            return Err(HorizonError { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> Year {
        self.start
    }

    pub fn end(&self) -> Year {
        self.end
    }

    pub fn contains(&self, year: Year) -> bool {
        self.start <= year && year <= self.end
    }

    pub fn contains_horizon(&self, other: &Horizon) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// Number of years in the range, both ends included.
    pub fn len(&self) -> usize {
        (i64::from(self.end) - i64::from(self.start) + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn years(&self) -> std::ops::RangeInclusive<Year> {
        self.start..=self.end
    }
}

impl Default for Horizon {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

impl From<Horizon> for [Year; 2] {
    fn from(h: Horizon) -> Self {
        [h.start, h.end]
    }
}

impl TryFrom<[Year; 2]> for Horizon {
    type Error = HorizonError;

    fn try_from([start, end]: [Year; 2]) -> Result<Self, Self::Error> {
        Horizon::new(start, end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid horizon: start {start} is after end {end}")]
pub struct HorizonError {
    pub start: Year,
    pub end: Year,
}

/// Occupation tag used by the category reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Occupation {
    Politician,
    Religious,
    ArtistScientist,
    Other,
}

impl Occupation {
    pub const ALL: [Occupation; 4] = [
        Occupation::Politician,
        Occupation::Religious,
        Occupation::ArtistScientist,
        Occupation::Other,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Occupation::Politician => "politician",
            Occupation::Religious => "religious",
            Occupation::ArtistScientist => "artist_scientist",
            Occupation::Other => "other",
        }
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown occupation tag {0:?}")]
pub struct UnknownOccupation(pub String);

impl FromStr for Occupation {
    type Err = UnknownOccupation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "politician" => Ok(Occupation::Politician),
            "religious" => Ok(Occupation::Religious),
            "artist_scientist" => Ok(Occupation::ArtistScientist),
            "other" => Ok(Occupation::Other),
            _ => Err(UnknownOccupation(s.to_owned())),
        }
    }
}

/// Culture tag assigned to persons that carry no annotation.
pub const UNKNOWN_CULTURE: &str = "unknown";

/// The culture an edition counts as its ingroup.
///
/// Editions without a built-in mapping use their language code as the tag.
pub fn edition_culture(edition: &str) -> String {
    match edition {
        "en" => "anglo",
        "zh" => "sinic",
        "ja" => "japonic",
        "de" => "germanic",
        other => other,
    }
    .to_owned()
}

/// A dated people page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Person {
    pub id: PersonId,
    pub title: String,
    pub birth: Year,
    pub death: Year,
    pub occupation: Occupation,
    pub culture: String,
}

impl Person {
    pub fn is_alive(&self, year: Year) -> bool {
        self.birth <= year && year <= self.death
    }
}
