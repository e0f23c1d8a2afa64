//! Birth and death years from `N births` / `N BC deaths` style categories.

use crate::person::Year;

/// Result of dating a page from its categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dating {
    pub birth: Year,
    /// `None` means no death category: the person is alive at the horizon end.
    pub death: Option<Year>,
    /// Number of surplus birth or death categories that were merged away.
    pub conflicts: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Event {
    Birth,
    Death,
}

fn parse_category(category: &str) -> Option<(Event, Year)> {
    let category = category.trim();
    let (rest, event) = if let Some(rest) = category.strip_suffix(" births") {
        (rest, Event::Birth)
    } else {
        let rest = category.strip_suffix(" deaths")?;
        (rest, Event::Death)
    };
    let (digits, bc) = match rest.strip_suffix(" BC") {
        Some(digits) => (digits, true),
        None => (rest, false),
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let n: i32 = digits.parse().ok()?;
    if n == 0 {
        return None;
    }
    Some((event, if bc { 1 - n } else { n }))
}

/// Dates a page from its category list.
///
/// `N BC` maps to astronomical year `1 - N`. Several birth categories resolve
/// to the earliest, several death categories to the latest. Returns `None`
/// when no birth category is present.
pub fn extract_dates<S: AsRef<str>>(categories: &[S]) -> Option<Dating> {
    let mut birth: Option<Year> = None;
    let mut death: Option<Year> = None;
    let mut conflicts = 0;
    for (event, year) in categories.iter().filter_map(|c| parse_category(c.as_ref())) {
        let slot = match event {
            Event::Birth => &mut birth,
            Event::Death => &mut death,
        };
        *slot = Some(match *slot {
            None => year,
            Some(prev) => {
                conflicts += 1;
                match event {
                    Event::Birth => prev.min(year),
                    Event::Death => prev.max(year),
                }
            }
        });
    }
    Some(Dating {
        birth: birth?,
        death,
        conflicts,
    })
}
