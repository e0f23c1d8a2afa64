//! Static centered interval tree for year stabbing queries.

use crate::person::Year;

#[derive(Debug, Clone)]
struct Node {
    center: Year,
    left: Option<usize>,
    right: Option<usize>,
    /// Range into `by_start` / `by_end` for the intervals containing `center`.
    lo: usize,
    hi: usize,
}

/// Answers "which intervals contain year y" in `O(log n + output)`.
///
/// Intervals are closed and identified by their position in the slice the
/// index was built from.
#[derive(Debug, Clone, Default)]
pub struct IntervalIndex {
    intervals: Vec<(Year, Year)>,
    nodes: Vec<Node>,
    root: Option<usize>,
    /// Per node, intervals ascending by start.
    by_start: Vec<u32>,
    /// Per node, the same intervals descending by end.
    by_end: Vec<u32>,
}

impl IntervalIndex {
    pub fn new(intervals: Vec<(Year, Year)>) -> Self {
        debug_assert!(intervals.iter().all(|&(s, e)| s <= e));
        let mut index = IntervalIndex {
            nodes: Vec::new(),
            root: None,
            by_start: Vec::with_capacity(intervals.len()),
            by_end: Vec::with_capacity(intervals.len()),
            intervals,
        };
        let all: Vec<u32> = (0..index.intervals.len() as u32).collect();
        index.root = index.build(all);
        index
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    fn build(&mut self, items: Vec<u32>) -> Option<usize> {
        if items.is_empty() {
            return None;
        }
        let mut endpoints: Vec<Year> = items
            .iter()
            .flat_map(|&i| {
                let (s, e) = self.intervals[i as usize];
                [s, e]
            })
            .collect();
        let mid = endpoints.len() / 2;
        let center = *endpoints.select_nth_unstable(mid).1;

        let (mut left, mut right, mut here) = (Vec::new(), Vec::new(), Vec::new());
        for i in items {
            let (s, e) = self.intervals[i as usize];
            if e < center {
                left.push(i);
            } else if s > center {
                right.push(i);
            } else {
                here.push(i);
            }
        }

        let lo = self.by_start.len();
        here.sort_unstable_by_key(|&i| (self.intervals[i as usize].0, i));
        self.by_start.extend_from_slice(&here);
        here.sort_unstable_by_key(|&i| (std::cmp::Reverse(self.intervals[i as usize].1), i));
        self.by_end.extend_from_slice(&here);
        let hi = self.by_start.len();

        let node = self.nodes.len();
        self.nodes.push(Node {
            center,
            left: None,
            right: None,
            lo,
            hi,
        });
        let l = self.build(left);
        let r = self.build(right);
        self.nodes[node].left = l;
        self.nodes[node].right = r;
        Some(node)
    }

    /// Appends the ids of every interval containing `year` to `out`, in no
    /// particular order.
    pub fn stab(&self, year: Year, out: &mut Vec<u32>) {
        let mut cursor = self.root;
        while let Some(n) = cursor {
            let node = &self.nodes[n];
            let (lo, hi) = (node.lo, node.hi);
            if year < node.center {
                for &i in &self.by_start[lo..hi] {
                    if self.intervals[i as usize].0 > year {
                        break;
                    }
                    out.push(i);
                }
                cursor = node.left;
            } else if year > node.center {
                for &i in &self.by_end[lo..hi] {
                    if self.intervals[i as usize].1 < year {
                        break;
                    }
                    out.push(i);
                }
                cursor = node.right;
            } else {
                out.extend_from_slice(&self.by_start[lo..hi]);
                cursor = None;
            }
        }
    }
}
