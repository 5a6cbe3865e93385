//! Greedy cover of a database by rule windows.
//!
//! Windows are consumed in window order: longer tails first, then higher
//! confidence, higher support, smaller combined delay and gap count, and
//! earlier tail start. A window is selected unless one of its matched tail
//! positions is already covered, in which case the next best window for the
//! same trigger is queued instead.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use crate::error::{Error, Result};
use crate::ruleset::RuleSet;
use crate::types::{SearchParams, SequenceDatabase};
use crate::windows::{OccurrenceCache, RuleOccurrences, RuleStats, RuleWindow};

/// Sort key of a rule window; smaller keys are selected first.
#[derive(Clone, Copy, Debug)]
pub struct WindowOrderKey {
    pub tail_len: usize,
    pub confidence: f64,
    pub support: usize,
    /// `l - j - |tail|`, or the tail gap count for empty-head rules.
    pub slack: usize,
    pub k: usize,
    pub seq: usize,
    pub start: usize,
    pub rule: usize,
}

impl PartialEq for WindowOrderKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for WindowOrderKey {}

impl PartialOrd for WindowOrderKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for WindowOrderKey {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .tail_len
            .cmp(&self.tail_len)
            .then_with(|| other.confidence.total_cmp(&self.confidence))
            .then_with(|| other.support.cmp(&self.support))
            .then_with(|| self.slack.cmp(&other.slack))
            .then_with(|| self.k.cmp(&other.k))
            .then_with(|| self.seq.cmp(&other.seq))
            .then_with(|| self.start.cmp(&other.start))
            .then_with(|| self.rule.cmp(&other.rule))
    }
}

pub fn window_order_key(window: &RuleWindow, stats: &RuleStats, tail_len: usize, rule: usize) -> WindowOrderKey {
    let slack = match window.head {
        Some((_, j)) => window.l - j - tail_len,
        None => window.tail_gaps(),
    };
    WindowOrderKey {
        tail_len,
        confidence: stats.confidence,
        support: stats.support,
        slack,
        k: window.k,
        seq: window.seq,
        start: window.start(),
        rule,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectedWindow {
    /// Canonical index of the rule in its rule set.
    pub rule: usize,
    pub window: RuleWindow,
}

const FREE: u32 = u32::MAX;

/// A set of rule windows covering every event exactly once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cover {
    windows: Vec<SelectedWindow>,
    usage: Vec<usize>,
    owner: Vec<Vec<u32>>,
}

impl Cover {
    fn empty(db: &SequenceDatabase, rule_count: usize) -> Self {
        Cover {
            windows: Vec::new(),
            usage: alloc::vec![0; rule_count],
            owner: db.sequences().iter().map(|s| alloc::vec![FREE; s.len()]).collect(),
        }
    }

    /// Builds a cover from explicit windows, checking that the windows are in
    /// range and cover every position exactly once.
    pub fn from_windows(db: &SequenceDatabase, rule_count: usize, windows: Vec<SelectedWindow>) -> Result<Self> {
        let mut cover = Cover::empty(db, rule_count);
        for w in windows {
            if w.rule >= rule_count || w.window.seq >= db.len() {
                return Err(Error::InexactCover(format!("window {:?} out of range", w)));
            }
            let len = db.sequence(w.window.seq).len();
            for &p in &w.window.tail_positions {
                if p == 0 || p > len {
                    return Err(Error::InexactCover(format!("position {p} outside sequence {}", w.window.seq)));
                }
                if cover.owner[w.window.seq][p - 1] != FREE {
                    return Err(Error::InexactCover(format!(
                        "position {p} of sequence {} covered twice",
                        w.window.seq
                    )));
                }
            }
            cover.select(w);
        }
        if let Some((s, p)) = cover.first_free() {
            return Err(Error::InexactCover(format!("position {p} of sequence {s} is not covered")));
        }
        Ok(cover)
    }

    fn select(&mut self, w: SelectedWindow) {
        let id = self.windows.len() as u32;
        for &p in &w.window.tail_positions {
            self.owner[w.window.seq][p - 1] = id;
        }
        self.usage[w.rule] += 1;
        self.windows.push(w);
    }

    fn first_free(&self) -> Option<(usize, usize)> {
        self.owner
            .iter()
            .enumerate()
            .find_map(|(s, o)| o.iter().position(|&w| w == FREE).map(|p| (s, p + 1)))
    }

    pub fn is_exact(&self) -> bool {
        self.first_free().is_none()
    }

    pub fn windows(&self) -> &[SelectedWindow] {
        &self.windows
    }

    /// Number of selected windows per canonical rule index.
    pub fn usage(&self) -> &[usize] {
        &self.usage
    }

    /// Index into [`Cover::windows`] of the window covering a 1-based position.
    pub fn owner(&self, seq: usize, pos: usize) -> Option<usize> {
        match self.owner[seq][pos - 1] {
            FREE => None,
            w => Some(w as usize),
        }
    }

    pub fn is_covered(&self, seq: usize, pos: usize) -> bool {
        self.owner[seq][pos - 1] != FREE
    }
}

/// Greedy cover of `db` by the windows of `rules`.
pub fn cover(db: &SequenceDatabase, rules: &RuleSet, params: &SearchParams) -> Cover {
    let occs = OccurrenceCache::new().for_rules(db, rules, params);
    cover_with(db, &occs, params)
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Source {
    Best(u32),
    Queued(u32),
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Entry {
    key: WindowOrderKey,
    rule: u32,
    source: Source,
}

/// Greedy cover using precomputed occurrences, one per rule in canonical order.
pub fn cover_with(db: &SequenceDatabase, occs: &[Arc<RuleOccurrences>], params: &SearchParams) -> Cover {
    let mut result = Cover::empty(db, occs.len());
    let mut initial: Vec<Entry> = Vec::with_capacity(occs.iter().map(|o| o.best_windows().len()).sum());
    for (r, occ) in occs.iter().enumerate() {
        let stats = occ.stats();
        let tail_len = occ.rule().tail().len();
        for (idx, w) in occ.best_windows().iter().enumerate() {
            initial.push(Entry {
                key: window_order_key(w, &stats, tail_len, r),
                rule: r as u32,
                source: Source::Best(idx as u32),
            });
        }
    }
    initial.sort_unstable();

    let total = db.total_events();
    let mut covered = 0usize;
    let mut queued: Vec<RuleWindow> = Vec::new();
    let mut heap: BinaryHeap<Reverse<Entry>> = BinaryHeap::new();
    let mut next_initial = 0usize;

    while covered < total {
        let take_heap = match (initial.get(next_initial), heap.peek()) {
            (Some(a), Some(Reverse(b))) => b < a,
            (None, Some(_)) => true,
            (Some(_), None) => false,
            (None, None) => break,
        };
        let entry = if take_heap {
            heap.pop().expect("peeked").0
        } else {
            next_initial += 1;
            initial[next_initial - 1]
        };
        let occ = &occs[entry.rule as usize];
        let window = match entry.source {
            Source::Best(i) => &occ.best_windows()[i as usize],
            Source::Queued(i) => &queued[i as usize],
        };
        let owner = &result.owner[window.seq];
        if window.tail_positions.iter().all(|&p| owner[p - 1] == FREE) {
            covered += window.tail_positions.len();
            let w = SelectedWindow { rule: entry.rule as usize, window: window.clone() };
            result.select(w);
        } else if let Some(next) = occ.next_best(db, window, params, |s, p| result.owner[s][p - 1] != FREE) {
            let key = window_order_key(&next, &occ.stats(), occ.rule().tail().len(), entry.rule as usize);
            queued.push(next);
            heap.push(Reverse(Entry { key, rule: entry.rule, source: Source::Queued(queued.len() as u32 - 1) }));
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Pattern, Rule};
    use alloc::vec;

    fn key(tail_len: usize, confidence: f64, support: usize, slack: usize, k: usize) -> WindowOrderKey {
        WindowOrderKey { tail_len, confidence, support, slack, k, seq: 0, start: 0, rule: 0 }
    }

    #[test]
    fn order_prefers_long_tails_then_small_slack() {
        assert!(key(3, 0.1, 1, 9, 9) < key(2, 1.0, 100, 0, 0));
        assert!(key(2, 1.0, 5, 0, 7) < key(2, 1.0, 5, 2, 1));
        let mut a = key(2, 1.0, 5, 0, 7);
        let mut b = a;
        a.seq = 0;
        a.start = 3;
        b.seq = 1;
        b.start = 1;
        assert!(a < b);
        b.seq = 0;
        assert!(b < a);
    }

    #[test]
    fn pattern_rule_covers_repeats() {
        let db = SequenceDatabase::from_ids(&[&[0, 1, 0, 1]]);
        let rules =
            RuleSet::with_rules(2, [Rule::pattern(Pattern::from_ids(&[0, 1])).unwrap()]).unwrap();
        let c = cover(&db, &rules, &SearchParams::default());
        assert!(c.is_exact());
        assert_eq!(c.usage(), &[0, 0, 2]);
    }

    #[test]
    fn singletons_cover_everything() {
        let db = SequenceDatabase::from_ids(&[&[0, 1, 2]]);
        let c = cover(&db, &RuleSet::singletons(3), &SearchParams::default());
        assert_eq!(c.usage(), &[1, 1, 1]);
        assert_eq!(c.windows().len(), 3);
    }

    #[test]
    fn conflicting_tail_falls_back_to_next_window() {
        // a b c d c d with -> c d and a b -> c d: both conf 1, supp 2 vs 1.
        let db = SequenceDatabase::from_ids(&[&[0, 1, 2, 3, 2, 3]]);
        let cd = Pattern::from_ids(&[2, 3]);
        let rules = RuleSet::with_rules(
            4,
            [Rule::pattern(cd.clone()).unwrap(), Rule::new(Pattern::from_ids(&[0, 1]), cd).unwrap()],
        )
        .unwrap();
        let c = cover(&db, &rules, &SearchParams::default());
        // the empty-head rule has the larger support and claims both c d
        // windows; the triggered rule finds no free tail
        assert_eq!(c.usage(), &[1, 1, 0, 0, 2, 0]);
    }

    #[test]
    fn from_windows_detects_gaps_and_overlaps() {
        let db = SequenceDatabase::from_ids(&[&[0, 1]]);
        let w = |rule: usize, k: usize| SelectedWindow {
            rule,
            window: RuleWindow { seq: 0, head: None, k, l: k, tail_positions: vec![k] },
        };
        assert!(Cover::from_windows(&db, 2, vec![w(0, 1), w(1, 2)]).is_ok());
        assert!(Cover::from_windows(&db, 2, vec![w(0, 1)]).is_err());
        assert!(Cover::from_windows(&db, 2, vec![w(0, 1), w(0, 1), w(1, 2)]).is_err());
    }
}
