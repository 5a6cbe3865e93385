//! Candidate extensions of a rule. Every gap slot of the rule's best windows
//! is scanned for events occurring there more often than their background
//! rate predicts; each significant (slot, event) pair yields one candidate.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::types::{Event, Rule, SearchParams, SequenceDatabase};
use crate::windows::{match_positions, RuleOccurrences, RuleWindow};

/// Insertion point of a new event: `Head(q)` inserts before head index `q`,
/// `Tail(q)` before tail index `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Head(usize),
    Tail(usize),
}

impl Slot {
    /// All slots of a rule: `h_0..h_|head|` followed by `t_0..t_|tail|`.
    pub fn all(rule: &Rule) -> Vec<Slot> {
        (0..=rule.head().len()).map(Slot::Head).chain((0..=rule.tail().len()).map(Slot::Tail)).collect()
    }

    /// Position of the slot in [`Slot::all`].
    pub fn index(self, rule: &Rule) -> usize {
        match self {
            Slot::Head(q) => q,
            Slot::Tail(q) => rule.head().len() + 1 + q,
        }
    }

    /// The rule obtained by inserting `event` at this slot.
    pub fn apply(self, rule: &Rule, event: Event) -> Rule {
        match self {
            Slot::Head(q) => Rule::new(rule.head().with_inserted(q, event), rule.tail().clone()),
            Slot::Tail(q) => Rule::new(rule.head().clone(), rule.tail().with_inserted(q, event)),
        }
        .expect("tail stays non-empty")
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Head(q) => write!(f, "h{q}"),
            Slot::Tail(q) => write!(f, "t{q}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub rule: Rule,
    pub parent: Rule,
    pub slot: Slot,
    pub inserted: Event,
    /// Normal-approximation tail probability; 0 or 1 when the small-sample
    /// rule decided.
    pub p_value: f64,
    /// Whether the normal approximation was used.
    pub large_sample: bool,
}

/// 1-based positions where an event inserted at `slot` would have to occur
/// for `window` to extend.
pub fn gap_region(
    db: &SequenceDatabase,
    rule: &Rule,
    window: &RuleWindow,
    slot: Slot,
    params: &SearchParams,
) -> Vec<usize> {
    let seq = db.sequence(window.seq);
    let reach = libm::ceil(params.max_gap) as usize + 1;
    let before = |at: usize| at.saturating_sub(reach).max(1)..at;
    let between = |a: usize, b: usize| (a + 1)..b;
    let head_len = rule.head().len();
    let tail_len = rule.tail().len();
    let positions = match (slot, window.head) {
        (Slot::Head(0), _) => before(window.start()),
        (Slot::Tail(0), None) => before(window.k),
        (Slot::Tail(0), Some((_, j))) => between(j, window.k),
        (Slot::Head(q), Some((_, j))) if q == head_len => between(j, window.k),
        (Slot::Head(q), Some((i, j))) => {
            let matched = match_positions(rule.head(), seq, i, j).expect("trigger matches its head");
            between(matched[q - 1], matched[q])
        }
        (Slot::Head(_), None) => 0..0,
        (Slot::Tail(q), _) if q == tail_len => (window.l + 1)..(window.l + reach + 1).min(seq.len() + 1),
        (Slot::Tail(q), _) => between(window.tail_positions[q - 1], window.tail_positions[q]),
    };
    positions.collect()
}

/// Probability that an event with `frequency` occurrences among
/// `total_events` shows up at least once in a region of `region_len` positions.
pub fn occurrence_probability(frequency: usize, region_len: usize, total_events: usize) -> f64 {
    assert!(frequency <= total_events, "event frequency exceeds database size");
    if region_len == 0 || frequency == 0 {
        return 0.0;
    }
    let rate = frequency as f64 / total_events as f64;
    1.0 - libm::pow(1.0 - rate, region_len as f64)
}

/// Windows above which the normal approximation is used.
pub const SMALL_SAMPLE_LIMIT: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Significance {
    pub significant: bool,
    pub p_value: f64,
    pub large_sample: bool,
}

/// Tests whether `count` successes are unusually many for independent trials
/// with success probabilities `probs`.
pub fn significance_test(count: usize, probs: &[f64], alpha: f64) -> Significance {
    let mean: f64 = probs.iter().sum();
    let variance: f64 = probs.iter().map(|p| p * (1.0 - p)).sum();
    test_moments(count, probs.len(), mean, variance, alpha)
}

fn test_moments(count: usize, n: usize, mean: f64, variance: f64, alpha: f64) -> Significance {
    let count = count as f64;
    if n <= SMALL_SAMPLE_LIMIT {
        let significant = count > mean + 1.0;
        return Significance { significant, p_value: if significant { 0.0 } else { 1.0 }, large_sample: false };
    }
    if variance <= 0.0 {
        let significant = count > mean;
        return Significance { significant, p_value: if significant { 0.0 } else { 1.0 }, large_sample: true };
    }
    let z = (count - 0.5 - mean) / libm::sqrt(variance);
    let p_value = 0.5 * libm::erfc(z / core::f64::consts::SQRT_2);
    Significance { significant: p_value < alpha, p_value, large_sample: true }
}

/// Significant single-event extensions of a rule, ordered by p-value, then
/// slot, then event. Extensions reachable from several slots are kept once,
/// at their first position in that order.
pub fn cand_rules(db: &SequenceDatabase, occ: &RuleOccurrences, params: &SearchParams) -> Vec<Candidate> {
    let rule = occ.rule();
    let windows = occ.best_windows();
    if windows.is_empty() {
        return Vec::new();
    }
    let freq = db.event_frequencies();
    let total = db.total_events();
    let mut out: Vec<(Candidate, usize)> = Vec::new();
    let mut seen_in_window: Vec<Event> = Vec::new();

    for slot in Slot::all(rule) {
        let mut counts: BTreeMap<Event, usize> = BTreeMap::new();
        let mut lengths: BTreeMap<usize, usize> = BTreeMap::new();
        for w in windows {
            let region = gap_region(db, rule, w, slot, params);
            *lengths.entry(region.len()).or_insert(0) += 1;
            let seq = db.sequence(w.seq);
            seen_in_window.clear();
            seen_in_window.extend(region.iter().map(|&p| seq.at(p)));
            seen_in_window.sort_unstable();
            seen_in_window.dedup();
            for &e in &seen_in_window {
                *counts.entry(e).or_insert(0) += 1;
            }
        }
        for (&e, &count) in &counts {
            let (mut mean, mut variance) = (0.0, 0.0);
            for (&len, &times) in &lengths {
                let p = occurrence_probability(freq[e.index()], len, total);
                mean += times as f64 * p;
                variance += times as f64 * p * (1.0 - p);
            }
            let sig = test_moments(count, windows.len(), mean, variance, params.alpha);
            if sig.significant {
                let candidate = Candidate {
                    rule: slot.apply(rule, e),
                    parent: rule.clone(),
                    slot,
                    inserted: e,
                    p_value: sig.p_value,
                    large_sample: sig.large_sample,
                };
                out.push((candidate, slot.index(rule)));
            }
        }
    }
    out.sort_by(|(a, sa), (b, sb)| {
        a.p_value
            .partial_cmp(&b.p_value)
            .unwrap_or(Ordering::Equal)
            .then(sa.cmp(sb))
            .then(a.inserted.cmp(&b.inserted))
    });
    let mut kept = BTreeSet::new();
    out.into_iter().map(|(c, _)| c).filter(|c| kept.insert(c.rule.clone())).collect()
}
