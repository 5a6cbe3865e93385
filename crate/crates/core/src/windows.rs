//! Pattern matching over sequences: minimal windows, triggers, rule windows
//! and the support/confidence statistics derived from them.
//!
//! All positions are 1-based and inclusive. A window `(i, j)` of pattern `X`
//! is minimal when `X` is a subsequence of `S[i..=j]` but of no proper
//! sub-window. Rule windows pair a minimal head window (the trigger) with a
//! minimal tail window that starts after it.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::{Event, Rule, SearchParams, SequenceDatabase, WindowChoice};

/// Minimal windows of `pattern` in `seq` whose gap count is within
/// `max_gap * |pattern|`, left to right.
pub fn minimal_windows(pattern: &[Event], seq: &[Event], max_gap: f64) -> Result<Vec<(usize, usize)>> {
    if pattern.is_empty() {
        return Err(Error::EmptyPattern);
    }
    let params = SearchParams { max_gap, ..SearchParams::default() };
    Ok(minimal_windows_within(pattern, seq, params.gap_budget(pattern.len())))
}

/// Minimal windows with at most `gap_budget` gaps. `pattern` must be non-empty.
pub(crate) fn minimal_windows_within(pattern: &[Event], seq: &[Event], gap_budget: usize) -> Vec<(usize, usize)> {
    debug_assert!(!pattern.is_empty());
    let m = pattern.len();
    let max_len = m + gap_budget;
    let last = pattern[m - 1];
    let mut out = Vec::new();
    let mut last_start = 0usize;
    for end in 1..=seq.len() {
        if seq[end - 1] != last {
            continue;
        }
        // latest start such that the pattern fits in [start, end], scanning
        // no further back than the budget allows
        let floor = end.saturating_sub(max_len - 1).max(1);
        let mut want = m - 1;
        let mut pos = end;
        while want > 0 && pos > floor {
            pos -= 1;
            if seq[pos - 1] == pattern[want - 1] {
                want -= 1;
            }
        }
        if want > 0 {
            continue;
        }
        if pos > last_start {
            out.push((pos, end));
            last_start = pos;
        }
    }
    out
}

/// Positions matched by `pattern` inside `[start, end]`, leftmost greedy.
/// Returns `None` when the pattern does not fit.
pub fn match_positions(pattern: &[Event], seq: &[Event], start: usize, end: usize) -> Option<Vec<usize>> {
    let mut out = Vec::with_capacity(pattern.len());
    let mut want = 0;
    for pos in start..=end {
        if want == pattern.len() {
            break;
        }
        if seq[pos - 1] == pattern[want] {
            out.push(pos);
            want += 1;
        }
    }
    (want == pattern.len()).then_some(out)
}

/// A placement `S[i,j;k,l]` of one rule instance.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RuleWindow {
    pub seq: usize,
    /// Head window `(i, j)`; `None` for empty-head rules.
    pub head: Option<(usize, usize)>,
    pub k: usize,
    pub l: usize,
    /// The positions in `[k, l]` matched by the tail symbols.
    pub tail_positions: Vec<usize>,
}

impl RuleWindow {
    /// Events between head and tail, `k - j - 1`; zero without a head.
    pub fn delay(&self) -> usize {
        match self.head {
            Some((_, j)) => self.k - j - 1,
            None => 0,
        }
    }

    /// Unmatched positions inside the tail window.
    pub fn tail_gaps(&self) -> usize {
        (self.l - self.k + 1) - self.tail_positions.len()
    }

    /// Start of the whole window: `i`, or `k` for empty-head rules.
    pub fn start(&self) -> usize {
        self.head.map_or(self.k, |(i, _)| i)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RuleStats {
    pub trigger_count: usize,
    pub support: usize,
    pub confidence: f64,
}

/// Everything the cover, the codec and candidate generation need to know
/// about one rule on one database. Computed once and cached by the miners.
#[derive(Clone, Debug)]
pub struct RuleOccurrences {
    rule: Rule,
    triggers: Vec<Vec<(usize, usize)>>,
    tail_windows: Vec<Vec<(usize, usize)>>,
    best: Vec<RuleWindow>,
    stats: RuleStats,
}

impl RuleOccurrences {
    pub fn compute(db: &SequenceDatabase, rule: &Rule, params: &SearchParams) -> Self {
        let tail = rule.tail().as_slice();
        let tail_budget = params.gap_budget(tail.len());
        let tail_windows: Vec<_> =
            db.sequences().iter().map(|s| minimal_windows_within(tail, s, tail_budget)).collect();
        let mut best = Vec::new();
        let triggers: Vec<Vec<(usize, usize)>>;
        let stats;
        if rule.has_empty_head() {
            triggers = alloc::vec![Vec::new(); db.len()];
            for (seq, windows) in tail_windows.iter().enumerate() {
                for &(k, l) in windows {
                    let positions = match_positions(tail, db.sequence(seq), k, l).expect("minimal window matches");
                    best.push(RuleWindow { seq, head: None, k, l, tail_positions: positions });
                }
            }
            stats = RuleStats { trigger_count: best.len(), support: best.len(), confidence: 1.0 };
        } else {
            let head = rule.head().as_slice();
            let head_budget = params.gap_budget(head.len());
            triggers = db.sequences().iter().map(|s| minimal_windows_within(head, s, head_budget)).collect();
            let mut trigger_count = 0;
            for (seq, trig) in triggers.iter().enumerate() {
                trigger_count += trig.len();
                for &(i, j) in trig {
                    let pick = choose_tail(
                        &tail_windows[seq],
                        j,
                        params.delay_budget(tail.len()),
                        params.window_choice,
                        |_, _| true,
                        tail.len(),
                    );
                    if let Some((k, l)) = pick {
                        let positions = match_positions(tail, db.sequence(seq), k, l).expect("minimal window matches");
                        best.push(RuleWindow { seq, head: Some((i, j)), k, l, tail_positions: positions });
                    }
                }
            }
            let confidence = if trigger_count == 0 { 0.0 } else { best.len() as f64 / trigger_count as f64 };
            stats = RuleStats { trigger_count, support: best.len(), confidence };
        }
        RuleOccurrences { rule: rule.clone(), triggers, tail_windows, best, stats }
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn stats(&self) -> RuleStats {
        self.stats
    }

    /// Head minimal windows of sequence `seq`; empty for empty-head rules.
    pub fn triggers(&self, seq: usize) -> &[(usize, usize)] {
        &self.triggers[seq]
    }

    /// Qualifying minimal tail windows of sequence `seq`.
    pub fn tail_windows(&self, seq: usize) -> &[(usize, usize)] {
        &self.tail_windows[seq]
    }

    /// Best rule windows, at most one per trigger, ordered by sequence and trigger.
    pub fn best_windows(&self) -> &[RuleWindow] {
        &self.best
    }

    /// The nearest qualifying tail window for the trigger of `window` whose
    /// matched positions are all uncovered. Empty-head windows have no
    /// alternative.
    pub fn next_best(
        &self,
        db: &SequenceDatabase,
        window: &RuleWindow,
        params: &SearchParams,
        is_covered: impl Fn(usize, usize) -> bool,
    ) -> Option<RuleWindow> {
        let (i, j) = window.head?;
        let tail = self.rule.tail().as_slice();
        let seq = db.sequence(window.seq);
        let free = |k: usize, l: usize| {
            match_positions(tail, seq, k, l).is_some_and(|ps| ps.iter().all(|&p| !is_covered(window.seq, p)))
        };
        let (k, l) = choose_tail(
            &self.tail_windows[window.seq],
            j,
            params.delay_budget(tail.len()),
            WindowChoice::Nearest,
            free,
            tail.len(),
        )?;
        let positions = match_positions(tail, seq, k, l)?;
        Some(RuleWindow { seq: window.seq, head: Some((i, j)), k, l, tail_positions: positions })
    }
}

/// Per-rule occurrence data keyed by rule, valid for one database and one
/// set of search parameters.
#[derive(Debug, Default)]
pub struct OccurrenceCache {
    entries: BTreeMap<Rule, Arc<RuleOccurrences>>,
}

impl OccurrenceCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, db: &SequenceDatabase, rule: &Rule, params: &SearchParams) -> Arc<RuleOccurrences> {
        if let Some(occ) = self.entries.get(rule) {
            return occ.clone();
        }
        let occ = Arc::new(RuleOccurrences::compute(db, rule, params));
        self.entries.insert(rule.clone(), occ.clone());
        occ
    }

    /// Occurrences for every rule of `rules`, in canonical order.
    pub fn for_rules(
        &mut self,
        db: &SequenceDatabase,
        rules: &crate::RuleSet,
        params: &SearchParams,
    ) -> Vec<Arc<RuleOccurrences>> {
        rules.iter().map(|r| self.get(db, r, params)).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Picks a tail window after trigger end `j` within the delay budget.
fn choose_tail(
    windows: &[(usize, usize)],
    j: usize,
    delay_budget: usize,
    choice: WindowChoice,
    accept: impl Fn(usize, usize) -> bool,
    tail_len: usize,
) -> Option<(usize, usize)> {
    let from = windows.partition_point(|&(k, _)| k <= j);
    let mut best: Option<((usize, usize), (usize, usize))> = None;
    for &(k, l) in &windows[from..] {
        if k - j - 1 > delay_budget {
            break;
        }
        if !accept(k, l) {
            continue;
        }
        match choice {
            WindowChoice::Nearest => return Some((k, l)),
            WindowChoice::MinGaps => {
                let rank = ((l - k + 1) - tail_len, k - j - 1);
                if best.is_none_or(|(r, _)| rank < r) {
                    best = Some((rank, (k, l)));
                }
            }
        }
    }
    best.map(|(_, w)| w)
}

/// Number of head minimal windows of `rule` across the database. For
/// empty-head rules this is the support, so that their confidence is one.
pub fn trigger_count(rule: &Rule, db: &SequenceDatabase, params: &SearchParams) -> usize {
    if rule.has_empty_head() {
        return rule_stats(rule, db, params).trigger_count;
    }
    let head = rule.head().as_slice();
    let budget = params.gap_budget(head.len());
    db.sequences().iter().map(|s| minimal_windows_within(head, s, budget).len()).sum()
}

pub fn rule_stats(rule: &Rule, db: &SequenceDatabase, params: &SearchParams) -> RuleStats {
    RuleOccurrences::compute(db, rule, params).stats()
}

pub fn best_rule_windows(rule: &Rule, db: &SequenceDatabase, params: &SearchParams) -> Vec<RuleWindow> {
    RuleOccurrences::compute(db, rule, params).best
}

/// Next best window for the trigger of `window`, avoiding `covered`
/// positions given per sequence as sorted or unsorted position lists.
pub fn next_best_window(
    rule: &Rule,
    window: &RuleWindow,
    covered: &[Vec<usize>],
    db: &SequenceDatabase,
    params: &SearchParams,
) -> Option<RuleWindow> {
    let occ = RuleOccurrences::compute(db, rule, params);
    occ.next_best(db, window, params, |seq, pos| covered.get(seq).is_some_and(|c| c.contains(&pos)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Pattern;
    use alloc::vec;

    fn ids(s: &str) -> Vec<u32> {
        s.split_whitespace().map(|t| "abcdexy".find(t).unwrap() as u32).collect()
    }

    fn pat(s: &str) -> Pattern {
        Pattern::from_ids(&ids(s))
    }

    fn db(seqs: &[&str]) -> SequenceDatabase {
        let v: Vec<Vec<u32>> = seqs.iter().map(|s| ids(s)).collect();
        let sequences = v.iter().map(|s| crate::Sequence::from_ids(s)).collect();
        SequenceDatabase::new(sequences, 7).unwrap()
    }

    fn rule(h: &str, t: &str) -> Rule {
        Rule::new(pat(h), pat(t)).unwrap()
    }

    #[test]
    fn minimal_window_examples() {
        let s = crate::Sequence::from_ids(&ids("a b a b"));
        assert_eq!(minimal_windows(&pat("a b"), &s, 2.0).unwrap(), vec![(1, 2), (3, 4)]);
        let s = crate::Sequence::from_ids(&ids("a"));
        assert_eq!(minimal_windows(&pat("a"), &s, 2.0).unwrap(), vec![(1, 1)]);
        let s = crate::Sequence::from_ids(&ids("a c b b"));
        assert_eq!(minimal_windows(&pat("a b"), &s, 2.0).unwrap(), vec![(1, 3)]);
        assert_eq!(minimal_windows(&[], &s, 2.0), Err(Error::EmptyPattern));
    }

    #[test]
    fn gap_budget_filters_wide_windows() {
        let s = crate::Sequence::from_ids(&ids("a c c c b a b"));
        assert_eq!(minimal_windows(&pat("a b"), &s, 1.0).unwrap(), vec![(6, 7)]);
        assert_eq!(minimal_windows(&pat("a b"), &s, 1.5).unwrap(), vec![(1, 5), (6, 7)]);
    }

    #[test]
    fn trigger_count_examples() {
        let p = SearchParams::default();
        assert_eq!(trigger_count(&rule("a b", "c d"), &db(&["a b c d a b e"]), &p), 2);
        assert_eq!(trigger_count(&rule("a b", "c d"), &db(&["c d c d"]), &p), 0);
        assert_eq!(trigger_count(&rule("a b", "c d"), &db(&["a b", "a b"]), &p), 2);
    }

    #[test]
    fn stats_examples() {
        let p = SearchParams::default();
        let s = rule_stats(&rule("a b", "c d"), &db(&["a b c d a b e"]), &p);
        assert_eq!((s.trigger_count, s.support, s.confidence), (2, 1, 0.5));
        let s = rule_stats(&rule("", "a"), &db(&["a a a"]), &p);
        assert_eq!((s.support, s.confidence), (3, 1.0));
        let s = rule_stats(&rule("a b", "c d"), &db(&["a b"]), &p);
        assert_eq!((s.support, s.confidence), (0, 0.0));
    }

    #[test]
    fn best_window_prefers_fewest_gaps() {
        let p = SearchParams::default();
        let w = best_rule_windows(&rule("a b", "c d"), &db(&["a b x c y d c d"]), &p);
        assert_eq!(w.len(), 1);
        assert_eq!((w[0].k, w[0].l), (7, 8));
        let near = SearchParams { window_choice: WindowChoice::Nearest, ..p };
        let w = best_rule_windows(&rule("a b", "c d"), &db(&["a b x c y d c d"]), &near);
        assert_eq!((w[0].k, w[0].l), (4, 6));
    }

    #[test]
    fn best_window_adjacent_and_too_late() {
        let p = SearchParams::default();
        let w = best_rule_windows(&rule("a b", "c d"), &db(&["a b c d"]), &p);
        assert_eq!((w[0].k, w[0].l, w[0].delay()), (3, 4, 0));
        assert_eq!(w[0].tail_positions, vec![3, 4]);
        let w = best_rule_windows(&rule("a b", "c d"), &db(&["a b x x x x x c d"]), &p);
        assert!(w.is_empty());
    }

    #[test]
    fn next_best_skips_covered_tails() {
        let p = SearchParams::default();
        let d = db(&["a b c d c d"]);
        let r = rule("a b", "c d");
        let best = best_rule_windows(&r, &d, &p);
        assert_eq!((best[0].k, best[0].l), (3, 4));
        let nb = next_best_window(&r, &best[0], &[vec![3, 4]], &d, &p).unwrap();
        assert_eq!((nb.k, nb.l, nb.head), (5, 6, Some((1, 2))));
        assert!(next_best_window(&r, &best[0], &[vec![3, 4, 5, 6]], &d, &p).is_none());
        let d = db(&["a b c d"]);
        let best = best_rule_windows(&r, &d, &p);
        let nb = next_best_window(&r, &best[0], &[vec![]], &d, &p).unwrap();
        assert_eq!((nb.k, nb.l), (3, 4));
    }
}
