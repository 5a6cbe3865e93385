//! Similarity of mined rules to a known rule set.

use alloc::vec::Vec;

use crate::types::{Event, Rule};

/// `|a| + |b| - 2 |lcs(a, b)|`: edit distance with insertions and deletions only.
pub fn lcs_distance(a: &[Event], b: &[Event]) -> usize {
    let mut row = alloc::vec![0usize; b.len() + 1];
    for &x in a {
        let mut diag = 0;
        for (col, &y) in b.iter().enumerate() {
            let above = row[col + 1];
            row[col + 1] = if x == y { diag + 1 } else { above.max(row[col]) };
            diag = above;
        }
    }
    a.len() + b.len() - 2 * row[b.len()]
}

/// `1 - lcs_distance / (|a| + |b|)`; two empty patterns are identical.
pub fn pattern_sim(a: &[Event], b: &[Event]) -> f64 {
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0;
    }
    1.0 - lcs_distance(a, b) as f64 / total as f64
}

/// Weighted similarity: half on the concatenation, a quarter each on head and tail.
pub fn rule_sim(r1: &Rule, r2: &Rule) -> f64 {
    let joined = |r: &Rule| r.events().collect::<Vec<_>>();
    0.5 * pattern_sim(&joined(r1), &joined(r2))
        + 0.25 * pattern_sim(r1.head(), r2.head())
        + 0.25 * pattern_sim(r1.tail(), r2.tail())
}

fn best_match(rule: &Rule, others: &[Rule]) -> (f64, Option<usize>) {
    let mut best = (0.0, None);
    for (i, o) in others.iter().enumerate() {
        let s = rule_sim(rule, o);
        if best.1.is_none() || s > best.0 {
            best = (s, Some(i));
        }
    }
    best
}

/// Mean over true rules of the best similarity to any mined rule.
pub fn recall(truth: &[Rule], mined: &[Rule]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    truth.iter().map(|t| best_match(t, mined).0).sum::<f64>() / truth.len() as f64
}

/// Sum of the `|truth|` largest per-mined-rule best similarities, divided by
/// `|mined|`.
pub fn precision(truth: &[Rule], mined: &[Rule]) -> f64 {
    if mined.is_empty() {
        return 0.0;
    }
    let mut scores: Vec<(f64, usize)> = mined.iter().enumerate().map(|(i, m)| (best_match(m, truth).0, i)).collect();
    scores.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scores.iter().take(truth.len()).map(|s| s.0).sum::<f64>() / mined.len() as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    /// For every true rule, its best similarity and the index of the mined
    /// rule achieving it.
    pub best_matches: Vec<(f64, Option<usize>)>,
}

pub fn f1(truth: &[Rule], mined: &[Rule]) -> EvalReport {
    let recall = recall(truth, mined);
    let precision = precision(truth, mined);
    let f1 = if recall + precision > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    EvalReport { recall, precision, f1, best_matches: truth.iter().map(|t| best_match(t, mined)).collect() }
}

/// Like [`f1`], optionally dropping singleton rules from the mined side.
pub fn evaluate(truth: &[Rule], mined: &[Rule], exclude_singletons: bool) -> EvalReport {
    if exclude_singletons {
        let kept: Vec<Rule> = mined.iter().filter(|r| !r.is_singleton()).cloned().collect();
        f1(truth, &kept)
    } else {
        f1(truth, mined)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Pattern;
    use alloc::vec;

    fn ev(s: &str) -> Vec<Event> {
        s.bytes().map(|b| Event((b - b'a') as u32)).collect()
    }

    fn rule(h: &str, t: &str) -> Rule {
        Rule::new(Pattern::new(ev(h)), Pattern::new(ev(t))).unwrap()
    }

    #[test]
    fn lcs_examples() {
        assert_eq!(lcs_distance(&ev("abc"), &ev("abc")), 0);
        assert_eq!(lcs_distance(&ev("abc"), &ev("ac")), 1);
        assert_eq!(lcs_distance(&ev("ab"), &ev("cd")), 4);
        assert!((pattern_sim(&ev("abc"), &ev("ac")) - 0.8).abs() < 1e-12);
        assert_eq!(pattern_sim(&[], &[]), 1.0);
        assert_eq!(pattern_sim(&[], &ev("ab")), 0.0);
    }

    #[test]
    fn rule_sim_examples() {
        assert_eq!(rule_sim(&rule("ab", "c"), &rule("ab", "c")), 1.0);
        let s = rule_sim(&rule("a", "bc"), &rule("ab", "c"));
        assert!((s - (0.5 + 0.25 * (2.0 / 3.0) * 2.0)).abs() < 1e-12);
        assert_eq!(rule_sim(&rule("", "ab"), &rule("", "ab")), 1.0);
    }

    #[test]
    fn recall_precision_examples() {
        let t = vec![rule("a", "b")];
        let m = vec![rule("a", "b"), rule("c", "d")];
        assert_eq!(recall(&t, &t), 1.0);
        assert_eq!(precision(&t, &t), 1.0);
        assert_eq!(recall(&t, &[]), 0.0);
        assert_eq!(recall(&t, &m), 1.0);
        assert_eq!(precision(&t, &m), 0.5);
        let single = vec![rule("c", "d")];
        assert_eq!(precision(&t, &single), rule_sim(&t[0], &single[0]));
        let r = f1(&t, &m);
        assert!((r.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.best_matches, vec![(1.0, Some(0))]);
        assert_eq!(f1(&t, &[]).f1, 0.0);
        assert_eq!(f1(&m, &m).f1, 1.0);
    }

    #[test]
    fn singleton_exclusion() {
        let t = vec![rule("a", "b")];
        let m = vec![rule("", "a"), rule("a", "b")];
        assert_eq!(evaluate(&t, &m, true).f1, 1.0);
        assert!(evaluate(&t, &m, false).f1 < 1.0);
    }
}
