//! Model search. [`mine`] grows a model from the singletons by testing
//! candidate extensions of its rules; [`mine_from_patterns`] builds rules from
//! a given pattern collection by choosing the best split of each pattern.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::candgen::{cand_rules, Candidate};
use crate::codec::{pattern_cost, pattern_set, rule_choice_cost, Evaluation, Scorer};
use crate::cover::Cover;
use crate::error::{Error, Result};
use crate::ruleset::RuleSet;
use crate::types::{Pattern, Rule, SearchParams, SequenceDatabase};

/// Tolerance for floating point comparisons of code lengths.
const EPS: f64 = 1e-9;

/// All ways to cut `pattern` into a head and a non-empty tail.
pub fn split(pattern: &Pattern) -> Result<Vec<Rule>> {
    if pattern.is_empty() {
        return Err(Error::EmptyPattern);
    }
    Ok((0..pattern.len())
        .map(|i| {
            Rule::new(Pattern::new(pattern[..i].to_vec()), Pattern::new(pattern[i..].to_vec()))
                .expect("tail is non-empty")
        })
        .collect())
}

/// Minimum number of bits an update must save: `ceil(log2(1 / alpha))`.
pub fn gain_threshold(alpha: f64) -> f64 {
    libm::ceil(libm::log2(1.0 / alpha) - EPS)
}

pub fn significant_gain(old_bits: f64, new_bits: f64, alpha: f64) -> bool {
    old_bits - new_bits >= gain_threshold(alpha) - EPS
}

#[derive(Clone, Debug, PartialEq)]
pub struct MineOptions {
    /// Upper bound on full passes over the model.
    pub pass_cap: usize,
    /// Keep every generated candidate in the trace.
    pub record_candidates: bool,
}

impl Default for MineOptions {
    fn default() -> Self {
        MineOptions { pass_cap: 1000, record_candidates: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum UpdateKind {
    Added,
    /// The candidate replaced its parent.
    Replaced(Rule),
    Pruned,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Update {
    pub pass: usize,
    pub kind: UpdateKind,
    pub rule: Rule,
    pub before: f64,
    pub after: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MineTrace {
    pub passes: usize,
    pub candidates_tested: usize,
    pub evaluations: usize,
    /// Score of the singleton-only model.
    pub null_score: f64,
    pub updates: Vec<Update>,
    /// Generated candidates per extended rule, when requested.
    pub candidates: Vec<Candidate>,
    /// False when the pass cap stopped the search.
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct MineResult {
    pub rules: RuleSet,
    pub score: f64,
    pub cover: Cover,
    pub trace: MineTrace,
}

struct State<'a, 'd> {
    scorer: &'a mut Scorer<'d>,
    rules: RuleSet,
    eval: Evaluation,
    trace: MineTrace,
    pruned: BTreeSet<Rule>,
}

impl<'a, 'd> State<'a, 'd> {
    fn new(scorer: &'a mut Scorer<'d>) -> Result<Self> {
        let rules = RuleSet::singletons(scorer.db().alphabet_size());
        let eval = scorer.evaluate(&rules)?;
        let trace = MineTrace { null_score: eval.total(), ..MineTrace::default() };
        Ok(State { scorer, rules, eval, trace, pruned: BTreeSet::new() })
    }

    fn score(&self) -> f64 {
        self.eval.total()
    }

    fn record(&mut self, kind: UpdateKind, rule: Rule, before: f64) {
        let after = self.score();
        self.trace.updates.push(Update { pass: self.trace.passes, kind, rule, before, after });
    }

    fn finish(mut self) -> MineResult {
        self.trace.evaluations = self.scorer.evaluations();
        MineResult { score: self.eval.total(), rules: self.rules, cover: self.eval.cover, trace: self.trace }
    }

    /// Drops rules whose removal lowers the score, visiting them by usage,
    /// then encoded size, then tail length.
    fn prune(&mut self) -> Result<()> {
        for rule in prune_order(&self.rules, &self.eval.cover) {
            let mut without = self.rules.clone();
            without.remove(&rule);
            let candidate = self.scorer.evaluate(&without)?;
            if candidate.total() < self.score() - EPS {
                let before = self.score();
                self.rules = without;
                self.eval = candidate;
                self.pruned.insert(rule.clone());
                self.record(UpdateKind::Pruned, rule, before);
            }
        }
        Ok(())
    }
}

/// Bits a rule contributes to the model: its patterns plus its two choices.
pub fn encoded_size(rule: &Rule, rules: &RuleSet) -> f64 {
    let omega = rules.alphabet_size();
    let mut bits = rule_choice_cost(pattern_set(rules).len(), omega);
    for p in [rule.head(), rule.tail()] {
        if p.len() >= 2 {
            bits += pattern_cost(p, omega);
        }
    }
    bits
}

/// Non-singleton rules in the order they are considered for removal.
pub fn prune_order(rules: &RuleSet, cover: &Cover) -> Vec<Rule> {
    let mut keyed: Vec<(usize, f64, usize, usize, &Rule)> = rules
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.is_singleton())
        .map(|(idx, r)| (cover.usage()[idx], encoded_size(r, rules), r.tail().len(), idx, r))
        .collect();
    keyed.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal))
            .then(a.2.cmp(&b.2))
            .then(a.3.cmp(&b.3))
    });
    keyed.into_iter().map(|k| k.4.clone()).collect()
}

/// Removes every non-singleton rule whose removal strictly lowers the score.
pub fn prune(db: &SequenceDatabase, rules: &RuleSet, params: &SearchParams) -> Result<RuleSet> {
    let mut scorer = Scorer::new(db, *params)?;
    let eval = scorer.evaluate(rules)?;
    let mut state = State {
        scorer: &mut scorer,
        rules: rules.clone(),
        eval,
        trace: MineTrace::default(),
        pruned: BTreeSet::new(),
    };
    state.prune()?;
    Ok(state.rules)
}

/// Rules in the order they are extended: higher support, confidence, tail
/// length and head length first.
fn extend_order(scorer: &mut Scorer<'_>, rules: &RuleSet) -> Vec<Rule> {
    let mut keyed: Vec<_> = rules
        .iter()
        .enumerate()
        .map(|(idx, r)| (scorer.occurrences(r).stats(), idx, r))
        .collect();
    keyed.sort_by(|(sa, ia, ra), (sb, ib, rb)| {
        sb.support
            .cmp(&sa.support)
            .then(sb.confidence.total_cmp(&sa.confidence))
            .then(rb.tail().len().cmp(&ra.tail().len()))
            .then(rb.head().len().cmp(&ra.head().len()))
            .then(ia.cmp(ib))
    });
    keyed.into_iter().map(|(_, _, r)| r.clone()).collect()
}

pub fn mine(db: &SequenceDatabase, params: &SearchParams) -> Result<MineResult> {
    mine_with(db, params, &MineOptions::default())
}

/// Grows a model from the singletons. Each pass visits the rules in extend
/// order and tests the candidates of each in p-value order; the first one
/// that saves enough bits, added or as a replacement of its parent, is kept,
/// the model is pruned, and the pass moves on to the next rule. Passes repeat
/// until one makes no change.
pub fn mine_with(db: &SequenceDatabase, params: &SearchParams, options: &MineOptions) -> Result<MineResult> {
    let mut scorer = Scorer::new(db, *params)?;
    let mut state = State::new(&mut scorer)?;
    let mut candidates: BTreeMap<Rule, Vec<Candidate>> = BTreeMap::new();
    // model version at which all candidates of a rule last failed
    let mut exhausted_at: BTreeMap<Rule, usize> = BTreeMap::new();
    let mut version = 0usize;

    loop {
        if state.trace.passes >= options.pass_cap {
            return Ok(state.finish());
        }
        state.trace.passes += 1;
        let mut changed = false;
        for rule in extend_order(state.scorer, &state.rules) {
            if !state.rules.contains(&rule) || exhausted_at.get(&rule) == Some(&version) {
                continue;
            }
            if !candidates.contains_key(&rule) {
                let occ = state.scorer.occurrences(&rule);
                let list = cand_rules(db, &occ, params);
                if options.record_candidates {
                    state.trace.candidates.extend(list.iter().cloned());
                }
                candidates.insert(rule.clone(), list);
            }
            let mut updated = false;
            for cand in &candidates[&rule] {
                if state.rules.contains(&cand.rule) || state.pruned.contains(&cand.rule) {
                    continue;
                }
                state.trace.candidates_tested += 1;
                let before = state.score();
                let mut with = state.rules.clone();
                with.insert(cand.rule.clone());
                let eval = state.scorer.evaluate(&with)?;
                if significant_gain(before, eval.total(), params.alpha) {
                    state.rules = with;
                    state.eval = eval;
                    state.record(UpdateKind::Added, cand.rule.clone(), before);
                    updated = true;
                } else if !cand.parent.is_singleton() {
                    with.remove(&cand.parent);
                    let eval = state.scorer.evaluate(&with)?;
                    if significant_gain(before, eval.total(), params.alpha) {
                        state.rules = with;
                        state.eval = eval;
                        state.record(UpdateKind::Replaced(cand.parent.clone()), cand.rule.clone(), before);
                        updated = true;
                    }
                }
                if updated {
                    break;
                }
            }
            if updated {
                state.prune()?;
                version += 1;
                changed = true;
            } else {
                exhausted_at.insert(rule, version);
            }
        }
        if !changed {
            state.trace.converged = true;
            return Ok(state.finish());
        }
    }
}

/// Builds a model from `patterns`: patterns are visited by how much they
/// help an empty-head encoding of the data, and each contributes its best
/// scoring split if that lowers the score.
pub fn mine_from_patterns(db: &SequenceDatabase, patterns: &[Pattern], params: &SearchParams) -> Result<MineResult> {
    for p in patterns {
        if p.is_empty() {
            return Err(Error::EmptyPattern);
        }
        db.check_pattern(p)?;
    }
    let mut unique: Vec<&Pattern> = Vec::new();
    for p in patterns {
        if p.len() >= 2 && !unique.contains(&p) {
            unique.push(p);
        }
    }
    let mut scorer = Scorer::new(db, *params)?;
    let order = order_by_contribution(&mut scorer, &unique)?;
    let mut state = State::new(&mut scorer)?;
    state.trace.passes = 1;
    for p in order {
        let before = state.score();
        let mut best: Option<(Evaluation, Rule)> = None;
        for rule in split(p)? {
            if state.rules.contains(&rule) {
                continue;
            }
            let mut with = state.rules.clone();
            with.insert(rule.clone());
            state.trace.candidates_tested += 1;
            let eval = state.scorer.evaluate(&with)?;
            if best.as_ref().is_none_or(|(b, _)| eval.total() < b.total()) {
                best = Some((eval, rule));
            }
        }
        if let Some((eval, rule)) = best {
            if eval.total() < before - EPS {
                state.rules.insert(rule.clone());
                state.eval = eval;
                state.record(UpdateKind::Added, rule, before);
            }
        }
    }
    state.trace.converged = true;
    Ok(state.finish())
}

/// Patterns sorted by `L(D, F \ {p}) - L(D, F)`, largest first, where `F`
/// encodes every pattern as an empty-head rule.
fn order_by_contribution<'p>(scorer: &mut Scorer<'_>, patterns: &[&'p Pattern]) -> Result<Vec<&'p Pattern>> {
    let omega = scorer.db().alphabet_size();
    let as_rules = |skip: Option<usize>| {
        let rules = patterns
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != skip)
            .map(|(_, p)| Rule::pattern((*p).clone()).expect("non-empty"));
        RuleSet::with_rules(omega, rules)
    };
    let full = scorer.total(&as_rules(None)?)?;
    let mut keyed = Vec::with_capacity(patterns.len());
    for (i, p) in patterns.iter().enumerate() {
        keyed.push((scorer.total(&as_rules(Some(i))?)? - full, i, *p));
    }
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(keyed.into_iter().map(|k| k.2).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Event, Sequence};
    use alloc::vec;

    fn pat(ids: &[u32]) -> Pattern {
        Pattern::from_ids(ids)
    }

    #[test]
    fn split_examples() {
        let rules = split(&pat(&[0, 1, 2])).unwrap();
        assert_eq!(
            rules,
            vec![
                Rule::pattern(pat(&[0, 1, 2])).unwrap(),
                Rule::new(pat(&[0]), pat(&[1, 2])).unwrap(),
                Rule::new(pat(&[0, 1]), pat(&[2])).unwrap(),
            ]
        );
        assert_eq!(split(&pat(&[0])).unwrap(), vec![Rule::singleton(Event(0))]);
        assert_eq!(split(&pat(&[0, 1, 2, 3])).unwrap().len(), 4);
        assert_eq!(split(&Pattern::empty()), Err(Error::EmptyPattern));
    }

    #[test]
    fn gain_threshold_examples() {
        assert_eq!(gain_threshold(0.05), 5.0);
        assert_eq!(gain_threshold(0.5), 1.0);
        assert!(significant_gain(100.0, 94.9, 0.05));
        assert!(!significant_gain(100.0, 96.0, 0.05));
        assert!(!significant_gain(42.0, 42.0, 0.05));
    }

    fn repeated(unit: &[u32], times: usize) -> SequenceDatabase {
        let events: Vec<u32> = unit.iter().copied().cycle().take(unit.len() * times).collect();
        SequenceDatabase::from_ids(&[&events])
    }

    #[test]
    fn unused_rule_is_pruned() {
        let db = repeated(&[0, 1, 2], 10);
        let mut rules = RuleSet::singletons(3);
        rules.insert(Rule::pattern(pat(&[2, 2, 2, 2])).unwrap());
        let pruned = prune(&db, &rules, &SearchParams::default()).unwrap();
        assert_eq!(pruned, RuleSet::singletons(3));
        let singles = RuleSet::singletons(3);
        assert_eq!(prune(&db, &singles, &SearchParams::default()).unwrap(), singles);
    }

    #[test]
    fn alternating_data_yields_one_rule() {
        let db = repeated(&[0, 1], 40);
        let result = mine(&db, &SearchParams::default()).unwrap();
        let non_singletons = result.rules.non_singletons();
        assert!(!non_singletons.is_empty());
        let ab = Rule::pattern(pat(&[0, 1])).unwrap();
        let a_b = Rule::new(pat(&[0]), pat(&[1])).unwrap();
        assert!(!(result.rules.contains(&ab) && result.rules.contains(&a_b)));
        assert!(result.score < result.trace.null_score);
        assert!(result.trace.converged);
    }

    #[test]
    fn every_accepted_update_saves_enough() {
        let db = repeated(&[0, 1, 2, 3], 25);
        let result = mine(&db, &SearchParams::default()).unwrap();
        for u in &result.trace.updates {
            match u.kind {
                UpdateKind::Pruned => assert!(u.after < u.before),
                _ => assert!(u.before - u.after >= 5.0 - 1e-9),
            }
        }
    }

    #[test]
    fn pattern_miner_keeps_contiguous_frequent_pattern() {
        let mut seqs = Vec::new();
        for i in 0..30u32 {
            seqs.push(Sequence::from_ids(&[3 + i % 3, 0, 1, 2, 3 + (i + 1) % 3]));
        }
        let db = SequenceDatabase::new(seqs, 6).unwrap();
        let p = SearchParams::default();
        let result = mine_from_patterns(&db, &[pat(&[0, 1, 2])], &p).unwrap();
        assert_eq!(result.rules.non_singletons().len(), 1);
        assert!(result.score < result.trace.null_score);
        let mut scorer = Scorer::new(&db, p).unwrap();
        let best = split(&pat(&[0, 1, 2]))
            .unwrap()
            .into_iter()
            .map(|rule| {
                let mut rules = RuleSet::singletons(6);
                rules.insert(rule.clone());
                (scorer.total(&rules).unwrap(), rule)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap();
        assert_eq!(result.rules.non_singletons(), &[best.1]);
        assert!((result.score - best.0).abs() < 1e-9);
        let empty = mine_from_patterns(&db, &[], &p).unwrap();
        assert_eq!(empty.rules, RuleSet::singletons(6));
        assert!(mine_from_patterns(&db, &[pat(&[9])], &p).is_err());
    }
}
