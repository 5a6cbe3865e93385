use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::{Event, Rule};

/// A model: every singleton rule plus an ordered list of further rules.
///
/// The canonical order puts the singletons first, in alphabet order, followed
/// by the remaining rules in insertion order. Rule indices used by the cover
/// and the code streams refer to this order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSet {
    alphabet_size: usize,
    rules: Vec<Rule>,
}

impl RuleSet {
    /// The null model: one singleton rule per event.
    pub fn singletons(alphabet_size: usize) -> Self {
        let rules = (0..alphabet_size as u32).map(|e| Rule::singleton(Event(e))).collect();
        RuleSet { alphabet_size, rules }
    }

    /// Null model extended with `rules`; duplicates and singletons are skipped.
    pub fn with_rules(alphabet_size: usize, rules: impl IntoIterator<Item = Rule>) -> Result<Self> {
        let mut set = RuleSet::singletons(alphabet_size);
        for r in rules {
            set.check(&r)?;
            set.insert(r);
        }
        Ok(set)
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    fn check(&self, rule: &Rule) -> Result<()> {
        match rule.events().find(|e| e.index() >= self.alphabet_size) {
            Some(e) => Err(Error::EventOutOfRange { event: e.0, alphabet_size: self.alphabet_size }),
            None => Ok(()),
        }
    }

    /// Appends `rule` unless it is already present. Returns whether it was added.
    pub fn insert(&mut self, rule: Rule) -> bool {
        if self.contains(&rule) {
            return false;
        }
        debug_assert!(rule.events().all(|e| e.index() < self.alphabet_size));
        self.rules.push(rule);
        true
    }

    /// Removes a non-singleton rule. Singletons are never removed.
    pub fn remove(&mut self, rule: &Rule) -> bool {
        if rule.is_singleton() {
            return false;
        }
        match self.rules[self.alphabet_size..].iter().position(|r| r == rule) {
            Some(at) => {
                self.rules.remove(self.alphabet_size + at);
                true
            }
            None => false,
        }
    }

    pub fn contains(&self, rule: &Rule) -> bool {
        self.index_of(rule).is_some()
    }

    /// Canonical index of `rule`.
    pub fn index_of(&self, rule: &Rule) -> Option<usize> {
        if rule.is_singleton() {
            let e = rule.tail()[0].index();
            return (e < self.alphabet_size).then_some(e);
        }
        self.rules[self.alphabet_size..].iter().position(|r| r == rule).map(|i| i + self.alphabet_size)
    }

    pub fn get(&self, index: usize) -> &Rule {
        &self.rules[index]
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Rule> {
        self.rules.iter()
    }

    pub fn as_slice(&self) -> &[Rule] {
        &self.rules
    }

    /// Rules beyond the singletons, in insertion order.
    pub fn non_singletons(&self) -> &[Rule] {
        &self.rules[self.alphabet_size..]
    }
}

impl<'a> IntoIterator for &'a RuleSet {
    type Item = &'a Rule;
    type IntoIter = core::slice::Iter<'a, Rule>;

    fn into_iter(self) -> Self::IntoIter {
        self.rules.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Pattern;

    #[test]
    fn canonical_order_and_singleton_protection() {
        let mut set = RuleSet::singletons(3);
        let r = Rule::new(Pattern::from_ids(&[0]), Pattern::from_ids(&[1, 2])).unwrap();
        assert!(set.insert(r.clone()));
        assert!(!set.insert(r.clone()));
        assert_eq!(set.index_of(&r), Some(3));
        assert_eq!(set.index_of(&Rule::singleton(Event(2))), Some(2));
        assert!(!set.remove(&Rule::singleton(Event(0))));
        assert!(set.remove(&r));
        assert_eq!(set, RuleSet::singletons(3));
    }

    #[test]
    fn rejects_out_of_alphabet_rules() {
        let r = Rule::pattern(Pattern::from_ids(&[0, 5])).unwrap();
        assert!(RuleSet::with_rules(3, [r]).is_err());
    }
}
