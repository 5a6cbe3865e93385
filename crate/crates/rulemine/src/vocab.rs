//! String tokens at the file boundary, integer ids inside.

use std::collections::HashMap;

use rulemine_core::{Event, Pattern, Rule};

/// Tokens reserved by the rule syntax.
pub const EMPTY_HEAD: &str = "-";
pub const ARROW: &str = "->";

/// Bijection between tokens and event ids `0..len`, in first-seen order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vocabulary from distinct tokens; the first duplicate is
    /// returned as the error.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self, String>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary::new();
        for t in tokens {
            let t = t.into();
            if vocab.id(&t).is_some() {
                return Err(t);
            }
            vocab.intern(&t);
        }
        Ok(vocab)
    }

    pub fn intern(&mut self, token: &str) -> Event {
        if let Some(e) = self.id(token) {
            return e;
        }
        let id = self.tokens.len() as u32;
        self.tokens.push(token.to_string());
        self.ids.insert(token.to_string(), id);
        Event(id)
    }

    pub fn id(&self, token: &str) -> Option<Event> {
        self.ids.get(token).map(|&i| Event(i))
    }

    pub fn token(&self, event: Event) -> &str {
        &self.tokens[event.index()]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn pattern_tokens(&self, pattern: &Pattern) -> Vec<String> {
        pattern.iter().map(|&e| self.token(e).to_string()).collect()
    }

    /// `head -> tail` with `-` for an empty head.
    pub fn format_rule(&self, rule: &Rule) -> String {
        let head = if rule.head().is_empty() { EMPTY_HEAD.to_string() } else { self.pattern_tokens(rule.head()).join(" ") };
        format!("{head} {ARROW} {}", self.pattern_tokens(rule.tail()).join(" "))
    }
}

/// Whether `token` can appear in a data file.
pub fn valid_token(token: &str) -> bool {
    !token.is_empty() && token != EMPTY_HEAD && token != ARROW && !token.starts_with('#')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_stable() {
        let mut v = Vocabulary::new();
        assert_eq!(v.intern("x"), Event(0));
        assert_eq!(v.intern("y"), Event(1));
        assert_eq!(v.intern("x"), Event(0));
        assert_eq!(v.token(Event(1)), "y");
        assert_eq!(Vocabulary::from_tokens(["a", "b", "a"]), Err("a".to_string()));
    }

    #[test]
    fn rules_print_with_tokens() {
        let v = Vocabulary::from_tokens(["a", "b", "c"]).unwrap();
        let r = Rule::new(Pattern::from_ids(&[0, 1]), Pattern::from_ids(&[2])).unwrap();
        assert_eq!(v.format_rule(&r), "a b -> c");
        let p = Rule::pattern(Pattern::from_ids(&[2, 0])).unwrap();
        assert_eq!(v.format_rule(&p), "- -> c a");
    }

    #[test]
    fn reserved_tokens() {
        assert!(valid_token("abc"));
        assert!(!valid_token("-"));
        assert!(!valid_token("->"));
        assert!(!valid_token("#x"));
    }
}
