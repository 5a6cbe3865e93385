use alloc::vec::Vec;
use core::fmt;
use core::ops::Deref;

use crate::error::{Error, Result};

/// An integer-coded event; the id indexes into the database alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event(pub u32);

impl Event {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<u32> for Event {
    fn from(id: u32) -> Self {
        Event(id)
    }
}

/// A serial episode: an ordered list of events matched as a subsequence.
/// The empty pattern stands for the empty head of a rule.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern(Vec<Event>);

impl Pattern {
    pub fn new(events: Vec<Event>) -> Self {
        Pattern(events)
    }

    pub fn empty() -> Self {
        Pattern(Vec::new())
    }

    pub fn from_ids(ids: &[u32]) -> Self {
        Pattern(ids.iter().copied().map(Event).collect())
    }

    pub fn as_slice(&self) -> &[Event] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Event> {
        self.0
    }

    /// Pattern with `event` inserted before index `at`.
    pub fn with_inserted(&self, at: usize, event: Event) -> Pattern {
        let mut events = self.0.clone();
        events.insert(at, event);
        Pattern(events)
    }

    /// Concatenation `self` followed by `other`.
    pub fn concat(&self, other: &Pattern) -> Pattern {
        let mut events = self.0.clone();
        events.extend_from_slice(&other.0);
        Pattern(events)
    }
}

impl Deref for Pattern {
    type Target = [Event];

    fn deref(&self) -> &[Event] {
        &self.0
    }
}

impl From<Vec<Event>> for Pattern {
    fn from(events: Vec<Event>) -> Self {
        Pattern(events)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        for (n, e) in self.0.iter().enumerate() {
            if n > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", e.0)?;
        }
        Ok(())
    }
}

/// A sequential rule `head -> tail`. The tail is never empty.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    head: Pattern,
    tail: Pattern,
}

impl Rule {
    pub fn new(head: Pattern, tail: Pattern) -> Result<Self> {
        if tail.is_empty() {
            return Err(Error::EmptyTail);
        }
        Ok(Rule { head, tail })
    }

    pub fn singleton(event: Event) -> Self {
        Rule { head: Pattern::empty(), tail: Pattern::new(alloc::vec![event]) }
    }

    /// Empty-head rule `-> pattern`.
    pub fn pattern(tail: Pattern) -> Result<Self> {
        Rule::new(Pattern::empty(), tail)
    }

    pub fn head(&self) -> &Pattern {
        &self.head
    }

    pub fn tail(&self) -> &Pattern {
        &self.tail
    }

    pub fn has_empty_head(&self) -> bool {
        self.head.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.head.is_empty() && self.tail.len() == 1
    }

    /// Total number of events in head and tail.
    pub fn size(&self) -> usize {
        self.head.len() + self.tail.len()
    }

    pub fn events(&self) -> impl Iterator<Item = Event> + '_ {
        self.head.iter().chain(self.tail.iter()).copied()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.head, self.tail)
    }
}

/// One event sequence. Window arithmetic elsewhere uses 1-based positions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Sequence(Vec<Event>);

impl Sequence {
    pub fn new(events: Vec<Event>) -> Self {
        Sequence(events)
    }

    pub fn from_ids(ids: &[u32]) -> Self {
        Sequence(ids.iter().copied().map(Event).collect())
    }

    pub fn events(&self) -> &[Event] {
        &self.0
    }

    /// Event at 1-based position `pos`.
    pub fn at(&self, pos: usize) -> Event {
        self.0[pos - 1]
    }

    pub fn into_vec(self) -> Vec<Event> {
        self.0
    }
}

impl Deref for Sequence {
    type Target = [Event];

    fn deref(&self) -> &[Event] {
        &self.0
    }
}

/// An ordered collection of sequences over the alphabet `0..alphabet_size`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceDatabase {
    sequences: Vec<Sequence>,
    alphabet_size: usize,
}

impl SequenceDatabase {
    pub fn new(sequences: Vec<Sequence>, alphabet_size: usize) -> Result<Self> {
        for seq in &sequences {
            if let Some(e) = seq.iter().find(|e| e.index() >= alphabet_size) {
                return Err(Error::EventOutOfRange { event: e.0, alphabet_size });
            }
        }
        Ok(SequenceDatabase { sequences, alphabet_size })
    }

    /// Builds a database from raw ids; the alphabet is `0..=max id`.
    pub fn from_ids(sequences: &[&[u32]]) -> Self {
        let alphabet_size =
            sequences.iter().flat_map(|s| s.iter()).map(|&e| e as usize + 1).max().unwrap_or(0);
        SequenceDatabase {
            sequences: sequences.iter().map(|s| Sequence::from_ids(s)).collect(),
            alphabet_size,
        }
    }

    pub fn sequences(&self) -> &[Sequence] {
        &self.sequences
    }

    pub fn sequence(&self, index: usize) -> &Sequence {
        &self.sequences[index]
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    /// Number of sequences, `|D|`.
    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    /// Total number of events, `||D||`.
    pub fn total_events(&self) -> usize {
        self.sequences.iter().map(|s| s.len()).sum()
    }

    /// Occurrence count of every event id.
    pub fn event_frequencies(&self) -> Vec<usize> {
        let mut freq = alloc::vec![0usize; self.alphabet_size];
        for e in self.sequences.iter().flat_map(|s| s.iter()) {
            freq[e.index()] += 1;
        }
        freq
    }

    pub fn check_pattern(&self, pattern: &[Event]) -> Result<()> {
        match pattern.iter().find(|e| e.index() >= self.alphabet_size) {
            Some(e) => Err(Error::EventOutOfRange { event: e.0, alphabet_size: self.alphabet_size }),
            None => Ok(()),
        }
    }
}

/// How the tail window of a trigger is chosen among qualifying minimal windows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WindowChoice {
    /// Fewest tail gaps, then lowest delay.
    #[default]
    MinGaps,
    /// The first qualifying window after the trigger.
    Nearest,
}

/// Window budgets and significance level shared by the cover and the miners.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchParams {
    /// Allowed gaps per pattern event, for head and tail windows.
    pub max_gap: f64,
    /// Allowed delay between head and tail, per tail event.
    pub max_delay: f64,
    pub alpha: f64,
    pub window_choice: WindowChoice,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams { max_gap: 2.0, max_delay: 2.0, alpha: 0.05, window_choice: WindowChoice::MinGaps }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_gap >= 0.0 && self.max_gap.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("max gap {}", self.max_gap)));
        }
        if !(self.max_delay >= 0.0 && self.max_delay.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("max delay {}", self.max_delay)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(alloc::format!("alpha {} not in (0,1)", self.alpha)));
        }
        Ok(())
    }

    /// Largest admissible gap count for a pattern of `len` events.
    pub fn gap_budget(&self, len: usize) -> usize {
        ratio_budget(self.max_gap, len)
    }

    /// Largest admissible delay before a tail of `len` events.
    pub fn delay_budget(&self, len: usize) -> usize {
        ratio_budget(self.max_delay, len)
    }
}

fn ratio_budget(ratio: f64, len: usize) -> usize {
    libm::floor(ratio * len as f64 + 1e-9) as usize
}
