//! Sequential rule set mining for event sequences, scored by a two-part
//! minimum description length criterion.
//!
//! A model is a set of rules `X -> Y` over serial episodes. The data is
//! described by greedily covering every event with rule windows and charging
//! three adaptive code streams (trigger, delay and gap codes). Two miners
//! search for the model with the smallest total encoded length: one builds
//! rules directly from the data by significance-tested extension, the other
//! splits externally supplied patterns into rules.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the token
//! vocabulary and the command-line tool live in the `rulemine` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod candgen;
pub mod codec;
pub mod cover;
mod error;
pub mod eval;
pub mod miner;
mod ruleset;
pub mod synth;
mod types;
pub mod windows;

pub use error::{Error, Result};
pub use ruleset::RuleSet;
pub use types::{Event, Pattern, Rule, SearchParams, Sequence, SequenceDatabase, WindowChoice};
