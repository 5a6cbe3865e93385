//! File formats, token vocabulary, subcommands and experiment drivers on top
//! of `rulemine-core`.

pub mod commands;
mod error;
pub mod experiments;
pub mod format;
pub mod vocab;

pub use error::{Error, Result};
