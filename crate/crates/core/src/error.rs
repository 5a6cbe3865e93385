use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("pattern must not be empty")]
    EmptyPattern,
    #[error("rule tail must not be empty")]
    EmptyTail,
    #[error("event {event} is outside the alphabet of size {alphabet_size}")]
    EventOutOfRange { event: u32, alphabet_size: usize },
    #[error("empty database")]
    EmptyDatabase,
    #[error("sequence {0} is empty")]
    EmptySequence(usize),
    #[error("stream has more distinct symbols than its declared alphabet")]
    SymbolOutsideAlphabet,
    #[error("cover is not exact: {0}")]
    InexactCover(String),
    #[error("corrupt code stream: {0}")]
    CorruptStream(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("generation failed: {0}")]
    Generation(String),
}
