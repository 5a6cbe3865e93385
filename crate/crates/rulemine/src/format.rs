//! Text formats: databases, pattern lists and model files.
//!
//! A database file holds one sequence per line as whitespace-separated
//! tokens. Blank lines and lines starting with `#` are skipped. A pattern file
//! has the same layout with one pattern per line.
//!
//! A model file is a rule list with an optional alphabet header and an
//! optional footer:
//!
//! ```text
//! alphabet a b c d
//! - -> a	supp 4	conf 1	usage 2
//! a b -> c d	supp 1	conf 0.5	usage 1
//! bits	model 31.2	data 20.7	total 51.9	null 60.1	saved 13.6
//! ```
//!
//! Fields after a rule are tab-separated `key value` pairs, all optional. A
//! ground-truth file is a model file with neither header nor footer.

use std::fmt;
use std::path::Path;

use rulemine_core::{Pattern, Rule, RuleSet, Sequence, SequenceDatabase};

use crate::error::{read_file, Error, Result};
use crate::vocab::{valid_token, Vocabulary, ARROW, EMPTY_HEAD};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parses token lines. New tokens are added to `vocab` unless `frozen`, in
/// which case they are errors.
pub fn parse_token_lines(text: &str, path: &Path, vocab: &mut Vocabulary, frozen: bool) -> Result<Vec<Vec<rulemine_core::Event>>> {
    let mut out = Vec::new();
    for (line, content) in content_lines(text) {
        let mut events = Vec::new();
        for token in content.split_whitespace() {
            if !valid_token(token) {
                return Err(Error::parse(path, line, format!("reserved token '{token}'")));
            }
            let e = if frozen {
                vocab.id(token).ok_or_else(|| Error::parse(path, line, format!("unknown token '{token}'")))?
            } else {
                vocab.intern(token)
            };
            events.push(e);
        }
        out.push(events);
    }
    Ok(out)
}

/// Reads a database, building its vocabulary in first-seen order.
pub fn read_database(path: &Path) -> Result<(SequenceDatabase, Vocabulary)> {
    let mut vocab = Vocabulary::new();
    let db = parse_database(&read_file(path)?, path, &mut vocab, false)?;
    Ok((db, vocab))
}

/// Parses a database over `vocab`; the alphabet is the whole vocabulary.
pub fn parse_database(text: &str, path: &Path, vocab: &mut Vocabulary, frozen: bool) -> Result<SequenceDatabase> {
    let seqs = parse_token_lines(text, path, vocab, frozen)?;
    if seqs.is_empty() {
        return Err(rulemine_core::Error::EmptyDatabase.into());
    }
    Ok(SequenceDatabase::new(seqs.into_iter().map(Sequence::new).collect(), vocab.len())?)
}

pub fn format_database(db: &SequenceDatabase, vocab: &Vocabulary) -> String {
    let mut out = String::new();
    for seq in db.sequences() {
        let tokens: Vec<&str> = seq.iter().map(|&e| vocab.token(e)).collect();
        out.push_str(&tokens.join(" "));
        out.push('\n');
    }
    out
}

/// Reads a pattern file whose tokens must all occur in `vocab`.
pub fn read_patterns(path: &Path, vocab: &Vocabulary) -> Result<Vec<Pattern>> {
    let mut vocab = vocab.clone();
    let lines = parse_token_lines(&read_file(path)?, path, &mut vocab, true)?;
    Ok(lines.into_iter().map(Pattern::new).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct RuleLine {
    pub head: Vec<String>,
    pub tail: Vec<String>,
    pub support: Option<usize>,
    pub confidence: Option<f64>,
    pub usage: Option<usize>,
}

impl RuleLine {
    pub fn new(head: Vec<String>, tail: Vec<String>) -> Self {
        RuleLine { head, tail, support: None, confidence: None, usage: None }
    }

    pub fn is_singleton(&self) -> bool {
        self.head.is_empty() && self.tail.len() == 1
    }

    fn to_rule(&self, vocab: &Vocabulary) -> std::result::Result<Rule, String> {
        let ids = |tokens: &[String]| -> std::result::Result<Pattern, String> {
            tokens
                .iter()
                .map(|t| vocab.id(t).ok_or_else(|| format!("unknown token '{t}'")))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(Pattern::new)
        };
        Rule::new(ids(&self.head)?, ids(&self.tail)?).map_err(|e| e.to_string())
    }
}

impl fmt::Display for RuleLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.head.is_empty() {
            f.write_str(EMPTY_HEAD)?;
        } else {
            f.write_str(&self.head.join(" "))?;
        }
        write!(f, " {ARROW} {}", self.tail.join(" "))?;
        if let Some(s) = self.support {
            write!(f, "\tsupp {s}")?;
        }
        if let Some(c) = self.confidence {
            write!(f, "\tconf {c}")?;
        }
        if let Some(u) = self.usage {
            write!(f, "\tusage {u}")?;
        }
        Ok(())
    }
}

/// Encoded lengths in bits and the share saved against the singleton model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Footer {
    pub model_bits: f64,
    pub data_bits: f64,
    pub total_bits: f64,
    pub null_bits: f64,
    pub saved_percent: f64,
}

impl Footer {
    pub fn new(model_bits: f64, data_bits: f64, null_bits: f64) -> Self {
        let total_bits = model_bits + data_bits;
        Footer { model_bits, data_bits, total_bits, null_bits, saved_percent: saved_percent(total_bits, null_bits) }
    }
}

/// `%L`: percentage of bits saved relative to the null model.
pub fn saved_percent(total_bits: f64, null_bits: f64) -> f64 {
    100.0 * (1.0 - total_bits / null_bits)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ModelFile {
    pub alphabet: Option<Vec<String>>,
    pub rules: Vec<RuleLine>,
    pub footer: Option<Footer>,
}

fn parse_field<T: std::str::FromStr>(value: &str, key: &str, path: &Path, line: usize) -> Result<T> {
    value.parse().map_err(|_| Error::parse(path, line, format!("bad value '{value}' for {key}")))
}

fn parse_rule_line(content: &str, path: &Path, line: usize) -> Result<RuleLine> {
    let mut fields = content.split('\t');
    let body = fields.next().unwrap_or_default();
    let tokens: Vec<&str> = body.split_whitespace().collect();
    let arrow = tokens
        .iter()
        .position(|&t| t == ARROW)
        .ok_or_else(|| Error::parse(path, line, "expected 'head -> tail'"))?;
    let head = match &tokens[..arrow] {
        [t] if *t == EMPTY_HEAD => Vec::new(),
        [] => return Err(Error::parse(path, line, "empty head must be written as '-'")),
        hs => hs.to_vec(),
    };
    let tail = &tokens[arrow + 1..];
    if tail.is_empty() {
        return Err(Error::parse(path, line, "rule tail is empty"));
    }
    if let Some(bad) = head.iter().chain(tail).find(|t| !valid_token(t)) {
        return Err(Error::parse(path, line, format!("reserved token '{bad}'")));
    }
    let mut rule = RuleLine::new(
        head.iter().map(|s| s.to_string()).collect(),
        tail.iter().map(|s| s.to_string()).collect(),
    );
    for field in fields {
        let (key, value) = field
            .trim()
            .split_once(' ')
            .ok_or_else(|| Error::parse(path, line, format!("expected 'key value', got '{field}'")))?;
        match key {
            "supp" => rule.support = Some(parse_field(value, key, path, line)?),
            "conf" => rule.confidence = Some(parse_field(value, key, path, line)?),
            "usage" => rule.usage = Some(parse_field(value, key, path, line)?),
            _ => return Err(Error::parse(path, line, format!("unknown rule field '{key}'"))),
        }
    }
    Ok(rule)
}

fn parse_footer(content: &str, path: &Path, line: usize) -> Result<Footer> {
    let mut values = [None; 5];
    const KEYS: [&str; 5] = ["model", "data", "total", "null", "saved"];
    for field in content.split('\t').skip(1) {
        let (key, value) = field
            .trim()
            .split_once(' ')
            .ok_or_else(|| Error::parse(path, line, format!("expected 'key value', got '{field}'")))?;
        let slot = KEYS
            .iter()
            .position(|&k| k == key)
            .ok_or_else(|| Error::parse(path, line, format!("unknown footer field '{key}'")))?;
        values[slot] = Some(parse_field::<f64>(value, key, path, line)?);
    }
    match values {
        [Some(model_bits), Some(data_bits), Some(total_bits), Some(null_bits), Some(saved_percent)] => {
            Ok(Footer { model_bits, data_bits, total_bits, null_bits, saved_percent })
        }
        _ => Err(Error::parse(path, line, "footer needs model, data, total, null and saved")),
    }
}

impl ModelFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut model = ModelFile::default();
        let mut seen_rule = false;
        for (line, content) in content_lines(text) {
            if model.footer.is_some() {
                return Err(Error::parse(path, line, "content after the footer"));
            }
            let is_rule = content.split_whitespace().any(|t| t == ARROW);
            if let Some(rest) = content.strip_prefix("alphabet").filter(|r| !is_rule && (r.is_empty() || r.starts_with(char::is_whitespace))) {
                if seen_rule || model.alphabet.is_some() {
                    return Err(Error::parse(path, line, "the alphabet must come first"));
                }
                let tokens: Vec<String> = rest.split_whitespace().map(String::from).collect();
                if let Some(bad) = tokens.iter().find(|t| !valid_token(t)) {
                    return Err(Error::parse(path, line, format!("reserved token '{bad}'")));
                }
                Vocabulary::from_tokens(tokens.iter().cloned())
                    .map_err(|t| Error::parse(path, line, format!("token '{t}' listed twice")))?;
                model.alphabet = Some(tokens);
            } else if !is_rule && content.split_whitespace().next() == Some("bits") {
                model.footer = Some(parse_footer(content, path, line)?);
            } else {
                model.rules.push(parse_rule_line(content, path, line)?);
                seen_rule = true;
            }
        }
        Ok(model)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&read_file(path)?, path)
    }

    /// The vocabulary of the alphabet header, if present.
    pub fn vocabulary(&self) -> Option<Vocabulary> {
        self.alphabet.as_ref().map(|a| Vocabulary::from_tokens(a.iter().cloned()).expect("checked when parsed"))
    }

    /// Non-singleton rules as a rule set over `vocab`; every singleton of the
    /// vocabulary is included.
    pub fn rule_set(&self, vocab: &Vocabulary, path: &Path) -> Result<RuleSet> {
        let mut rules = Vec::with_capacity(self.rules.len());
        for line in &self.rules {
            let rule = line.to_rule(vocab).map_err(|m| Error::Usage(format!("{}: rule '{line}': {m}", path.display())))?;
            rules.push(rule);
        }
        Ok(RuleSet::with_rules(vocab.len(), rules)?)
    }

    /// Rules as token lines over a shared vocabulary, interning new tokens.
    pub fn rules_interned(&self, vocab: &mut Vocabulary) -> Vec<Rule> {
        self.rules
            .iter()
            .map(|l| {
                let head: Vec<_> = l.head.iter().map(|t| vocab.intern(t)).collect();
                let tail: Vec<_> = l.tail.iter().map(|t| vocab.intern(t)).collect();
                Rule::new(Pattern::new(head), Pattern::new(tail)).expect("parsed tails are non-empty")
            })
            .collect()
    }
}

impl fmt::Display for ModelFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(alphabet) = &self.alphabet {
            writeln!(f, "alphabet {}", alphabet.join(" "))?;
        }
        for rule in &self.rules {
            writeln!(f, "{rule}")?;
        }
        if let Some(b) = &self.footer {
            writeln!(
                f,
                "bits\tmodel {}\tdata {}\ttotal {}\tnull {}\tsaved {}",
                b.model_bits, b.data_bits, b.total_bits, b.null_bits, b.saved_percent
            )?;
        }
        Ok(())
    }
}
