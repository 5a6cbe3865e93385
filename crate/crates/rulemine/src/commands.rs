//! The work behind each subcommand, returning text so it can be tested
//! without a process boundary.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use rulemine_core::codec::{Evaluation, Scorer};
use rulemine_core::eval::{evaluate, EvalReport};
use rulemine_core::miner::{mine_from_patterns, mine_with, MineOptions, MineResult};
use rulemine_core::synth::{generate, GenConfig, GroundTruth};
use rulemine_core::{Event, RuleSet, SearchParams, SequenceDatabase};

use crate::error::{write_file, Error, Result};
use crate::format::{format_database, parse_database, read_database, read_patterns, Footer, ModelFile, RuleLine};
use crate::vocab::Vocabulary;

/// A model file for `rules` on `db`: every rule with its support,
/// confidence and usage in the cover, plus the encoded lengths.
pub fn model_file(db: &SequenceDatabase, vocab: &Vocabulary, rules: &RuleSet, params: &SearchParams) -> Result<ModelFile> {
    let mut scorer = Scorer::new(db, *params)?;
    let eval = scorer.evaluate(rules)?;
    let null = scorer.total(&RuleSet::singletons(db.alphabet_size()))?;
    Ok(describe(&mut scorer, vocab, rules, &eval, null))
}

fn describe(scorer: &mut Scorer<'_>, vocab: &Vocabulary, rules: &RuleSet, eval: &Evaluation, null: f64) -> ModelFile {
    let lines = rules
        .iter()
        .enumerate()
        .map(|(idx, rule)| {
            let stats = scorer.occurrences(rule).stats();
            RuleLine {
                head: vocab.pattern_tokens(rule.head()),
                tail: vocab.pattern_tokens(rule.tail()),
                support: Some(stats.support),
                confidence: Some(stats.confidence),
                usage: Some(eval.cover.usage()[idx]),
            }
        })
        .collect();
    ModelFile {
        alphabet: Some(vocab.tokens().to_vec()),
        rules: lines,
        footer: Some(Footer::new(eval.model.total, eval.data.total, null)),
    }
}

pub struct MineOutput {
    pub result: MineResult,
    pub model: ModelFile,
    pub elapsed: Duration,
}

impl MineOutput {
    /// One-line run summary.
    pub fn summary(&self) -> String {
        let t = &self.result.trace;
        let footer = self.model.footer.expect("mined models carry a footer");
        format!(
            "rules {}\tpasses {}\tcandidates {}\tevaluations {}\tconverged {}\ttotal {:.3}\tnull {:.3}\tsaved {:.3}%\ttime {:.3}s",
            self.result.rules.non_singletons().len(),
            t.passes,
            t.candidates_tested,
            t.evaluations,
            t.converged,
            footer.total_bits,
            footer.null_bits,
            footer.saved_percent,
            self.elapsed.as_secs_f64()
        )
    }

    /// Candidates generated during the run, one per line with their parent,
    /// slot and p-value.
    pub fn candidate_dump(&self, vocab: &Vocabulary) -> String {
        let mut out = String::new();
        for c in &self.result.trace.candidates {
            let _ = writeln!(
                out,
                "{}\tparent {}\tslot {}\tevent {}\tp {}",
                vocab.format_rule(&c.rule),
                vocab.format_rule(&c.parent),
                c.slot,
                vocab.token(c.inserted),
                c.p_value
            );
        }
        out
    }
}

pub fn mine(db_path: &Path, params: &SearchParams, options: &MineOptions) -> Result<(MineOutput, Vocabulary)> {
    let (db, vocab) = read_database(db_path)?;
    let start = Instant::now();
    let result = mine_with(&db, params, options)?;
    let elapsed = start.elapsed();
    let mut scorer = Scorer::new(&db, *params)?;
    let eval = scorer.evaluate(&result.rules)?;
    let model = describe(&mut scorer, &vocab, &result.rules, &eval, result.trace.null_score);
    Ok((MineOutput { result, model, elapsed }, vocab))
}

pub fn candidates(db_path: &Path, patterns_path: &Path, params: &SearchParams) -> Result<MineOutput> {
    let (db, vocab) = read_database(db_path)?;
    let patterns = read_patterns(patterns_path, &vocab)?;
    let start = Instant::now();
    let result = mine_from_patterns(&db, &patterns, params)?;
    let elapsed = start.elapsed();
    let mut scorer = Scorer::new(&db, *params)?;
    let eval = scorer.evaluate(&result.rules)?;
    let model = describe(&mut scorer, &vocab, &result.rules, &eval, result.trace.null_score);
    Ok(MineOutput { result, model, elapsed })
}

/// Database and model read together. With an alphabet header the database
/// must use only its tokens; otherwise the database defines the alphabet.
pub fn load_scored(db_path: &Path, model_path: &Path) -> Result<(SequenceDatabase, Vocabulary, RuleSet)> {
    let model = ModelFile::read(model_path)?;
    let text = crate::error::read_file(db_path)?;
    let (db, vocab) = match model.vocabulary() {
        Some(mut vocab) => (parse_database(&text, db_path, &mut vocab, true)?, vocab),
        None => {
            let mut vocab = Vocabulary::new();
            (parse_database(&text, db_path, &mut vocab, false)?, vocab)
        }
    };
    let rules = model.rule_set(&vocab, model_path)?;
    Ok((db, vocab, rules))
}

pub fn score(db_path: &Path, model_path: &Path, params: &SearchParams) -> Result<Footer> {
    let (db, vocab, rules) = load_scored(db_path, model_path)?;
    let footer = model_file(&db, &vocab, &rules, params)?.footer.expect("footer is always set");
    Ok(footer)
}

pub fn format_score(f: &Footer) -> String {
    format!(
        "L(R)\t{:.6}\nL(D|R)\t{:.6}\ntotal\t{:.6}\nnull\t{:.6}\n%L\t{:.4}\n",
        f.model_bits, f.data_bits, f.total_bits, f.null_bits, f.saved_percent
    )
}

/// The greedy cover as tab-separated rows: sequence (1-based), rule, head
/// window `i j` (`-` for empty heads), tail window `k l`, tail positions.
pub fn cover(db_path: &Path, model_path: &Path, params: &SearchParams) -> Result<String> {
    let (db, vocab, rules) = load_scored(db_path, model_path)?;
    let eval = Scorer::new(&db, *params)?.evaluate(&rules)?;
    let mut windows: Vec<_> = eval.cover.windows().iter().collect();
    windows.sort_by_key(|w| (w.window.seq, w.window.tail_positions[0]));
    let mut out = String::from("seq\trule\ti\tj\tk\tl\tpositions\n");
    for w in windows {
        let win = &w.window;
        let (i, j) = win.head.map_or(("-".to_string(), "-".to_string()), |(i, j)| (i.to_string(), j.to_string()));
        let positions: Vec<String> = win.tail_positions.iter().map(|p| p.to_string()).collect();
        let _ = writeln!(
            out,
            "{}\t{}\t{i}\t{j}\t{}\t{}\t{}",
            win.seq + 1,
            vocab.format_rule(rules.get(w.rule)),
            win.k,
            win.l,
            positions.join(",")
        );
    }
    Ok(out)
}

/// Compares a mined model with a ground truth, both read as rule lists over
/// one shared vocabulary. Singleton rules are dropped from the mined side
/// when `exclude_singletons` is set.
pub fn eval(mined_path: &Path, truth_path: &Path, exclude_singletons: bool) -> Result<EvalReport> {
    let mined = ModelFile::read(mined_path)?;
    let truth = ModelFile::read(truth_path)?;
    let mut vocab = Vocabulary::new();
    let truth_rules = truth.rules_interned(&mut vocab);
    let mined_rules = mined.rules_interned(&mut vocab);
    Ok(evaluate(&truth_rules, &mined_rules, exclude_singletons))
}

pub fn format_eval(report: &EvalReport) -> String {
    format!("recall\tprecision\tf1\n{:.6}\t{:.6}\t{:.6}\n", report.recall, report.precision, report.f1)
}

/// Event tokens of generated data.
pub fn event_token(e: Event) -> String {
    e.0.to_string()
}

/// The ground truth as a rule list with the configured confidences.
pub fn truth_file(truth: &GroundTruth) -> ModelFile {
    let tokens = |p: &rulemine_core::Pattern| p.iter().map(|&e| event_token(e)).collect::<Vec<_>>();
    let rules = truth
        .rules
        .rules
        .iter()
        .map(|p| RuleLine { confidence: Some(p.confidence), ..RuleLine::new(tokens(p.rule.head()), tokens(p.rule.tail())) })
        .collect();
    ModelFile { alphabet: None, rules, footer: None }
}

pub fn config_echo(config: &GenConfig) -> String {
    let c = config;
    format!(
        "alphabet_size = {}\nnum_rules = {}\nhead_size = {}\ntail_size = {}\nconfidence = {}\nheads_as_patterns = {}\n\
         initial_length = {}\nnoise_fraction = {}\ndelay_prob = {}\ngap_prob = {}\ndestructive_noise_prob = {}\n\
         max_gap = {}\nmax_delay = {}\nlexicographic = {}\nseed = {}\n",
        c.alphabet_size,
        c.num_rules,
        c.head_size,
        c.tail_size,
        c.confidence,
        c.heads_as_patterns,
        c.initial_length,
        c.noise_fraction,
        c.delay_prob,
        c.gap_prob,
        c.destructive_noise_prob,
        c.max_gap,
        c.max_delay,
        c.lexicographic,
        c.seed
    )
}

/// Writes `<prefix>.db`, `<prefix>.truth` and `<prefix>.config`.
pub fn gen(config: &GenConfig, prefix: &Path) -> Result<GroundTruth> {
    let (db, truth) = generate(config)?;
    let vocab = Vocabulary::from_tokens((0..config.alphabet_size as u32).map(|e| event_token(Event(e))))
        .expect("numeric tokens are distinct");
    let with_ext = |ext: &str| {
        let mut p = prefix.as_os_str().to_owned();
        p.push(ext);
        std::path::PathBuf::from(p)
    };
    write_file(&with_ext(".db"), &format_database(&db, &vocab))?;
    write_file(&with_ext(".truth"), &truth_file(&truth).to_string())?;
    write_file(&with_ext(".config"), &config_echo(config))?;
    Ok(truth)
}

/// Checks that a probability flag lies in `[0, 1]`.
pub fn check_probability(name: &str, p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::Usage(format!("{name} must lie in [0, 1], got {p}")))
    }
}
