//! Desk-scale versions of the synthetic experiments: score sanity check,
//! data without structure, destructive noise, rule confidence and random
//! rule triggers.

use rulemine_core::codec::Scorer;
use rulemine_core::eval::{evaluate, EvalReport};
use rulemine_core::miner::{mine, MineTrace};
use rulemine_core::synth::{generate, uniform_sequence, GenConfig};
use rulemine_core::windows::rule_stats;
use rulemine_core::{Pattern, Rule, RuleSet, SearchParams};

use crate::error::Result;

/// Total scores of the planted model and of the three pattern-only
/// alternatives on one dataset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SanityTrial {
    pub truth: f64,
    /// `{-> X, -> Y}` per pair.
    pub separate: f64,
    /// `{-> XY}` per pair.
    pub joined: f64,
    /// `{-> X, -> XY}` per pair.
    pub nested: f64,
}

impl SanityTrial {
    pub fn truth_wins(&self) -> bool {
        self.truth < self.separate && self.truth < self.joined && self.truth < self.nested
    }
}

/// Data with `pairs` planted `{-> X, X -> Y}` pairs.
pub fn sanity_config(pairs: usize, seed: u64) -> GenConfig {
    GenConfig { num_rules: pairs, seed, ..GenConfig::default() }
}

pub fn sanity_trial(config: &GenConfig, params: &SearchParams) -> Result<SanityTrial> {
    let (db, truth) = generate(config)?;
    let headed: Vec<Rule> = truth.rules.rules().into_iter().filter(|r| !r.has_empty_head()).collect();
    let omega = db.alphabet_size();
    let model = |make: &dyn Fn(&Rule) -> Vec<Rule>| -> Result<RuleSet> {
        Ok(RuleSet::with_rules(omega, headed.iter().flat_map(make))?)
    };
    let pattern = |p: &Pattern| Rule::pattern(p.clone()).expect("planted patterns are non-empty");
    let xy = |r: &Rule| pattern(&r.head().concat(r.tail()));
    let mut scorer = Scorer::new(&db, *params)?;
    Ok(SanityTrial {
        truth: scorer.total(&truth.rules.rule_set()?)?,
        separate: scorer.total(&model(&|r| vec![pattern(r.head()), pattern(r.tail())])?)?,
        joined: scorer.total(&model(&|r| vec![xy(r)])?)?,
        nested: scorer.total(&model(&|r| vec![pattern(r.head()), xy(r)])?)?,
    })
}

/// Non-singleton rules mined from one uniformly random sequence, with their
/// empirical confidence.
#[derive(Clone, Debug, PartialEq)]
pub struct NoStructureRun {
    pub length: usize,
    pub rules: Vec<(Rule, f64)>,
    pub score: f64,
    pub trace: MineTrace,
}

pub fn no_structure_run(alphabet_size: usize, length: usize, seed: u64, params: &SearchParams) -> Result<NoStructureRun> {
    let db = uniform_sequence(alphabet_size, length, seed);
    let result = mine(&db, params)?;
    let rules = result
        .rules
        .non_singletons()
        .iter()
        .map(|r| (r.clone(), rule_stats(r, &db, params).confidence))
        .collect();
    Ok(NoStructureRun { length, rules, score: result.score, trace: result.trace })
}

/// The default generator configuration scaled down to desk size:
/// |S| = 3000, |Ω| = 150, 8 rules, confidence 0.75.
pub fn desk_config(seed: u64) -> GenConfig {
    GenConfig { alphabet_size: 150, num_rules: 8, initial_length: 3000, confidence: 0.75, seed, ..GenConfig::default() }
}

/// Heads and tails of size one with no planted heads, so that rules fire
/// only where their head occurs by chance.
pub fn random_trigger_config(seed: u64) -> GenConfig {
    GenConfig { head_size: 1, tail_size: 1, heads_as_patterns: false, ..desk_config(seed) }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryRun {
    pub report: EvalReport,
    pub mined_rules: usize,
    pub score: f64,
    pub trace: MineTrace,
}

/// Generates data, mines it and compares the result with the planted rules,
/// ignoring mined singletons.
pub fn recovery_run(config: &GenConfig, params: &SearchParams) -> Result<RecoveryRun> {
    let (db, truth) = generate(config)?;
    let result = mine(&db, params)?;
    let mined = result.rules.non_singletons().to_vec();
    Ok(RecoveryRun {
        report: evaluate(&truth.rules.rules(), &mined, true),
        mined_rules: mined.len(),
        score: result.score,
        trace: result.trace,
    })
}

/// Mean F1 over `seeds` and the mean number of mined rules.
pub fn mean_recovery(make: impl Fn(u64) -> GenConfig, seeds: &[u64], params: &SearchParams) -> Result<(f64, f64)> {
    let mut f1 = 0.0;
    let mut rules = 0.0;
    for &seed in seeds {
        let run = recovery_run(&make(seed), params)?;
        f1 += run.report.f1;
        rules += run.mined_rules as f64;
    }
    let n = seeds.len() as f64;
    Ok((f1 / n, rules / n))
}
