//! Synthetic data with planted rules.
//!
//! A database is one sequence built in two steps. Uniform noise is mixed with
//! the tails of the empty-head rules, written as blocks at random places.
//! Then every head window of a rule with a head is, with the rule's
//! confidence, followed by an inserted copy of its tail. Delays and gaps are
//! geometric: a position is skipped with the configured probability, again
//! and again, up to the window budgets.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ruleset::RuleSet;
use crate::types::{Event, Pattern, Rule, Sequence, SequenceDatabase};
use crate::windows::{minimal_windows_within, RuleWindow};

#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub alphabet_size: usize,
    /// Number of rules with a head; with `head_size == 0`, of empty-head rules.
    pub num_rules: usize,
    pub head_size: usize,
    pub tail_size: usize,
    pub confidence: f64,
    /// Also plant `-> X` for every rule `X -> Y`.
    pub heads_as_patterns: bool,
    pub initial_length: usize,
    /// Share of the initial sequence drawn uniformly from the alphabet.
    pub noise_fraction: f64,
    pub delay_prob: f64,
    pub gap_prob: f64,
    /// Per-event probability of replacing the final event by a uniform one.
    pub destructive_noise_prob: f64,
    /// Gap ratio bounding head windows and planted gaps.
    pub max_gap: f64,
    /// Delay ratio bounding planted delays.
    pub max_delay: f64,
    /// Sort the events of every rule.
    pub lexicographic: bool,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            alphabet_size: 500,
            num_rules: 20,
            head_size: 2,
            tail_size: 3,
            confidence: 0.75,
            heads_as_patterns: true,
            initial_length: 10_000,
            noise_fraction: 0.5,
            delay_prob: 0.2,
            gap_prob: 0.1,
            destructive_noise_prob: 0.0,
            max_gap: 2.0,
            max_delay: 2.0,
            lexicographic: false,
            seed: 0,
        }
    }
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {p}")))
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        check_prob("confidence", self.confidence)?;
        check_prob("noise fraction", self.noise_fraction)?;
        check_prob("delay probability", self.delay_prob)?;
        check_prob("gap probability", self.gap_prob)?;
        check_prob("destructive noise probability", self.destructive_noise_prob)?;
        if self.alphabet_size == 0 || self.tail_size == 0 || self.initial_length == 0 {
            return Err(Error::InvalidParameter("alphabet size, tail size and length must be positive".into()));
        }
        if !(self.max_gap >= 0.0 && self.max_delay >= 0.0 && self.max_gap.is_finite() && self.max_delay.is_finite()) {
            return Err(Error::InvalidParameter("gap and delay ratios must be finite and non-negative".into()));
        }
        Ok(())
    }

    fn budget(ratio: f64, len: usize) -> usize {
        libm::floor(ratio * len as f64 + 1e-9) as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlantedRule {
    pub rule: Rule,
    pub confidence: f64,
}

/// The generating rules, without the singletons.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedRules {
    pub alphabet_size: usize,
    pub rules: Vec<PlantedRule>,
}

impl PlantedRules {
    pub fn rules(&self) -> Vec<Rule> {
        self.rules.iter().map(|p| p.rule.clone()).collect()
    }

    /// The planted rules together with all singletons.
    pub fn rule_set(&self) -> Result<RuleSet> {
        RuleSet::with_rules(self.alphabet_size, self.rules())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlantedWindow {
    /// Index into [`PlantedRules::rules`].
    pub rule: usize,
    pub window: RuleWindow,
    pub drawn_delay: usize,
    pub drawn_gaps: Vec<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TriggerTally {
    pub triggers: usize,
    pub hits: usize,
}

impl TriggerTally {
    pub fn realized_confidence(&self) -> Option<f64> {
        (self.triggers > 0).then(|| self.hits as f64 / self.triggers as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub rules: PlantedRules,
    /// Inserted tails with their positions in the final sequence.
    pub planted_windows: Vec<PlantedWindow>,
    /// Triggers and hits per rule, zero for empty-head rules.
    pub tallies: Vec<TriggerTally>,
    /// Length of the sequence before tails were inserted.
    pub initial_length: usize,
    /// Noise events in that initial sequence.
    pub noise_events: usize,
}

fn random_pattern(rng: &mut ChaCha8Rng, len: usize, alphabet: usize) -> Vec<Event> {
    (0..len).map(|_| Event(rng.gen_range(0..alphabet as u32))).collect()
}

/// Draws `num_rules` distinct rules with uniformly chosen events.
pub fn gen_ruleset(config: &GenConfig) -> Result<PlantedRules> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rules: Vec<PlantedRule> = Vec::new();
    let mut attempts = 0usize;
    while rules.iter().filter(|p| p.rule.head().len() == config.head_size).count() < config.num_rules {
        attempts += 1;
        if attempts > 1000 * (config.num_rules + 1) {
            return Err(Error::Generation(format!(
                "cannot draw {} distinct rules over {} events",
                config.num_rules, config.alphabet_size
            )));
        }
        let mut events = random_pattern(&mut rng, config.head_size + config.tail_size, config.alphabet_size);
        if config.lexicographic {
            events.sort_unstable();
        }
        let tail = events.split_off(config.head_size);
        let rule = Rule::new(Pattern::new(events), Pattern::new(tail)).expect("tail size is positive");
        if rules.iter().any(|p| p.rule == rule) {
            continue;
        }
        rules.push(PlantedRule { rule, confidence: if config.head_size == 0 { 1.0 } else { config.confidence } });
    }
    if config.heads_as_patterns && config.head_size > 0 {
        let heads: Vec<Rule> =
            rules.iter().map(|p| Rule::pattern(p.rule.head().clone()).expect("head is non-empty")).collect();
        for rule in heads {
            if !rule.is_singleton() && !rules.iter().any(|p| p.rule == rule) {
                rules.push(PlantedRule { rule, confidence: 1.0 });
            }
        }
    }
    Ok(PlantedRules { alphabet_size: config.alphabet_size, rules })
}

fn geometric(rng: &mut ChaCha8Rng, p: f64, cap: usize) -> usize {
    let mut n = 0;
    while n < cap && rng.gen::<f64>() < p {
        n += 1;
    }
    n
}

struct Insertion {
    /// Number of original events preceding the inserted one.
    anchor: usize,
    order: (usize, usize, usize),
    event: Event,
}

/// Generates one sequence from `rules` following `config`.
pub fn gen_data(config: &GenConfig, rules: &PlantedRules) -> Result<(SequenceDatabase, GroundTruth)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let omega = config.alphabet_size as u32;
    let patterns: Vec<&Pattern> =
        rules.rules.iter().map(|p| &p.rule).filter(|r| r.has_empty_head() && !r.is_singleton()).map(|r| r.tail()).collect();

    // initial sequence: noise plus pattern blocks
    let length = config.initial_length;
    let mut noise_count =
        if patterns.is_empty() { length } else { libm::round(config.noise_fraction * length as f64) as usize };
    let mut remaining = length - noise_count.min(length);
    let shortest = patterns.iter().map(|p| p.len()).min().unwrap_or(0);
    if remaining > 0 && shortest > remaining {
        return Err(Error::Generation(format!(
            "no pattern of at most {remaining} events fits the non-noise part of the sequence"
        )));
    }
    let mut blocks: Vec<&Pattern> = Vec::new();
    while remaining > 0 {
        let p = patterns[rng.gen_range(0..patterns.len())];
        if p.len() > remaining {
            noise_count += remaining;
            break;
        }
        remaining -= p.len();
        blocks.push(p);
    }
    let noise: Vec<Event> = (0..noise_count).map(|_| Event(rng.gen_range(0..omega))).collect();
    let mut anchored: Vec<(usize, &Pattern)> = blocks.iter().map(|&b| (rng.gen_range(0..=noise_count), b)).collect();
    anchored.sort_by_key(|&(a, _)| a);
    let mut initial: Vec<Event> = Vec::with_capacity(length);
    let mut used = 0usize;
    for (anchor, block) in anchored {
        while used < anchor {
            initial.push(noise[used]);
            used += 1;
        }
        let mut budget = GenConfig::budget(config.max_gap, block.len());
        for (q, &e) in block.iter().enumerate() {
            if q > 0 {
                let g = geometric(&mut rng, config.gap_prob, budget.min(noise_count - used));
                budget -= g;
                initial.extend_from_slice(&noise[used..used + g]);
                used += g;
            }
            initial.push(e);
        }
    }
    initial.extend_from_slice(&noise[used..]);

    // tails after triggers, drawn on the initial sequence
    let n = initial.len();
    let mut insertions: Vec<Insertion> = Vec::new();
    let mut pending: Vec<(usize, (usize, usize), usize, Vec<usize>, usize)> = Vec::new();
    let mut tallies = alloc::vec![TriggerTally::default(); rules.rules.len()];
    for (r, planted) in rules.rules.iter().enumerate() {
        let rule = &planted.rule;
        if rule.has_empty_head() {
            continue;
        }
        let head_budget = GenConfig::budget(config.max_gap, rule.head().len());
        let tail = rule.tail();
        for (i, j) in minimal_windows_within(rule.head(), &initial, head_budget) {
            tallies[r].triggers += 1;
            if rng.gen::<f64>() >= planted.confidence {
                continue;
            }
            tallies[r].hits += 1;
            let delay = geometric(&mut rng, config.delay_prob, GenConfig::budget(config.max_delay, tail.len()));
            let mut gap_budget = GenConfig::budget(config.max_gap, tail.len());
            let mut gaps = Vec::with_capacity(tail.len().saturating_sub(1));
            let mut anchor = (j + delay).min(n);
            let first = insertions.len();
            for (q, &e) in tail.iter().enumerate() {
                if q > 0 {
                    let g = geometric(&mut rng, config.gap_prob, gap_budget);
                    gap_budget -= g;
                    gaps.push(g);
                    anchor = (anchor + g).min(n);
                }
                insertions.push(Insertion { anchor, order: (j, r, q), event: e });
            }
            pending.push((r, (i, j), first, gaps, delay));
        }
    }

    // merge, tracking final positions
    let mut by_anchor: Vec<usize> = (0..insertions.len()).collect();
    by_anchor.sort_by_key(|&x| (insertions[x].anchor, insertions[x].order));
    let mut final_seq: Vec<Event> = Vec::with_capacity(n + insertions.len());
    let mut original_at = alloc::vec![0usize; n];
    let mut inserted_at = alloc::vec![0usize; insertions.len()];
    let mut next = 0usize;
    for (o, &e) in initial.iter().enumerate() {
        while next < by_anchor.len() && insertions[by_anchor[next]].anchor == o {
            final_seq.push(insertions[by_anchor[next]].event);
            inserted_at[by_anchor[next]] = final_seq.len();
            next += 1;
        }
        final_seq.push(e);
        original_at[o] = final_seq.len();
    }
    for &x in &by_anchor[next..] {
        final_seq.push(insertions[x].event);
        inserted_at[x] = final_seq.len();
    }

    let planted_windows = pending
        .into_iter()
        .map(|(r, (i, j), first, drawn_gaps, drawn_delay)| {
            let len = rules.rules[r].rule.tail().len();
            let tail_positions: Vec<usize> = inserted_at[first..first + len].to_vec();
            let window = RuleWindow {
                seq: 0,
                head: Some((original_at[i - 1], original_at[j - 1])),
                k: tail_positions[0],
                l: tail_positions[len - 1],
                tail_positions,
            };
            PlantedWindow { rule: r, window, drawn_delay, drawn_gaps }
        })
        .collect();

    if config.destructive_noise_prob > 0.0 {
        for e in final_seq.iter_mut() {
            if rng.gen::<f64>() < config.destructive_noise_prob {
                *e = Event(rng.gen_range(0..omega));
            }
        }
    }

    let db = SequenceDatabase::new(alloc::vec![Sequence::new(final_seq)], config.alphabet_size)?;
    let truth = GroundTruth {
        rules: rules.clone(),
        planted_windows,
        tallies,
        initial_length: n,
        noise_events: noise_count,
    };
    Ok((db, truth))
}

/// Rule set and data from one configuration.
pub fn generate(config: &GenConfig) -> Result<(SequenceDatabase, GroundTruth)> {
    let rules = gen_ruleset(config)?;
    gen_data(config, &rules)
}

/// A uniformly random sequence of `length` events.
pub fn uniform_sequence(alphabet_size: usize, length: usize, seed: u64) -> SequenceDatabase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let events = (0..length).map(|_| Event(rng.gen_range(0..alphabet_size as u32))).collect();
    SequenceDatabase::new(alloc::vec![Sequence::new(events)], alphabet_size).expect("events are in range")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GenConfig {
        GenConfig { alphabet_size: 50, num_rules: 4, initial_length: 2000, seed: 7, ..GenConfig::default() }
    }

    #[test]
    fn ruleset_is_deterministic_and_tagged() {
        let c = GenConfig::default();
        let a = gen_ruleset(&c).unwrap();
        assert_eq!(a, gen_ruleset(&c).unwrap());
        let with_head: Vec<_> = a.rules.iter().filter(|p| !p.rule.has_empty_head()).collect();
        assert_eq!(with_head.len(), 20);
        assert!(with_head.iter().all(|p| p.confidence == 0.75 && p.rule.tail().len() == 3));
        assert_eq!(a.rules.len(), 40);
    }

    #[test]
    fn zero_head_size_gives_patterns_only() {
        let c = GenConfig { head_size: 0, ..small() };
        let rules = gen_ruleset(&c).unwrap();
        assert!(rules.rules.iter().all(|p| p.rule.has_empty_head()));
        assert_eq!(rules.rules.len(), 4);
    }

    #[test]
    fn planted_windows_match_their_rules() {
        let c = small();
        let (db, truth) = generate(&c).unwrap();
        assert_eq!(truth.initial_length, 2000);
        assert_eq!(truth.noise_events, 1000);
        let seq = db.sequence(0);
        assert_eq!(seq.len(), 2000 + truth.planted_windows.iter().map(|w| w.window.tail_positions.len()).sum::<usize>());
        assert!(!truth.planted_windows.is_empty());
        for pw in &truth.planted_windows {
            let rule = &truth.rules.rules[pw.rule].rule;
            let w = &pw.window;
            let (i, j) = w.head.unwrap();
            assert!(i <= j && j < w.k);
            assert_eq!(seq.at(i), rule.head()[0]);
            assert_eq!(seq.at(j), *rule.head().last().unwrap());
            for (q, &p) in w.tail_positions.iter().enumerate() {
                assert_eq!(seq.at(p), rule.tail()[q]);
            }
            assert!(w.delay() >= pw.drawn_delay);
            for (q, g) in pw.drawn_gaps.iter().enumerate() {
                assert!(w.tail_positions[q + 1] - w.tail_positions[q] > *g);
            }
        }
        assert_eq!(generate(&c).unwrap().0, db);
        assert_ne!(generate(&GenConfig { seed: 8, ..c }).unwrap().0, db);
    }

    #[test]
    fn pure_noise_has_no_insertions() {
        let c = GenConfig { noise_fraction: 1.0, heads_as_patterns: false, num_rules: 0, ..small() };
        let (db, truth) = generate(&c).unwrap();
        assert_eq!(db.total_events(), 2000);
        assert!(truth.planted_windows.is_empty());
    }

    #[test]
    fn invalid_probability_is_rejected() {
        let c = GenConfig { gap_prob: 1.5, ..small() };
        assert!(matches!(gen_ruleset(&c), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn infeasible_packing_is_reported() {
        let c = GenConfig { head_size: 0, tail_size: 5, initial_length: 3, noise_fraction: 0.0, ..small() };
        assert!(matches!(generate(&c), Err(Error::Generation(_))));
    }
}
