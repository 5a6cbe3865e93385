//! Coding properties: lossless round trip, cover exactness, integer code
//! lengths and the adaptive code.

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rulemine_core::codec::{
    data_length, decode, prequential_from_counts, prequential_length, serialize_streams, stream_length_sequential,
    universal_int, C0,
};
use rulemine_core::cover::{cover, Cover, SelectedWindow};
use rulemine_core::windows::{OccurrenceCache, RuleWindow};
use rulemine_core::{Event, Pattern, Rule, RuleSet, SearchParams, Sequence, SequenceDatabase};

fn seqs(alphabet: u32, max_len: usize) -> impl Strategy<Value = Vec<Vec<u32>>> {
    prop::collection::vec(prop::collection::vec(0..alphabet, 1..=max_len), 1..=3)
}

fn rules(alphabet: u32) -> impl Strategy<Value = Vec<(Vec<u32>, Vec<u32>)>> {
    prop::collection::vec(
        (prop::collection::vec(0..alphabet, 0..=2), prop::collection::vec(0..alphabet, 1..=3)),
        0..=5,
    )
}

fn build(alphabet: u32, seqs: &[Vec<u32>], rules: &[(Vec<u32>, Vec<u32>)]) -> (SequenceDatabase, RuleSet) {
    let db = SequenceDatabase::new(seqs.iter().map(|s| Sequence::from_ids(s)).collect(), alphabet as usize).unwrap();
    let rules = rules.iter().map(|(h, t)| Rule::new(Pattern::from_ids(h), Pattern::from_ids(t)).unwrap());
    (db.clone(), RuleSet::with_rules(alphabet as usize, rules).unwrap())
}

/// A cover chosen in random order from all best windows, completed with
/// singletons. Unlike the greedy cover it need not prefer long tails.
fn random_cover(db: &SequenceDatabase, rules: &RuleSet, params: &SearchParams, seed: u64) -> Cover {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let occs = OccurrenceCache::new().for_rules(db, rules, params);
    let mut pool: Vec<SelectedWindow> = occs
        .iter()
        .enumerate()
        .filter(|(_, o)| !o.rule().is_singleton())
        .flat_map(|(rule, o)| o.best_windows().iter().map(move |w| SelectedWindow { rule, window: w.clone() }))
        .collect();
    pool.shuffle(&mut rng);
    let mut taken: Vec<Vec<bool>> = db.sequences().iter().map(|s| vec![false; s.len()]).collect();
    let mut chosen = Vec::new();
    for w in pool {
        let t = &mut taken[w.window.seq];
        if w.window.tail_positions.iter().any(|&p| t[p - 1]) || rand::Rng::gen_bool(&mut rng, 0.3) {
            continue;
        }
        for &p in &w.window.tail_positions {
            t[p - 1] = true;
        }
        chosen.push(w);
    }
    for (s, t) in taken.iter().enumerate() {
        for (p, &used) in t.iter().enumerate() {
            if !used {
                let e = db.sequence(s).at(p + 1);
                let rule = rules.index_of(&Rule::singleton(e)).unwrap();
                let window = RuleWindow { seq: s, head: None, k: p + 1, l: p + 1, tail_positions: vec![p + 1] };
                chosen.push(SelectedWindow { rule, window });
            }
        }
    }
    Cover::from_windows(db, rules.len(), chosen).unwrap()
}

fn lengths(db: &SequenceDatabase) -> Vec<usize> {
    db.sequences().iter().map(|s| s.len()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn covers_round_trip(alphabet in 1u32..=10, raw in seqs(10, 200), rs in rules(10), seed in any::<u64>()) {
        let raw: Vec<Vec<u32>> = raw.into_iter().map(|s| s.into_iter().map(|e| e % alphabet).collect()).collect();
        let rs: Vec<_> = rs.into_iter()
            .map(|(h, t)| (h.into_iter().map(|e| e % alphabet).collect(), t.into_iter().map(|e| e % alphabet).collect()))
            .collect();
        let (db, rules) = build(alphabet, &raw, &rs);
        let params = SearchParams::default();
        for c in [cover(&db, &rules, &params), random_cover(&db, &rules, &params, seed)] {
            prop_assert!(c.is_exact());
            let streams = serialize_streams(&db, &rules, &c, &params).unwrap();
            let back = decode(&streams, &rules, &lengths(&db), &params).unwrap();
            prop_assert_eq!(&back, &db);

            // counts form and sequential form of the data cost agree
            let cost = data_length(&db, &rules, &c, &params).unwrap();
            let (t, d, g) = stream_length_sequential(&rules, &streams).unwrap();
            prop_assert!((cost.l_triggers - t).abs() < 1e-6);
            prop_assert!((cost.l_delays - d).abs() < 1e-6);
            prop_assert!((cost.l_gaps - g).abs() < 1e-6);
        }
    }

    #[test]
    fn cover_is_exact_and_within_budgets(
        raw in seqs(5, 60),
        rs in rules(5),
        max_gap in prop_oneof![Just(0.0), Just(1.0), Just(2.0)],
        max_delay in prop_oneof![Just(0.0), Just(1.0), Just(2.0)],
    ) {
        let (db, rules) = build(5, &raw, &rs);
        let params = SearchParams { max_gap, max_delay, ..SearchParams::default() };
        let c = cover(&db, &rules, &params);
        let mut hits = vec![];
        for s in db.sequences() {
            hits.push(vec![0usize; s.len()]);
        }
        for w in c.windows() {
            let rule = rules.get(w.rule);
            let win = &w.window;
            prop_assert_eq!(win.tail_positions.len(), rule.tail().len());
            prop_assert!(win.tail_gaps() <= params.gap_budget(rule.tail().len()));
            let seq = db.sequence(win.seq).events();
            let tail: Vec<Event> = win.tail_positions.iter().map(|&p| seq[p - 1]).collect();
            prop_assert_eq!(&tail[..], rule.tail().as_slice());
            if let Some((i, j)) = win.head {
                prop_assert!(j < win.k);
                prop_assert!(win.delay() <= params.delay_budget(rule.tail().len()));
                prop_assert!((j - i + 1) - rule.head().len() <= params.gap_budget(rule.head().len()));
            }
            for &p in &win.tail_positions {
                hits[win.seq][p - 1] += 1;
            }
        }
        prop_assert!(hits.iter().flatten().all(|&h| h == 1));
        prop_assert_eq!(c.usage().iter().sum::<usize>(), c.windows().len());
    }

    #[test]
    fn prequential_is_order_free(stream in prop::collection::vec(0u8..4, 0..60), seed in any::<u64>()) {
        let mut shuffled = stream.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = prequential_length(&stream, 4).unwrap();
        let b = prequential_length(&shuffled, 4).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
        let mut counts = [0u64; 4];
        for &s in &stream {
            counts[s as usize] += 1;
        }
        prop_assert!((a - prequential_from_counts(&counts, 4)).abs() < 1e-9);
    }
}

#[test]
fn universal_code_satisfies_kraft() {
    let sum: f64 = (1..=1_000_000u64).map(|n| (-universal_int(n)).exp2()).sum();
    assert!(sum <= 1.0, "Kraft sum {sum}");
    assert!((universal_int(1) - C0.log2()).abs() < 1e-6);
}
