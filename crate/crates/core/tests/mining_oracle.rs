use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use seqcompare_core::dataset::Dataset;
use seqcompare_core::mining::{brute_force_mine, mine, MiningConfig, MiningMode, Pattern};

type Events = Vec<String>;

/// Contiguity-free containment by dynamic programming over prefixes.
fn contains(s: &[String], p: &[String]) -> bool {
    let mut matched = 0;
    for e in s {
        if matched < p.len() && *e == p[matched] {
            matched += 1;
        }
    }
    matched == p.len()
}

/// Every distinct subsequence of `s` up to length `max`, by bitmask.
fn subsequences(s: &[String], max: usize) -> BTreeSet<Events> {
    let n = s.len();
    (1u32..(1 << n))
        .filter(|m| (m.count_ones() as usize) <= max)
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).map(|i| s[i].clone()).collect())
        .collect()
}

/// Patterns with their support sets, computed from scratch.
fn oracle(d: &Dataset, cfg: &MiningConfig) -> Vec<(Events, BTreeSet<String>)> {
    let seqs: Vec<(String, Events)> = d
        .sequences()
        .iter()
        .map(|s| (s.id.clone(), s.types().map(String::from).collect()))
        .collect();
    let candidates: BTreeSet<Events> = seqs.iter().flat_map(|(_, s)| subsequences(s, cfg.max_pattern_length)).collect();
    let frequent: BTreeMap<Events, BTreeSet<String>> = candidates
        .into_iter()
        .map(|p| {
            let ids = seqs.iter().filter(|(_, s)| contains(s, &p)).map(|(id, _)| id.clone()).collect();
            (p, ids)
        })
        .filter(|(_, ids): &(Events, BTreeSet<String>)| ids.len() as f64 * 100.0 >= cfg.min_support_pct * seqs.len() as f64)
        .collect();
    let mut out: Vec<(Events, BTreeSet<String>)> = frequent
        .iter()
        .filter(|(p, _)| {
            cfg.mode == MiningMode::Frequent
                || !frequent.keys().any(|q| q.len() > p.len() && contains(q, p))
        })
        .map(|(p, ids)| (p.clone(), ids.clone()))
        .collect();
    out.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(&b.0)));
    out
}

fn flatten(ps: &[Pattern]) -> Vec<(Events, BTreeSet<String>)> {
    ps.iter().map(|p| (p.events.clone(), p.support_ids.clone())).collect()
}

fn dataset_strategy() -> impl Strategy<Value = Vec<Vec<String>>> {
    let event = prop::sample::select(vec!["a", "b", "c", "d", "e"]).prop_map(String::from);
    prop::collection::vec(prop::collection::vec(event, 1..=8), 1..=20)
}

fn mode_strategy() -> impl Strategy<Value = MiningMode> {
    prop::sample::select(vec![MiningMode::Maximal, MiningMode::Frequent])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mine_matches_oracle(
        lists in dataset_strategy(),
        pct in prop::sample::select(vec![10.0, 25.0, 33.3, 50.0, 100.0]),
        mode in mode_strategy(),
        max_len in 1usize..=8,
    ) {
        let d = Dataset::from_type_lists(&lists);
        let cfg = MiningConfig { min_support_pct: pct, max_pattern_length: max_len, mode };
        let mined = mine(&d, &cfg).unwrap();
        let expected = oracle(&d, &cfg);
        prop_assert_eq!(&flatten(&mined), &expected);
        prop_assert_eq!(flatten(&brute_force_mine(&d, &cfg).unwrap()), expected);
        for p in &mined {
            prop_assert!((p.support_pct * d.len() as f64 - 100.0 * p.support() as f64).abs() <= 1e-9);
        }
    }

    #[test]
    fn maximal_patterns_are_frequent(lists in dataset_strategy(), pct in 10.0f64..=100.0) {
        let d = Dataset::from_type_lists(&lists);
        let maximal = mine(&d, &MiningConfig::new(pct, MiningMode::Maximal)).unwrap();
        let frequent: BTreeSet<Events> = mine(&d, &MiningConfig::new(pct, MiningMode::Frequent))
            .unwrap()
            .into_iter()
            .map(|p| p.events)
            .collect();
        for p in &maximal {
            prop_assert!(frequent.contains(&p.events));
        }
        // every frequent pattern is covered by some maximal one
        for f in &frequent {
            prop_assert!(maximal.iter().any(|m| contains(&m.events, f)));
        }
    }

    #[test]
    fn lowering_support_only_adds_patterns(lists in dataset_strategy(), hi in 20.0f64..=100.0, drop in 0.0f64..20.0) {
        let d = Dataset::from_type_lists(&lists);
        let at = |pct: f64| -> BTreeSet<Events> {
            mine(&d, &MiningConfig::new(pct, MiningMode::Frequent)).unwrap().into_iter().map(|p| p.events).collect()
        };
        prop_assert!(at(hi).is_subset(&at(hi - drop)));
    }
}
