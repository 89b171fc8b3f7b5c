use std::collections::{BTreeMap, BTreeSet};

use memchain_core::model::Row;
use memchain_core::{
    build_model, distance, export_partition, lift, one_sided_gaps, proposition1_check,
    sample_model, simulate, unroll, Alphabet, BehaviorSource, CategoricalDistribution, Letter,
    MemoryMarkovModel, Method, SampleSet, ScalarInitial, SimulationRequest, Sturmian, SystemSpec,
    TableDriven, Word, DEFAULT_SUPPORT_CAP,
};
use proptest::prelude::*;

fn all_words(k: usize, n: usize) -> Vec<Vec<Letter>> {
    let mut words = vec![Vec::new()];
    for _ in 0..n {
        words = words
            .into_iter()
            .flat_map(|w| {
                (0..k as Letter).map(move |c| {
                    let mut next = w.clone();
                    next.push(c);
                    next
                })
            })
            .collect();
    }
    words
}

/// Random model over every `memory`-word of a `k`-letter alphabet. Weights of
/// zero drop a transition; an all-zero row is a dead end.
fn model_strategy() -> impl Strategy<Value = MemoryMarkovModel> {
    (2usize..=3, 1usize..=2)
        .prop_flat_map(|(k, memory)| {
            let states = k.pow(memory as u32);
            (
                Just(k),
                Just(memory),
                prop::collection::vec(
                    prop::collection::vec(prop_oneof![Just(0u32), 1u32..10], k),
                    states,
                ),
                prop::collection::vec(prop_oneof![Just(0u32), 1u32..10], states),
            )
        })
        .prop_filter_map(
            "needs live initial mass",
            |(k, memory, weights, initial)| {
                let states = all_words(k, memory);
                let mut rows = BTreeMap::new();
                for (state, w) in states.iter().zip(&weights) {
                    let total: u32 = w.iter().sum();
                    let row: Row = w
                        .iter()
                        .enumerate()
                        .filter(|&(_, &x)| x > 0)
                        .map(|(c, &x)| (c as Letter, x as f64 / total as f64))
                        .collect();
                    rows.insert(Word::from(state.clone()), row);
                }
                let live = states
                    .iter()
                    .zip(&initial)
                    .zip(&weights)
                    .any(|((_, &i), w)| i > 0 && w.iter().any(|&x| x > 0));
                if !live {
                    return None;
                }
                let init = CategoricalDistribution::from_weights(
                    states
                        .iter()
                        .zip(&initial)
                        .map(|(s, &i)| (Word::from(s.clone()), i as f64)),
                )
                .ok()?;
                MemoryMarkovModel::from_parts(Alphabet::numbered(k).unwrap(), memory, rows, init)
                    .ok()
            },
        )
}

/// Path masses of every word of length `n`, by direct multiplication.
fn brute_force_behavior(model: &MemoryMarkovModel, n: usize) -> BTreeMap<Vec<Letter>, f64> {
    let ell = model.memory();
    all_words(model.alphabet().len(), n)
        .into_iter()
        .filter_map(|w| {
            let mut p = model.initial().probability(&w[..ell]);
            for k in ell..n {
                p *= model.transition(&w[k - ell..k], w[k]);
            }
            (p > 0.0).then_some((w, p))
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unroll_matches_brute_force(model in model_strategy(), extra in 0usize..4) {
        let n = model.memory() + extra;
        let Ok(u) = unroll(&model, n, DEFAULT_SUPPORT_CAP) else {
            // Every path died before n letters.
            prop_assert!(brute_force_behavior(&model, n).is_empty());
            return Ok(());
        };
        let oracle = brute_force_behavior(&model, n);
        let surviving: f64 = oracle.values().sum();
        prop_assert!((1.0 - surviving - u.absorbed).abs() < 1e-9);
        prop_assert_eq!(u.distribution.support_size(), oracle.len());
        for (w, p) in &oracle {
            prop_assert!((u.distribution.probability(w) - p / surviving).abs() < 1e-9);
        }
    }

    #[test]
    fn lift_commutes_with_unroll(model in model_strategy(), k in 1usize..=2, more in 0usize..3) {
        let h = model.memory() + k + more;
        let Ok(lifted) = lift(&model, model.memory() + k) else {
            prop_assert!(unroll(&model, model.memory() + k, DEFAULT_SUPPORT_CAP).is_err());
            return Ok(());
        };
        prop_assert_eq!(lifted.memory(), model.memory() + k);
        match (unroll(&model, h, DEFAULT_SUPPORT_CAP), unroll(&lifted, h, DEFAULT_SUPPORT_CAP)) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.distribution.support_size(), b.distribution.support_size());
                for (w, p) in a.distribution.iter() {
                    prop_assert!((b.distribution.probability(w) - p).abs() < 1e-9);
                }
                let d = distance(BehaviorSource::Model(&model), BehaviorSource::Model(&lifted), h, &Method::exact()).unwrap();
                prop_assert_eq!(d.distance, 0.0);
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "unroll disagreed: {:?} vs {:?}", a.is_ok(), b.is_ok()),
        }
    }

    #[test]
    fn estimator_matches_window_counts(
        words in prop::collection::vec(prop::collection::vec(0u8..3, 7), 1..20),
        memory in 1usize..=3,
    ) {
        let samples = SampleSet::from_words(Alphabet::numbered(3).unwrap(), words.iter().cloned().map(Word::from)).unwrap();
        let model = build_model(&samples, memory).unwrap();
        let mut from: BTreeMap<&[Letter], usize> = BTreeMap::new();
        let mut pair: BTreeMap<&[Letter], usize> = BTreeMap::new();
        let mut seen: BTreeSet<&[Letter]> = BTreeSet::new();
        for w in &words {
            for k in 0..=w.len() - memory {
                seen.insert(&w[k..k + memory]);
            }
            for k in 0..w.len() - memory {
                *from.entry(&w[k..k + memory]).or_default() += 1;
                *pair.entry(&w[k..=k + memory]).or_default() += 1;
            }
        }
        prop_assert_eq!(model.state_count(), seen.len());
        prop_assert_eq!(model.transition_count(), pair.len());
        for (yc, &n) in &pair {
            let (y, c) = yc.split_at(memory);
            let expected = n as f64 / from[y] as f64;
            prop_assert!((model.transition(y, c[0]) - expected).abs() < 1e-12);
        }
        for state in model.states() {
            let total: f64 = model.row(state).unwrap().iter().map(|&(_, p)| p).sum();
            prop_assert!(model.row(state).unwrap().is_empty() || (total - 1.0).abs() < 1e-9);
        }
        for h in memory..7 {
            let report = proposition1_check(&samples, h).unwrap();
            prop_assert_eq!((report.left, report.right), (0.0, 0.0));
        }
    }

    #[test]
    fn model_samples_lie_in_the_exact_support(model in model_strategy(), seed in any::<u64>()) {
        let n = model.memory() + 3;
        if let Ok(u) = unroll(&model, n, DEFAULT_SUPPORT_CAP) {
            let drawn = sample_model(&model, 50, n, seed).unwrap();
            for w in drawn.words() {
                prop_assert!(u.distribution.contains(w));
            }
        }
    }

    #[test]
    fn distance_is_symmetric(a in model_strategy(), b in model_strategy()) {
        prop_assume!(a.alphabet() == b.alphabet());
        let h = a.memory().max(b.memory()) + 2;
        if let (Ok(ab), Ok(ba)) = (
            distance(BehaviorSource::Model(&a), BehaviorSource::Model(&b), h, &Method::exact()),
            distance(BehaviorSource::Model(&b), BehaviorSource::Model(&a), h, &Method::exact()),
        ) {
            prop_assert_eq!(ab.swapped(), ba.clone());
            prop_assert!((0.0..=2.0).contains(&ab.distance));
            let pa = unroll(&a, h, DEFAULT_SUPPORT_CAP).unwrap().distribution;
            let pb = unroll(&b, h, DEFAULT_SUPPORT_CAP).unwrap().distribution;
            prop_assert_eq!(one_sided_gaps(&pa, &pb).unwrap(), (ab.left, ab.right));
        }
    }
}

#[test]
fn estimator_recovers_known_chain() {
    let rows = vec![
        vec![0.5, 0.3, 0.2],
        vec![0.1, 0.6, 0.3],
        vec![0.4, 0.0, 0.6],
    ];
    let alphabet = Alphabet::new(["a", "b", "c"]).unwrap();
    let chain =
        TableDriven::new(alphabet, vec![0, 1, 2], rows.clone(), vec![1.0 / 3.0; 3]).unwrap();
    let samples = simulate(
        &SystemSpec::TableDriven(chain),
        &SimulationRequest::new(200, 100, 11),
    )
    .unwrap();
    let model = build_model(&samples, 1).unwrap();
    let visits = |i: u8| {
        samples
            .words()
            .map(|w| w[..w.len() - 1].iter().filter(|&&c| c == i).count())
            .sum::<usize>()
    };
    for (i, row) in rows.iter().enumerate() {
        let n = visits(i as u8) as f64;
        for (j, &p) in row.iter().enumerate() {
            let se = (p * (1.0 - p) / n).sqrt();
            let estimate = model.transition(&[i as u8], j as u8);
            assert!(
                (estimate - p).abs() <= 3.0 * se,
                "P({j}|{i}) = {estimate}, expected {p} +- {}",
                3.0 * se
            );
        }
    }
}

fn sturmian_samples(n: usize, len: usize, keep_states: bool) -> SampleSet {
    simulate(
        &SystemSpec::Sturmian(Sturmian::default()),
        &SimulationRequest::new(n, len, 3).keep_states(keep_states),
    )
    .unwrap()
}

#[test]
fn sturmian_has_n_plus_one_factors() {
    let samples = sturmian_samples(2_000, 200, false);
    for n in 1..=10 {
        let factors: BTreeSet<&[Letter]> = samples.words().flat_map(|w| w.windows(n)).collect();
        assert_eq!(factors.len(), n + 1, "length {n}");
    }
}

#[test]
fn sturmian_partition_has_memory_plus_one_cells() {
    let system = Sturmian::default();
    for ell in 1..=10 {
        let samples = sturmian_samples(10_000, 6 * ell.max(2), true);
        let part = export_partition(&samples, ell).unwrap();
        let cells: BTreeSet<&Word> = part.labels.iter().collect();
        assert_eq!(cells.len(), ell + 1, "memory {ell}");
        let model = build_model(&samples, ell).unwrap();
        for (x, label) in part.iter() {
            assert_eq!(label.last(), Some(system.label(x[0])));
            assert!(model.is_state(label));
        }
    }
}

#[test]
fn sturmian_memory_one_partition_is_the_labelling() {
    let samples = simulate(
        &SystemSpec::Sturmian(
            Sturmian::new(
                Sturmian::DEFAULT_THETA,
                ScalarInitial::Uniform {
                    low: 0.0,
                    high: std::f64::consts::TAU,
                },
            )
            .unwrap(),
        ),
        &SimulationRequest::new(500, 20, 8).keep_states(true),
    )
    .unwrap();
    let part = export_partition(&samples, 1).unwrap();
    for (x, label) in part.iter() {
        let expected = if x[0] < Sturmian::DEFAULT_THETA { 0 } else { 1 };
        assert_eq!(label.letters(), &[expected]);
    }
}
