mod common;

use std::collections::BTreeMap;

use common::*;
use libdex_core::exact::{int, ratio, Rational};
use libdex_core::scoring::weight_sensitivity;
use libdex_core::weighting::{aggregate_ballots, ballot_from_ordering, mean_ranks};
use libdex_core::{builtin_catalog, AttributeId};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

#[test]
fn mean_ranks_match_counting_oracle() {
    let mut runner = TestRunner::new(Config::with_cases(1000));
    let strategy = (3usize..=20).prop_flat_map(|n| proptest::collection::vec(0u64..8, n));
    runner
        .run(&strategy, |values| {
            let counts: BTreeMap<AttributeId, u64> =
                values.iter().enumerate().map(|(i, v)| (AttributeId(i as u32 + 1), *v)).collect();
            let ranks = mean_ranks(&counts).unwrap();
            let oracle = brute_force_double_ranks(&values);
            for (i, doubled) in oracle.iter().enumerate() {
                prop_assert_eq!(ranks.get(AttributeId(i as u32 + 1)).unwrap(), &ratio(*doubled, 2));
            }
            let n = values.len() as i64;
            prop_assert_eq!(ranks.rank_sum(), ratio(n * (n + 1), 2));
            Ok(())
        })
        .unwrap();
}

#[test]
fn ballots_average_positions() {
    let ids: Vec<AttributeId> = (1..=4).map(AttributeId).collect();
    let b1 = ballot_from_ordering(&ids);
    let reversed: Vec<_> = ids.iter().rev().copied().collect();
    let b2 = ballot_from_ordering(&reversed);
    let ranks = aggregate_ballots(&[b1.clone(), b2]).unwrap();
    assert!(ranks.iter().all(|(_, r)| *r == ratio(5, 2)));
    let single = aggregate_ballots(&[b1]).unwrap();
    assert_eq!(single.get(AttributeId(1)), Some(&int(4)));
}

#[test]
fn crossovers_agree_with_sweep() {
    let catalog = builtin_catalog();
    let mut runner = TestRunner::new(Config::with_cases(200));
    let strategy = (
        profile_strategy("A".into()),
        profile_strategy("B".into()),
        weights_strategy(),
        1u32..=15,
    );
    let with_crossover = std::cell::Cell::new(0);
    runner
        .run(&strategy, |(a, b, w, attr)| {
            let attr = AttributeId(attr);
            let report = weight_sensitivity(&catalog, &a, &b, &w, attr, &int(0), &int(3)).unwrap();
            let (ma, mb, fw) = (float_means(&catalog, &a), float_means(&catalog, &b), float_weights(&w));
            let swept = sweep_crossover(&ma, &mb, &fw, attr, 0.0, 3.0, 1e-3);
            match (report.crossovers.first(), swept) {
                (None, None) => {}
                (Some(c), Some(g)) => {
                    with_crossover.set(with_crossover.get() + 1);
                    prop_assert!((rational_to_f64(&c.g_value) - g).abs() <= 2e-3, "{:?} vs {}", c.g_value, g);
                }
                (analytic, swept) => prop_assert!(false, "analytic {:?}, sweep {:?}", analytic, swept),
            }
            Ok(())
        })
        .unwrap();
    assert!(with_crossover.get() > 0, "no generated pair crossed over");
}

#[test]
fn synthetic_crossover_is_exact() {
    let catalog = builtin_catalog();
    let mk = |name: &str, ratings: &[(&str, i64)]| {
        let mut p = libdex_core::LibraryProfile::new(libdex_core::LibraryInfo::named(name), catalog.version.clone());
        for (c, v) in ratings {
            p.assessments
                .push(libdex_core::Assessment::new(*c, libdex_core::Rating::from_int(*v).unwrap()));
        }
        p
    };
    // a trails by 1 on attribute 2 at weight 1, leads by 1/2 per unit of g_8.
    let a = mk("A", &[("2a", 0), ("8a", 1), ("8b", 0)]);
    let b = mk("B", &[("2a", 1), ("8a", 0), ("8b", 0)]);
    let w = libdex_core::WeightVector::uniform(catalog.attribute_ids());
    let r = weight_sensitivity(&catalog, &a, &b, &w, AttributeId(8), &int(0), &int(3)).unwrap();
    assert_eq!(r.crossovers.len(), 1);
    let expected: Rational = int(2);
    assert_eq!(r.crossovers[0].g_value, expected);
    assert_eq!(r.crossovers[0].leader_before, "B");
    assert_eq!(r.crossovers[0].leader_after, "A");
}
