//! Generators and independent oracles shared by the integration tests and the
//! acceptance harness.
#![allow(dead_code)]

use std::collections::BTreeMap;

use libdex_core::catalog::{validate_rating, CriterionDef};
use libdex_core::exact::{int, to_f64, Rational};
use libdex_core::weighting::rebalance_weights;
use libdex_core::{builtin_catalog, Assessment, AttributeId, Catalog, LibraryInfo, LibraryProfile, Rating, WeightVector};
use proptest::prelude::*;

/// Integer ratings a criterion accepts without warnings.
pub fn clean_values(criterion: &CriterionDef) -> Vec<i64> {
    (-2..=2)
        .filter(|v| matches!(validate_rating(criterion, &int(*v)), Ok(None)))
        .collect()
}

/// Profiles over the built-in catalog; each criterion is rated with
/// probability 3/4.
pub fn profile_strategy(name: String) -> impl Strategy<Value = LibraryProfile> {
    let catalog = builtin_catalog();
    let picks: Vec<_> = catalog
        .criteria()
        .map(|c| proptest::option::weighted(0.75, proptest::sample::select(clean_values(c))))
        .collect();
    picks.prop_map(move |values| {
        let mut p = LibraryProfile::new(LibraryInfo::named(name.clone()), catalog.version.clone());
        for (c, v) in catalog.criteria().zip(values) {
            if let Some(v) = v {
                let mut a = Assessment::new(c.id.clone(), Rating::from_int(v).unwrap());
                a.note = "generated".into();
                p.assessments.push(a);
            }
        }
        p
    })
}

/// Positive weight vectors over the built-in catalog summing exactly to 15.
pub fn weights_strategy() -> impl Strategy<Value = WeightVector> {
    proptest::collection::vec(1i64..=12, 15).prop_map(|raw| {
        let ids = builtin_catalog().attribute_ids();
        let w = WeightVector::new(ids.into_iter().zip(raw.into_iter().map(int)).collect());
        rebalance_weights(&w, &Default::default()).unwrap()
    })
}

/// Mean rank by counting: 1 + #smaller + (#equal - 1) / 2, as `2 * rank`.
pub fn brute_force_double_ranks(values: &[u64]) -> Vec<i64> {
    values
        .iter()
        .map(|v| {
            let smaller = values.iter().filter(|w| *w < v).count() as i64;
            let equal = values.iter().filter(|w| *w == v).count() as i64;
            2 + 2 * smaller + (equal - 1)
        })
        .collect()
}

/// Per-attribute mean ratings in floating point, computed straight from the
/// catalog and profile.
pub fn float_means(catalog: &Catalog, profile: &LibraryProfile) -> BTreeMap<AttributeId, f64> {
    let mut out = BTreeMap::new();
    for attr in &catalog.attributes {
        let rated: Vec<f64> = attr
            .criteria
            .iter()
            .filter_map(|c| {
                profile
                    .assessments
                    .iter()
                    .find(|a| a.criterion == c.id)
                    .map(|a| to_f64(a.rating.value()))
            })
            .collect();
        if !rated.is_empty() {
            out.insert(attr.id, rated.iter().sum::<f64>() / rated.len() as f64);
        }
    }
    out
}

pub fn float_index(means: &BTreeMap<AttributeId, f64>, weights: &BTreeMap<AttributeId, f64>) -> f64 {
    means.iter().map(|(id, m)| m * weights[id]).sum()
}

pub fn float_weights(w: &WeightVector) -> BTreeMap<AttributeId, f64> {
    w.iter().map(|(k, v)| (*k, to_f64(v))).collect()
}

/// First grid point in `[lo, hi]` (step `step`) where `a - b` changes sign or
/// reaches zero from a non-zero value. `None` if the sign never changes.
pub fn sweep_crossover(
    means_a: &BTreeMap<AttributeId, f64>,
    means_b: &BTreeMap<AttributeId, f64>,
    weights: &BTreeMap<AttributeId, f64>,
    attr: AttributeId,
    lo: f64,
    hi: f64,
    step: f64,
) -> Option<f64> {
    let steps = ((hi - lo) / step).round() as usize;
    let mut w = weights.clone();
    let mut prev: Option<f64> = None;
    for k in 0..=steps {
        let g = lo + k as f64 * step;
        w.insert(attr, g);
        let d = float_index(means_a, &w) - float_index(means_b, &w);
        let d = if d.abs() < 1e-12 { 0.0 } else { d };
        if let Some(p) = prev {
            if (p != 0.0 && d == 0.0) || p * d < 0.0 {
                return Some(if d == 0.0 { g } else { g - step / 2.0 });
            }
        } else if d == 0.0 && k == 0 {
            // Tied at the lower end: a crossover only if they separate.
            let g1 = lo + step;
            w.insert(attr, g1);
            let d1 = float_index(means_a, &w) - float_index(means_b, &w);
            if d1.abs() >= 1e-12 {
                return Some(lo);
            }
        }
        prev = Some(d);
    }
    None
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    to_f64(r)
}

pub mod props {
    //! Property bodies, shared by the proptest suite and the acceptance run.

    use std::collections::BTreeSet;

    use libdex_core::exact::{int, Rational};
    use libdex_core::scoring::{compute_index, evaluate};
    use libdex_core::store::{load_profile, profile_to_json, ProfileStore};
    use libdex_core::weighting::{default_tolerance, rebalance_weights, validate_weights};
    use libdex_core::{builtin_catalog, Assessment, AttributeId, LibraryProfile, Rating, WeightVector};
    use proptest::prelude::*;
    use proptest::test_runner::TestCaseError;

    use super::clean_values;

    type Outcome = Result<(), TestCaseError>;

    pub fn scaling_keeps_order(a: &LibraryProfile, b: &LibraryProfile, w: &WeightVector, k: i64, d: i64) -> Outcome {
        let c = builtin_catalog();
        let scaled = w.scaled(&Rational::new(k.into(), d.into()));
        let before = compute_index(&c, a, w).unwrap().total.cmp(&compute_index(&c, b, w).unwrap().total);
        let after = evaluate(&c, a, &scaled).unwrap().total.cmp(&evaluate(&c, b, &scaled).unwrap().total);
        prop_assert_eq!(before, after);
        Ok(())
    }

    pub fn permutation_invariant(p: &LibraryProfile, w: &WeightVector, seed: u64) -> Outcome {
        let c = builtin_catalog();
        let mut shuffled = p.clone();
        let len = shuffled.assessments.len().max(1);
        shuffled.assessments.rotate_left(seed as usize % len);
        if seed % 2 == 0 {
            shuffled.assessments.reverse();
        }
        prop_assert_eq!(compute_index(&c, p, w).unwrap().total, compute_index(&c, &shuffled, w).unwrap().total);
        Ok(())
    }

    pub fn within_bounds(p: &LibraryProfile, w: &WeightVector) -> Outcome {
        let r = compute_index(&builtin_catalog(), p, w).unwrap();
        prop_assert!(r.total <= r.achievable_max && r.total >= r.achievable_min);
        prop_assert_eq!(r.achievable_min, -r.achievable_max.clone());
        Ok(())
    }

    /// Raising one rating to the next clean value never lowers the total.
    pub fn monotone_in_rating(p: &LibraryProfile, w: &WeightVector, pick: prop::sample::Index) -> Outcome {
        let c = builtin_catalog();
        if p.assessments.is_empty() {
            return Ok(());
        }
        let i = pick.index(p.assessments.len());
        let criterion = c.criterion(p.assessments[i].criterion.as_str()).unwrap();
        let current = p.assessments[i].rating.value().clone();
        let Some(higher) = clean_values(criterion).into_iter().find(|v| int(*v) > current) else {
            return Ok(());
        };
        let mut raised = p.clone();
        let mut a = Assessment::new(criterion.id.clone(), Rating::from_int(higher).unwrap());
        a.note = "raised".into();
        raised.assessments[i] = a;
        let before = compute_index(&c, p, w).unwrap().total;
        let after = compute_index(&c, &raised, w).unwrap().total;
        prop_assert!(after >= before);
        Ok(())
    }

    pub fn rebalance_idempotent_ratio_preserving(w: &WeightVector, pins: &BTreeSet<u32>, bump: i64) -> Outcome {
        let pinned: BTreeSet<AttributeId> = pins.iter().copied().map(AttributeId).collect();
        let mut edited = w.clone();
        for id in &pinned {
            let v = edited.get(*id).unwrap().clone();
            edited.set(*id, v * Rational::new(bump.into(), 3.into()));
        }
        let once = match rebalance_weights(&edited, &pinned) {
            Ok(v) => v,
            Err(e) => {
                prop_assert_eq!(e.code(), "INFEASIBLE_PIN");
                return Ok(());
            }
        };
        prop_assert!(validate_weights(&once, &default_tolerance()).is_ok());
        prop_assert_eq!(&rebalance_weights(&once, &pinned).unwrap(), &once);
        for id in &pinned {
            prop_assert_eq!(once.get(*id), edited.get(*id));
        }
        let free: Vec<_> = edited.attribute_ids().into_iter().filter(|id| !pinned.contains(id)).collect();
        for pair in free.windows(2) {
            let before = edited.get(pair[0]).unwrap() / edited.get(pair[1]).unwrap();
            let after = once.get(pair[0]).unwrap() / once.get(pair[1]).unwrap();
            prop_assert_eq!(before, after);
        }
        Ok(())
    }

    pub fn store_round_trip(p: &LibraryProfile) -> Outcome {
        let c = builtin_catalog();
        let dir = tempfile::tempdir().unwrap();
        let store = ProfileStore::open(dir.path()).unwrap();
        let saved = store.save_profile(&c, p, false).unwrap();
        let loaded = store.get_profile(&saved.library_id, None).unwrap();
        prop_assert_eq!(&loaded.library_profile(), p);
        prop_assert_eq!(&loaded, &saved);
        prop_assert_eq!(&load_profile(&c, &profile_to_json(p)).unwrap(), p);
        Ok(())
    }
}
