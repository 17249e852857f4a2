mod common;

use common::props;
use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn scaling_weights_keeps_order(
        a in profile_strategy("A".into()),
        b in profile_strategy("B".into()),
        w in weights_strategy(),
        k in 1i64..50,
        d in 1i64..7,
    ) {
        props::scaling_keeps_order(&a, &b, &w, k, d)?;
    }

    #[test]
    fn assessment_order_does_not_matter(p in profile_strategy("P".into()), w in weights_strategy(), seed in any::<u64>()) {
        props::permutation_invariant(&p, &w, seed)?;
    }

    #[test]
    fn total_within_bounds(p in profile_strategy("P".into()), w in weights_strategy()) {
        props::within_bounds(&p, &w)?;
    }

    #[test]
    fn raising_one_rating_never_lowers_total(
        p in profile_strategy("P".into()),
        w in weights_strategy(),
        pick in any::<proptest::sample::Index>(),
    ) {
        props::monotone_in_rating(&p, &w, pick)?;
    }

    #[test]
    fn rebalance_is_idempotent_and_keeps_ratios(
        w in weights_strategy(),
        pins in proptest::collection::btree_set(1u32..=15, 0..5),
        bump in 1i64..4,
    ) {
        props::rebalance_idempotent_ratio_preserving(&w, &pins, bump)?;
    }
}
