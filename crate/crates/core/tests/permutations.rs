use forcible::perm::{all_patterns, pattern_count, pattern_density, rooted_pattern_indicator};
use forcible::{Permutation, RootedPermutation};
use itertools::Itertools;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn perm_strategy(max_len: usize) -> impl Strategy<Value = Permutation> {
    (1..=max_len)
        .prop_flat_map(|n| Just((0..n as u32).collect::<Vec<_>>()).prop_shuffle())
        .prop_map(|v| Permutation::from_zero_based(v).unwrap())
}

/// Counts occurrences by listing every index subset.
fn brute_count(sigma: &Permutation, pi: &Permutation) -> u64 {
    (0..pi.len())
        .combinations(sigma.len())
        .filter(|idx| pi.induced_pattern(idx).unwrap() == *sigma)
        .count() as u64
}

proptest! {
    #[test]
    fn densities_of_all_patterns_sum_to_one(pi in perm_strategy(9), k in 1usize..=4) {
        prop_assume!(k <= pi.len());
        let total = all_patterns(k).unwrap().iter().fold(BigRational::zero(), |acc, s| acc + pattern_density(s, &pi));
        prop_assert_eq!(total, BigRational::one());
    }

    #[test]
    fn pruned_count_matches_subset_listing(pi in perm_strategy(9), sigma in perm_strategy(4)) {
        prop_assert_eq!(pattern_count(&sigma, &pi), brute_count(&sigma, &pi));
    }

    #[test]
    fn rank_round_trip(pi in perm_strategy(9)) {
        prop_assert_eq!(Permutation::from_rank(pi.len(), pi.rank()).unwrap(), pi.clone());
        let shown = pi.to_string();
        prop_assert_eq!(shown.parse::<Permutation>().unwrap(), pi);
    }

    #[test]
    fn inversions_are_21_occurrences(pi in perm_strategy(9)) {
        prop_assert_eq!(pi.inversions() as u64, pattern_count(&"21".parse().unwrap(), &pi));
    }
}

#[test]
fn rooted_indicator_agrees_with_rooted_counts() {
    // summing the indicator over root and other positions counts occurrences once per root choice
    let pi: Permutation = "2413".parse().unwrap();
    for sigma in all_patterns(3).unwrap() {
        let mut total = 0;
        for root in 0..3 {
            let rooted = RootedPermutation::new(sigma.clone(), root).unwrap();
            for idx in (0..4).combinations(3) {
                let others: Vec<usize> = idx.iter().enumerate().filter(|&(i, _)| i != root).map(|(_, &v)| v).collect();
                if rooted_pattern_indicator(&rooted, &pi, idx[root], &others).unwrap() {
                    total += 1;
                }
            }
        }
        assert_eq!(total, 3 * pattern_count(&sigma, &pi));
    }
}

#[test]
fn lexicographic_rank_order() {
    let all = all_patterns(4).unwrap();
    assert!(all.windows(2).all(|w| w[0].one_line() < w[1].one_line()));
    assert!(all.iter().enumerate().all(|(i, p)| p.rank() == i as u64));
}
