//! Randomized checks of rbr against the exhaustive oracle.

use std::collections::BTreeSet;

use proptest::prelude::*;
use tagstack_core::cluster::{brute_force_optimal, random_equal_partition, rbr, ClusterConfig, Partition};
use tagstack_core::corpus::{Dataset, Stack, TagAssignment};
use tagstack_core::eval::evaluate_user;
use tagstack_core::vectorize::{criterion_i2, PageVector, TagVocabulary};

fn vectors(pages: &[BTreeSet<String>]) -> Vec<PageVector> {
    let vocab = TagVocabulary::from_tags(pages.iter().flatten());
    pages
        .iter()
        .map(|t| PageVector::from_tags(t, &vocab).unwrap())
        .collect()
}

fn tag_sets(max_pages: usize) -> impl Strategy<Value = Vec<BTreeSet<String>>> {
    prop::collection::vec(prop::collection::btree_set(0u8..8, 0..4), 1..=max_pages).prop_map(|v| {
        v.into_iter()
            .map(|s| s.into_iter().map(|t| format!("t{t}")).collect())
            .collect()
    })
}

/// Best I2 gain from moving one page to another cluster, keeping every
/// cluster non-empty.
fn best_single_move(p: &Partition, vs: &[PageVector]) -> f64 {
    let base = criterion_i2(p, vs).unwrap();
    let sizes = p.sizes();
    let mut best = f64::NEG_INFINITY;
    for i in 0..p.len() {
        let from = p.cluster_of(i);
        if sizes[from] < 2 {
            continue;
        }
        for to in 0..p.k() {
            if to == from {
                continue;
            }
            let mut a = p.assignment().to_vec();
            a[i] = to;
            let moved = Partition::new(a).unwrap();
            best = best.max(criterion_i2(&moved, vs).unwrap() - base);
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rbr_is_near_optimal_and_locally_optimal(pages in tag_sets(8), k in 1usize..=4, seed in any::<u64>()) {
        let vs = vectors(&pages);
        let cfg = ClusterConfig { seed, ..ClusterConfig::default() };
        let p = rbr(&vs, k, &cfg).unwrap();
        prop_assert_eq!(p.k(), k.min(vs.len()));
        let got = criterion_i2(&p, &vs).unwrap();
        let opt = criterion_i2(&brute_force_optimal(&vs, k.min(vs.len())).unwrap(), &vs).unwrap();
        prop_assert!(got <= opt + 1e-9);
        prop_assert!(best_single_move(&p, &vs) <= 1e-9);
        prop_assert_eq!(rbr(&vs, k, &cfg).unwrap(), p);
    }

    #[test]
    fn random_partitions_are_balanced(n in 1usize..40, k in 1usize..12, seed in any::<u64>()) {
        let p = random_equal_partition(n, k, seed).unwrap();
        let sizes = p.sizes();
        prop_assert_eq!(sizes.len(), k.min(n));
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn degenerate_k(pages in tag_sets(10), split in 1usize..10) {
        let n = pages.len();
        let split = split.min(n);
        let mut b = Dataset::builder();
        for (i, t) in pages.iter().enumerate() {
            b.add_assignment(TagAssignment::new("u", format!("p{i}"), t)).unwrap();
        }
        b.add_stack(Stack::new("u", "s", (0..split).map(|i| format!("p{i}")))).unwrap();
        let d = b.build();
        let v = d.user("u").unwrap();
        let cfg = ClusterConfig::default();
        for s in evaluate_user(&v, 1, &cfg).unwrap() {
            prop_assert_eq!(s.recall, 1.0);
        }
        for s in evaluate_user(&v, n, &cfg).unwrap() {
            prop_assert_eq!(s.precision, 1.0);
        }
        // K beyond n is clamped, never an error
        let over = evaluate_user(&v, n + 3, &cfg).unwrap();
        prop_assert_eq!(over.len(), 1);
        prop_assert_eq!(over[0].k_used, n);
    }
}
