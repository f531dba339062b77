//! Distributional checks of the Prim exploration on small graphs.

use std::collections::BTreeMap;

use cmtree::discrete::{critical_p, prim_order, zeros_from_weights};
use cmtree::verify::uniform_categories_p;
use cmtree::Weights;

/// Conditionally on its vertex set, a component not containing the root is
/// entered at a uniform label.
#[test]
fn left_most_label_is_uniform() {
    let n = 8;
    let lambda = 1.2;
    assert!((critical_p(n, lambda) - 0.2).abs() < 0.01);
    // (vertex set) -> counts of the left-most label's position in the set
    let mut tally: BTreeMap<Vec<usize>, Vec<u64>> = BTreeMap::new();
    for seed in 0..60_000u64 {
        let w = Weights::keyed(n, seed);
        let prim = prim_order(&w).unwrap();
        let mut z = zeros_from_weights(&prim, lambda).unwrap();
        z.push(n + 1);
        for b in z.windows(2).skip(1) {
            let mut set: Vec<usize> = prim.order[b[0] - 1..b[1] - 1].to_vec();
            if set.len() < 2 {
                continue;
            }
            let first = set[0];
            set.sort_unstable();
            let pos = set.iter().position(|&x| x == first).unwrap();
            tally.entry(set.clone()).or_insert_with(|| vec![0; set.len()])[pos] += 1;
        }
    }
    let mut by_size: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    let mut tested = 0;
    for (set, counts) in &tally {
        let total: u64 = counts.iter().sum();
        if total >= 20 * set.len() as u64 {
            assert!(uniform_categories_p(counts) > 1e-4, "{set:?} {counts:?}");
            tested += 1;
        }
        let agg = by_size.entry(set.len()).or_insert_with(|| vec![0; set.len()]);
        for (a, c) in agg.iter_mut().zip(counts) {
            *a += c;
        }
    }
    assert!(tested >= 20, "only {tested} vertex sets had enough replicas");
    for (m, counts) in &by_size {
        assert!(uniform_categories_p(counts) > 1e-4, "size {m}: {counts:?}");
    }
}

/// The root component is always entered at label 1.
#[test]
fn root_component_starts_at_label_one() {
    for seed in 0..200 {
        let prim = prim_order(&Weights::keyed(12, seed)).unwrap();
        assert_eq!(prim.order[0], 1);
    }
}
