mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::p;
use invgraph::census::{census, walk, walk_census, CycleSequence};
use invgraph::{build_inverse_graph, InverseGraph};

#[test]
fn algebraic_census_equals_walk_enumeration() {
    for v in [11u64, 13, 31, 61, 101] {
        let g = build_inverse_graph(p(v));
        let algebraic: BTreeMap<CycleSequence, Vec<u64>> = census(&g, 9)
            .into_iter()
            .filter(|r| r.count > 0)
            .map(|r| (r.sequence, r.starts))
            .collect();
        assert_eq!(algebraic, walk_census(&g, 9), "p={v}");
    }
}

#[test]
fn short_odd_cycles_are_scarce() {
    for v in [11u64, 13, 31, 61, 101, 311, 1009] {
        let g = build_inverse_graph(p(v));
        let rows = census(&g, 9);
        for k in 1..=4usize {
            let n: usize = rows.iter().filter(|r| r.sequence.len() == 2 * k + 1).map(|r| r.count).sum();
            assert!(n <= 1 << (2 * k), "p={v} length {} has {n}", 2 * k + 1);
        }
    }
}

/// Vertex cycle up to rotation and reversal.
fn normalize(mut c: Vec<u64>) -> Vec<u64> {
    let i = (0..c.len()).min_by_key(|&i| c[i]).unwrap();
    c.rotate_left(i);
    if c[c.len() - 1] < c[1] {
        c[1..].reverse();
    }
    c
}

fn geometric(g: &InverseGraph) -> BTreeMap<Vec<u64>, BTreeSet<CycleSequence>> {
    let mut by_cycle: BTreeMap<Vec<u64>, BTreeSet<CycleSequence>> = BTreeMap::new();
    for row in census(g, 9) {
        for &x in &row.starts {
            let path = walk(&row.sequence, x, g).unwrap();
            by_cycle.entry(normalize(path)).or_default().insert(row.sequence.clone());
        }
    }
    by_cycle
}

#[test]
fn canonical_sequences_name_distinct_cycles_without_parallel_edges() {
    for v in [11u64, 17, 23, 29, 41, 47, 53, 59, 71, 83, 89, 101, 107, 113] {
        assert_eq!(v % 3, 2);
        for (cycle, seqs) in geometric(&build_inverse_graph(p(v))) {
            assert_eq!(seqs.len(), 1, "p={v} {cycle:?} {seqs:?}");
        }
    }
}

#[test]
fn shared_cycles_use_a_doubled_edge() {
    for v in [13u64, 19, 31, 37, 43, 61, 67, 73, 79, 97, 103] {
        let pr = p(v);
        let g = build_inverse_graph(pr);
        for (cycle, seqs) in geometric(&g) {
            if seqs.len() == 1 {
                continue;
            }
            // some edge is both a +/-1 step and an R step
            let doubled = (0..cycle.len()).any(|i| {
                let (x, y) = (cycle[i], cycle[(i + 1) % cycle.len()]);
                let step = (x + 1) % v == y || (y + 1) % v == x;
                step && invgraph::graph::inverse_step(x, pr) == y
            });
            assert!(doubled, "p={v} {cycle:?} {seqs:?}");
        }
    }
}
