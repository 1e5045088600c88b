//! GYO ear removal.

use std::collections::BTreeSet;

use crate::canonical::CanonicalHypergraph;

/// What is left after exhaustive ear removal: repeatedly drop vertices
/// that occur in exactly one edge and edges contained in another edge.
pub fn gyo_reduce(edges: &[Vec<usize>]) -> Vec<BTreeSet<usize>> {
    let mut edges: Vec<BTreeSet<usize>> = edges
        .iter()
        .map(|e| e.iter().copied().collect())
        .collect();
    loop {
        let mut changed = false;
        let mut occurrences = std::collections::HashMap::<usize, usize>::new();
        for e in &edges {
            for &v in e {
                *occurrences.entry(v).or_default() += 1;
            }
        }
        for e in &mut edges {
            let before = e.len();
            e.retain(|v| occurrences[v] > 1);
            changed |= e.len() != before;
        }
        let mut i = 0;
        while i < edges.len() {
            let subsumed = edges[i].is_empty()
                || edges
                    .iter()
                    .enumerate()
                    .any(|(j, f)| j != i && edges[i].is_subset(f));
            if subsumed {
                edges.swap_remove(i);
                changed = true;
            } else {
                i += 1;
            }
        }
        if !changed {
            return edges;
        }
    }
}

/// α-acyclicity.
pub fn gyo_is_acyclic(h: &CanonicalHypergraph) -> bool {
    gyo_reduce(&h.edges).is_empty()
}
