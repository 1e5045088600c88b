//! Exact treewidth up to a small bound.

use std::collections::HashSet;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use super::DEFAULT_BUDGET;
use crate::graph::UndirectedGraph;

/// Largest bound accepted; larger requests are clamped.
pub const MAX_BOUND: usize = 6;
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Treewidth {
    Exact(usize),
    /// Treewidth exceeds the bound that was asked for.
    AboveBound(usize),
    Timeout,
}

impl Treewidth {
    pub fn exact(self) -> Option<usize> {
        match self {
            Treewidth::Exact(w) => Some(w),
            _ => None,
        }
    }
}

impl std::fmt::Display for Treewidth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Treewidth::Exact(w) => write!(f, "{w}"),
            Treewidth::AboveBound(b) => write!(f, ">{b}"),
            Treewidth::Timeout => f.write_str("timeout"),
        }
    }
}

pub fn treewidth(g: &UndirectedGraph, bound: usize) -> Treewidth {
    treewidth_with_budget(g, bound, DEFAULT_BUDGET)
}

/// Self-loops do not affect treewidth except that a graph whose only edges
/// are loops reports 1, like any graph with an edge.
pub fn treewidth_with_budget(g: &UndirectedGraph, bound: usize, budget: u64) -> Treewidth {
    let bound = bound.clamp(1, MAX_BOUND);
    let proper = g.edge_count() - g.loop_count();
    if proper == 0 {
        return Treewidth::Exact(usize::from(g.edge_count() > 0));
    }
    if proper + g.components().len() == g.node_count() {
        return Treewidth::Exact(1);
    }
    if bound < 2 {
        return Treewidth::AboveBound(bound);
    }
    if series_parallel_reducible(g) {
        return Treewidth::Exact(2);
    }
    if bound < 3 {
        return Treewidth::AboveBound(bound);
    }
    // Treewidth is the maximum over biconnected components.
    let mut blocks: Vec<UndirectedGraph> = g
        .biconnected_components()
        .into_iter()
        .filter(|c| c.len() >= 3)
        .map(|c| {
            let mut vs: Vec<usize> = c.iter().flat_map(|&(u, v)| [u, v]).collect();
            vs.sort_unstable();
            vs.dedup();
            g.induced(&vs)
        })
        .collect();
    blocks.sort_by_key(|b| b.node_count());
    let mut spent = 0u64;
    let mut width = 2;
    for block in &blocks {
        if series_parallel_reducible(block) {
            continue;
        }
        let mut k = width.max(3);
        loop {
            if k > bound {
                return Treewidth::AboveBound(bound);
            }
            match decide(block, k, budget, &mut spent) {
                Some(true) => break,
                Some(false) => k += 1,
                None => return Treewidth::Timeout,
            }
        }
        width = width.max(k);
    }
    Treewidth::Exact(width)
}

/// Treewidth at most 2: delete vertices of degree at most 1 and bypass
/// vertices of degree 2 until nothing is left.
pub fn series_parallel_reducible(g: &UndirectedGraph) -> bool {
    let n = g.node_count();
    let mut adj: Vec<HashSet<usize>> = (0..n)
        .map(|v| g.neighbors(v).iter().copied().collect())
        .collect();
    let mut alive = vec![true; n];
    let mut queue: Vec<usize> = (0..n).collect();
    while let Some(v) = queue.pop() {
        if !alive[v] || adj[v].len() > 2 {
            continue;
        }
        alive[v] = false;
        let nbrs: Vec<usize> = adj[v].drain().collect();
        for &u in &nbrs {
            adj[u].remove(&v);
        }
        if let [a, b] = nbrs[..] {
            adj[a].insert(b);
            adj[b].insert(a);
        }
        queue.extend(nbrs);
    }
    alive.iter().all(|a| !a)
}

struct Search<'a> {
    k: usize,
    budget: u64,
    spent: &'a mut u64,
    failed: HashSet<FixedBitSet>,
}

/// Decide treewidth at most `k` by searching elimination orderings.
/// `None` when the budget runs out.
fn decide(g: &UndirectedGraph, k: usize, budget: u64, spent: &mut u64) -> Option<bool> {
    let n = g.node_count();
    let mut adj: Vec<FixedBitSet> = vec![FixedBitSet::with_capacity(n); n];
    for &(u, v) in g.edges() {
        if u != v {
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    let mut search = Search {
        k,
        budget,
        spent,
        failed: HashSet::new(),
    };
    let eliminated = FixedBitSet::with_capacity(n);
    search.run(adj, eliminated)
}

impl Search<'_> {
    fn run(&mut self, mut adj: Vec<FixedBitSet>, mut eliminated: FixedBitSet) -> Option<bool> {
        *self.spent += 1;
        if *self.spent > self.budget {
            return None;
        }
        let n = adj.len();
        // Safe reductions: simplicial and almost simplicial vertices of
        // degree at most k.
        loop {
            let remaining = n - eliminated.count_ones(..);
            if remaining <= self.k + 1 {
                return Some(true);
            }
            let reducible = (0..n).find(|&v| {
                !eliminated.contains(v)
                    && adj[v].count_ones(..) <= self.k
                    && almost_simplicial(&adj, v)
            });
            match reducible {
                Some(v) => eliminate(&mut adj, &mut eliminated, v),
                None => break,
            }
        }
        if self.failed.contains(&eliminated) {
            return Some(false);
        }
        let mut candidates: Vec<usize> = (0..n)
            .filter(|&v| !eliminated.contains(v) && adj[v].count_ones(..) <= self.k)
            .collect();
        candidates.sort_by_key(|&v| adj[v].count_ones(..));
        for v in candidates {
            let mut next_adj = adj.clone();
            let mut next_elim = eliminated.clone();
            eliminate(&mut next_adj, &mut next_elim, v);
            if self.failed.contains(&next_elim) {
                continue;
            }
            if self.run(next_adj, next_elim)? {
                return Some(true);
            }
        }
        self.failed.insert(eliminated);
        Some(false)
    }
}

/// All neighbours but at most one form a clique.
fn almost_simplicial(adj: &[FixedBitSet], v: usize) -> bool {
    let nbrs: Vec<usize> = adj[v].ones().collect();
    let missing = |skip: Option<usize>| {
        nbrs.iter().enumerate().any(|(i, &a)| {
            Some(a) != skip
                && nbrs[i + 1..]
                    .iter()
                    .any(|&b| Some(b) != skip && !adj[a].contains(b))
        })
    };
    if !missing(None) {
        return true;
    }
    nbrs.iter().any(|&s| !missing(Some(s)))
}

fn eliminate(adj: &mut [FixedBitSet], eliminated: &mut FixedBitSet, v: usize) {
    let nbrs: Vec<usize> = adj[v].ones().collect();
    for &a in &nbrs {
        adj[a].set(v, false);
        for &b in &nbrs {
            if a != b {
                adj[a].insert(b);
            }
        }
    }
    adj[v].clear();
    eliminated.insert(v);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Minimum over all elimination orderings, via the subset recurrence
    /// TW(S) = min_{v in S} max(TW(S - v), |Q(S - v, v)|).
    pub fn brute_force(g: &UndirectedGraph) -> usize {
        let n = g.node_count();
        let full = (1usize << n) - 1;
        let q = |s: usize, v: usize| -> usize {
            // Vertices outside s + v reachable from v through s.
            let mut seen = 1usize << v;
            let mut stack = vec![v];
            let mut count = 0;
            while let Some(u) = stack.pop() {
                for &w in g.neighbors(u) {
                    if seen & (1 << w) != 0 {
                        continue;
                    }
                    seen |= 1 << w;
                    if s & (1 << w) != 0 {
                        stack.push(w);
                    } else {
                        count += 1;
                    }
                }
            }
            count
        };
        let mut tw = vec![usize::MAX; full + 1];
        tw[0] = 0;
        for s in 1..=full {
            for v in 0..n {
                if s & (1 << v) != 0 {
                    let rest = s & !(1 << v);
                    tw[s] = tw[s].min(tw[rest].max(q(rest, v)));
                }
            }
        }
        tw[full]
    }

    fn complete_bipartite(a: usize, b: usize) -> UndirectedGraph {
        let mut edges = Vec::new();
        for i in 0..a {
            for j in 0..b {
                edges.push((i, a + j));
            }
        }
        UndirectedGraph::from_edges(a + b, &edges)
    }

    #[test]
    fn anchors() {
        let path = UndirectedGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(treewidth(&path, 3), Treewidth::Exact(1));
        let cycle: Vec<_> = (0..9).map(|i| (i, (i + 1) % 9)).collect();
        assert_eq!(treewidth(&UndirectedGraph::from_edges(9, &cycle), 3), Treewidth::Exact(2));
        assert_eq!(treewidth(&complete_bipartite(3, 3), 3), Treewidth::Exact(3));
        assert_eq!(treewidth(&complete_bipartite(3, 3), 2), Treewidth::AboveBound(2));
        let k5 = UndirectedGraph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]);
        assert_eq!(treewidth(&k5, 6), Treewidth::Exact(4));
        assert_eq!(treewidth(&UndirectedGraph::new(3), 3), Treewidth::Exact(0));
        assert_eq!(treewidth(&UndirectedGraph::from_edges(1, &[(0, 0)]), 3), Treewidth::Exact(1));
    }

    #[test]
    fn grid_treewidth() {
        // The k x k grid has treewidth k.
        for k in 3..=5 {
            let idx = |r: usize, c: usize| r * k + c;
            let mut edges = Vec::new();
            for r in 0..k {
                for c in 0..k {
                    if r + 1 < k {
                        edges.push((idx(r, c), idx(r + 1, c)));
                    }
                    if c + 1 < k {
                        edges.push((idx(r, c), idx(r, c + 1)));
                    }
                }
            }
            let g = UndirectedGraph::from_edges(k * k, &edges);
            assert_eq!(treewidth(&g, 6), Treewidth::Exact(k));
        }
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let k = 7;
        let mut edges = Vec::new();
        for r in 0..k {
            for c in 0..k {
                if r + 1 < k {
                    edges.push((r * k + c, (r + 1) * k + c));
                }
                if c + 1 < k {
                    edges.push((r * k + c, r * k + c + 1));
                }
            }
        }
        let g = UndirectedGraph::from_edges(k * k, &edges);
        assert_eq!(treewidth_with_budget(&g, 6, 50), Treewidth::Timeout);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn matches_elimination_order_minimum(
            n in 1usize..=8,
            edges in prop::collection::vec((0usize..8, 0usize..8), 0..24),
        ) {
            let edges: Vec<_> = edges.into_iter().filter(|&(u, v)| u < n && v < n && u != v).collect();
            let g = UndirectedGraph::from_edges(n, &edges);
            let expected = brute_force(&g);
            prop_assert_eq!(treewidth(&g, 6), Treewidth::Exact(expected));
            prop_assert_eq!(series_parallel_reducible(&g), expected <= 2);
            prop_assert_eq!(g.is_forest(), expected <= 1);
        }
    }
}
