//! Shape lattice of canonical graphs: chains, stars, trees, cycles, petals
//! and flowers.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::graph::UndirectedGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Shape {
    Empty,
    SingleEdge,
    Chain,
    ChainSet,
    Star,
    Tree,
    Forest,
    Cycle,
    Petal,
    Flower,
    FlowerSet,
    BeyondFlowerSet,
}

impl Shape {
    /// Report order (the row order of the cumulative shape table).
    pub const ALL: [Shape; 12] = [
        Shape::Empty,
        Shape::SingleEdge,
        Shape::Chain,
        Shape::ChainSet,
        Shape::Star,
        Shape::Tree,
        Shape::Forest,
        Shape::Cycle,
        Shape::Petal,
        Shape::Flower,
        Shape::FlowerSet,
        Shape::BeyondFlowerSet,
    ];

    /// Most specific first; `most_specific` is the first member in this order.
    const SPECIFICITY: [Shape; 12] = [
        Shape::Empty,
        Shape::SingleEdge,
        Shape::Chain,
        Shape::Star,
        Shape::Cycle,
        Shape::Petal,
        Shape::Tree,
        Shape::ChainSet,
        Shape::Forest,
        Shape::Flower,
        Shape::FlowerSet,
        Shape::BeyondFlowerSet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Shape::Empty => "empty",
            Shape::SingleEdge => "single edge",
            Shape::Chain => "chain",
            Shape::ChainSet => "chain set",
            Shape::Star => "star",
            Shape::Tree => "tree",
            Shape::Forest => "forest",
            Shape::Cycle => "cycle",
            Shape::Petal => "petal",
            Shape::Flower => "flower",
            Shape::FlowerSet => "flower set",
            Shape::BeyondFlowerSet => "beyond flower set",
        }
    }

    fn bit(self) -> u16 {
        1 << self as u16
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ShapeSet(u16);

impl ShapeSet {
    pub fn insert(&mut self, s: Shape) {
        self.0 |= s.bit();
    }

    pub fn contains(self, s: Shape) -> bool {
        self.0 & s.bit() != 0
    }

    pub fn iter(self) -> impl Iterator<Item = Shape> {
        Shape::ALL.into_iter().filter(move |&s| self.contains(s))
    }
}

impl Serialize for ShapeSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter().map(Shape::name))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
pub struct FlowerStats {
    pub petals: usize,
    pub stamens: usize,
    pub stems: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShapeClass {
    pub most_specific: Shape,
    pub memberships: ShapeSet,
    /// Shortest cycle of length at least 3; self-loops are not counted.
    pub girth: Option<usize>,
    pub flower_stats: Option<FlowerStats>,
    pub has_self_loop: bool,
}

impl ShapeClass {
    pub fn is(&self, s: Shape) -> bool {
        self.memberships.contains(s)
    }
}

/// Whether tree attachments may hang off petal vertices other than the
/// center.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum FlowerMode {
    #[default]
    Strict,
    Relaxed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowerDecomposition {
    pub center: usize,
    /// Each petal as its edge list; a self-loop at the center is a petal
    /// with the single edge `(x, x)`.
    pub petals: Vec<Vec<(usize, usize)>>,
    pub stamens: Vec<Vec<(usize, usize)>>,
    pub stems: Vec<Vec<(usize, usize)>>,
}

impl FlowerDecomposition {
    pub fn stats(&self) -> FlowerStats {
        FlowerStats {
            petals: self.petals.len(),
            stamens: self.stamens.len(),
            stems: self.stems.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlowerError {
    #[error("graph is empty or not connected")]
    NotConnected,
    #[error("biconnected component {edges:?} is not a petal")]
    NotAPetal { edges: Vec<(usize, usize)> },
    #[error("petals share no common terminal")]
    NoCommonCenter,
    #[error("attachment at vertex {vertex} is not at the center")]
    DetachedAttachment { vertex: usize },
}

pub fn girth(g: &UndirectedGraph) -> Option<usize> {
    g.girth()
}

/// Terminals a petal may use as the flower center, or `None` if the
/// component is not a petal. Every vertex must have degree at least 2
/// within the component and at most two may exceed 2.
fn petal_terminals(edges: &[(usize, usize)]) -> Option<Vec<usize>> {
    let mut deg: std::collections::BTreeMap<usize, usize> = Default::default();
    for &(u, v) in edges {
        *deg.entry(u).or_default() += 1;
        *deg.entry(v).or_default() += 1;
    }
    if deg.values().any(|&d| d < 2) {
        return None;
    }
    let high: Vec<usize> = deg.iter().filter(|(_, &d)| d >= 3).map(|(&v, _)| v).collect();
    match high.len() {
        0 => Some(deg.into_keys().collect()),
        1 | 2 => Some(high),
        _ => None,
    }
}

pub fn decompose_flower(
    g: &UndirectedGraph,
    mode: FlowerMode,
) -> Result<FlowerDecomposition, FlowerError> {
    let n = g.node_count();
    if n == 0 || !g.is_connected() {
        return Err(FlowerError::NotConnected);
    }
    let mut petals: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut bridges: Vec<(usize, usize)> = Vec::new();
    let mut candidates: BTreeSet<usize> = (0..n).collect();
    for comp in g.biconnected_components() {
        if comp.len() == 1 {
            bridges.push(comp[0]);
            continue;
        }
        let Some(terminals) = petal_terminals(&comp) else {
            return Err(FlowerError::NotAPetal { edges: comp });
        };
        candidates.retain(|v| terminals.contains(v));
        petals.push(comp);
    }
    for v in 0..n {
        if g.has_loop(v) {
            candidates.retain(|&c| c == v);
        }
    }
    if candidates.is_empty() {
        return Err(FlowerError::NoCommonCenter);
    }

    // For each vertex, the petals it lies on.
    let mut petal_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, p) in petals.iter().enumerate() {
        let mut vs: Vec<usize> = p.iter().flat_map(|&(u, v)| [u, v]).collect();
        vs.sort_unstable();
        vs.dedup();
        for v in vs {
            petal_of[v].push(i);
        }
    }
    let bridge_forest = UndirectedGraph::from_edges(n, &bridges);

    let mut best: Option<FlowerDecomposition> = None;
    let mut witness = None;
    for &x in &candidates {
        match decompose_at(x, &petal_of, &bridge_forest, mode) {
            Ok((stamens, stems)) => {
                if best.as_ref().is_some_and(|b| b.stems.len() <= stems.len()) {
                    continue;
                }
                let mut petal_list = petals.clone();
                if g.has_loop(x) {
                    petal_list.push(vec![(x, x)]);
                }
                best = Some(FlowerDecomposition {
                    center: x,
                    petals: petal_list,
                    stamens,
                    stems,
                });
            }
            Err(v) => {
                witness.get_or_insert(v);
            }
        }
    }
    best.ok_or(FlowerError::DetachedAttachment {
        vertex: witness.unwrap_or(0),
    })
}

type Branches = (Vec<Vec<(usize, usize)>>, Vec<Vec<(usize, usize)>>);

/// Try `x` as the center. On failure returns the offending vertex.
fn decompose_at(
    x: usize,
    petal_of: &[Vec<usize>],
    forest: &UndirectedGraph,
    mode: FlowerMode,
) -> Result<Branches, usize> {
    let n = petal_of.len();
    for v in (0..n).filter(|&v| v != x) {
        if petal_of[v].len() > 1 {
            return Err(v);
        }
        if mode == FlowerMode::Strict && !petal_of[v].is_empty() && forest.degree(v) > 0 {
            return Err(v);
        }
    }
    let mut out: Branches = (Vec::new(), Vec::new());
    let mut seen = vec![false; n];
    seen[x] = true;
    // Relaxed mode also hangs trees off the other petal vertices; those
    // always count as stems.
    let mut roots = vec![x];
    if mode == FlowerMode::Relaxed {
        roots.extend((0..n).filter(|&v| v != x && !petal_of[v].is_empty()));
    }
    for &r in &roots {
        seen[r] = true;
    }
    for &r in &roots {
        for &u in forest.neighbors(r) {
            if seen[u] {
                continue;
            }
            let (edges, chain) = branch(forest, r, u, &mut seen);
            if chain && r == x {
                out.0.push(edges);
            } else {
                out.1.push(edges);
            }
        }
    }
    // Any bridge edge not reached is a tree attached away from the center.
    match (0..n).find(|&v| !seen[v] && forest.degree(v) > 0) {
        Some(v) => Err(v),
        None => Ok(out),
    }
}

/// The subtree entered from `root` through `u`: its edges, and whether it
/// forms a path leading away from `root`.
fn branch(
    forest: &UndirectedGraph,
    root: usize,
    u: usize,
    seen: &mut [bool],
) -> (Vec<(usize, usize)>, bool) {
    let mut edges = vec![(root.min(u), root.max(u))];
    let mut chain = true;
    let mut stack = vec![(u, root)];
    seen[u] = true;
    while let Some((v, parent)) = stack.pop() {
        let children: Vec<usize> = forest
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&w| w != parent)
            .collect();
        if children.len() > 1 {
            chain = false;
        }
        for w in children {
            seen[w] = true;
            edges.push((v.min(w), v.max(w)));
            stack.push((w, v));
        }
    }
    (edges, chain)
}

/// Strict-mode classification.
pub fn classify_shape(g: &UndirectedGraph) -> ShapeClass {
    classify_shape_with(g, FlowerMode::Strict)
}

pub fn classify_shape_with(g: &UndirectedGraph, mode: FlowerMode) -> ShapeClass {
    let n = g.node_count();
    let mut m = ShapeSet::default();
    let has_self_loop = g.loop_count() > 0;
    let girth = g.girth();
    if n == 0 {
        for s in [Shape::Empty, Shape::ChainSet, Shape::Forest, Shape::FlowerSet] {
            m.insert(s);
        }
        return ShapeClass {
            most_specific: Shape::Empty,
            memberships: m,
            girth,
            flower_stats: None,
            has_self_loop,
        };
    }
    let components = g.components();
    let connected = components.len() == 1;
    let forest = g.is_forest();
    let max_deg = (0..n).map(|v| g.degree(v)).max().unwrap_or(0);
    let high = (0..n).filter(|&v| g.degree(v) > 2).count();
    let lone_loop = n == 1 && g.edge_count() == 1 && has_self_loop;

    if forest {
        m.insert(Shape::Forest);
        if max_deg <= 2 {
            m.insert(Shape::ChainSet);
        }
        if connected {
            m.insert(Shape::Tree);
            if max_deg <= 2 {
                m.insert(Shape::Chain);
            }
            if high == 1 {
                m.insert(Shape::Star);
            }
            if n == 2 && g.edge_count() == 1 {
                m.insert(Shape::SingleEdge);
            }
        }
    }
    if lone_loop
        || (connected
            && !has_self_loop
            && n >= 3
            && g.edge_count() == n
            && (0..n).all(|v| g.degree(v) == 2))
    {
        m.insert(Shape::Cycle);
    }
    if lone_loop || (connected && !has_self_loop && is_single_petal(g)) {
        m.insert(Shape::Petal);
    }
    let mut flower_stats = None;
    if connected {
        if let Ok(d) = decompose_flower(g, mode) {
            m.insert(Shape::Flower);
            m.insert(Shape::FlowerSet);
            flower_stats = Some(d.stats());
        }
    } else if components
        .iter()
        .all(|c| decompose_flower(&g.induced(c), mode).is_ok())
    {
        m.insert(Shape::FlowerSet);
    }
    if !m.contains(Shape::FlowerSet) {
        m.insert(Shape::BeyondFlowerSet);
    }
    let most_specific = Shape::SPECIFICITY
        .into_iter()
        .find(|&s| m.contains(s))
        .unwrap_or(Shape::BeyondFlowerSet);
    ShapeClass {
        most_specific,
        memberships: m,
        girth,
        flower_stats,
        has_self_loop,
    }
}

fn is_single_petal(g: &UndirectedGraph) -> bool {
    let bccs = g.biconnected_components();
    bccs.len() == 1 && bccs[0].len() >= 3 && petal_terminals(&bccs[0]).is_some()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    /// The flower query from the DBpedia logs: 31 nodes, hub = node 4.
    pub fn dbpedia_flower_graph() -> UndirectedGraph {
        let edges = [
            (4, 1), (5, 4), (5, 2), (5, 6), (6, 3), (5, 7), (5, 9), (7, 8), (9, 8),
            (5, 10), (5, 11), (5, 12), (10, 13), (11, 13), (12, 13), (5, 16), (16, 17),
            (5, 14), (14, 15), (5, 18), (5, 20), (18, 19), (20, 19), (5, 21), (5, 22),
            (5, 24), (22, 23), (24, 23), (5, 25), (25, 26), (5, 27), (5, 28), (5, 29),
            (28, 30), (29, 31),
        ];
        let edges: Vec<_> = edges.iter().map(|&(u, v)| (u - 1, v - 1)).collect();
        UndirectedGraph::from_edges(31, &edges)
    }

    fn cycle(n: usize) -> UndirectedGraph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        UndirectedGraph::from_edges(n, &edges)
    }

    #[test]
    fn dbpedia_flower() {
        let g = dbpedia_flower_graph();
        let c = classify_shape(&g);
        assert_eq!(c.most_specific, Shape::Flower);
        assert_eq!(
            c.flower_stats,
            Some(FlowerStats { petals: 4, stamens: 10, stems: 0 })
        );
        assert_eq!(decompose_flower(&g, FlowerMode::Strict).unwrap().center, 4);
        assert_eq!(c.girth, Some(4));
    }

    #[test]
    fn basic_shapes() {
        let path = UndirectedGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let c = classify_shape(&path);
        assert_eq!(c.most_specific, Shape::Chain);
        for s in [Shape::Tree, Shape::Forest, Shape::Flower, Shape::FlowerSet, Shape::ChainSet] {
            assert!(c.is(s), "{s}");
        }
        assert!(!c.is(Shape::Star));

        let c = classify_shape(&cycle(3));
        assert_eq!(c.most_specific, Shape::Cycle);
        assert_eq!(c.girth, Some(3));
        assert!(c.is(Shape::Petal) && c.is(Shape::Flower));
        assert_eq!(
            decompose_flower(&cycle(3), FlowerMode::Strict).unwrap().stats(),
            FlowerStats { petals: 1, stamens: 0, stems: 0 }
        );

        let single = UndirectedGraph::from_edges(2, &[(0, 1)]);
        assert_eq!(classify_shape(&single).most_specific, Shape::SingleEdge);

        let star = UndirectedGraph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (3, 4)]);
        assert_eq!(classify_shape(&star).most_specific, Shape::Star);

        let isolated = UndirectedGraph::new(3);
        let c = classify_shape(&isolated);
        assert_eq!(c.most_specific, Shape::ChainSet);
        assert!(c.is(Shape::FlowerSet));

        let lone = UndirectedGraph::new(1);
        assert_eq!(classify_shape(&lone).most_specific, Shape::Chain);
        assert_eq!(classify_shape(&UndirectedGraph::new(0)).most_specific, Shape::Empty);
    }

    #[test]
    fn self_loops() {
        let lone = UndirectedGraph::from_edges(1, &[(0, 0)]);
        let c = classify_shape(&lone);
        assert_eq!(c.most_specific, Shape::Cycle);
        assert!(c.has_self_loop && !c.is(Shape::Forest) && c.girth.is_none());
        // A loop on a leaf moves the center there; the rest becomes a stem.
        let g = UndirectedGraph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (3, 4), (1, 1)]);
        assert_eq!(classify_shape(&g).flower_stats, Some(FlowerStats { petals: 1, stamens: 0, stems: 1 }));
        let g = UndirectedGraph::from_edges(3, &[(0, 1), (1, 2), (0, 0), (2, 2)]);
        assert!(!classify_shape(&g).is(Shape::Flower));
        let g = UndirectedGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (0, 0)]);
        assert_eq!(classify_shape(&g).flower_stats, Some(FlowerStats { petals: 1, stamens: 3, stems: 0 }));
    }

    #[test]
    fn triangles_joined_by_a_path_are_not_a_flower() {
        let g = UndirectedGraph::from_edges(
            7,
            &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 6), (6, 4)],
        );
        assert!(decompose_flower(&g, FlowerMode::Strict).is_err());
        assert!(oracle_centers(&g).is_empty());
        let c = classify_shape(&g);
        assert_eq!(c.most_specific, Shape::BeyondFlowerSet);
    }

    #[test]
    fn petal_with_attachment_on_far_terminal() {
        // Square 0-1-2-3 with a pendant edge at 2 and one at 0.
        let g = UndirectedGraph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 0), (2, 4), (0, 5)]);
        assert!(decompose_flower(&g, FlowerMode::Strict).is_err());
        let relaxed = decompose_flower(&g, FlowerMode::Relaxed).unwrap();
        assert_eq!(relaxed.stats(), FlowerStats { petals: 1, stamens: 1, stems: 1 });
        assert!(classify_shape_with(&g, FlowerMode::Relaxed).is(Shape::Flower));
    }

    #[test]
    fn theta_and_k4() {
        let theta = UndirectedGraph::from_edges(5, &[(0, 2), (2, 1), (0, 3), (3, 1), (0, 4), (4, 1)]);
        let c = classify_shape(&theta);
        assert_eq!(c.most_specific, Shape::Petal);
        let k4 = UndirectedGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert!(matches!(
            decompose_flower(&k4, FlowerMode::Strict),
            Err(FlowerError::NotAPetal { .. })
        ));
        // Theta with a pendant on a path-internal vertex.
        let g = UndirectedGraph::from_edges(
            6,
            &[(0, 2), (2, 1), (0, 3), (3, 1), (0, 4), (4, 1), (4, 5)],
        );
        assert!(!classify_shape(&g).is(Shape::Flower));
    }

    /// Centers that satisfy the flower definition, checked directly on the
    /// components of `G - x`, with the attachment counts at each center.
    pub fn oracle_centers(g: &UndirectedGraph) -> Vec<(usize, FlowerStats)> {
        let n = g.node_count();
        let mut out = Vec::new();
        if n == 0 || !g.is_connected() {
            return out;
        }
        'center: for x in 0..n {
            if (0..n).any(|v| v != x && g.has_loop(v)) {
                continue;
            }
            let rest: Vec<usize> = (0..n).filter(|&v| v != x).collect();
            let sub = g.induced(&rest);
            let mut stats = FlowerStats {
                petals: usize::from(g.has_loop(x)),
                ..Default::default()
            };
            for comp in sub.components() {
                let verts: Vec<usize> = comp.iter().map(|&i| rest[i]).collect();
                let attach: Vec<usize> =
                    verts.iter().copied().filter(|&v| g.has_edge(x, v)).collect();
                let c = g.induced(&verts);
                if c.is_forest() && attach.len() == 1 {
                    // Chain iff the attachment is an end of a path.
                    let a = verts.iter().position(|&v| v == attach[0]).unwrap();
                    let path = (0..c.node_count()).all(|v| c.degree(v) <= 2) && c.degree(a) <= 1;
                    if path {
                        stats.stamens += 1;
                    } else {
                        stats.stems += 1;
                    }
                    continue;
                }
                if !verts.iter().any(|&t| is_petal_at(g, x, t, &verts)) {
                    continue 'center;
                }
                stats.petals += 1;
            }
            out.push((x, stats));
        }
        out
    }

    /// `verts + x` forms a petal with terminals `x` and `t`.
    fn is_petal_at(g: &UndirectedGraph, x: usize, t: usize, verts: &[usize]) -> bool {
        let inner: Vec<usize> = verts.iter().copied().filter(|&v| v != t).collect();
        let mut paths = usize::from(g.has_edge(x, t));
        let sub = g.induced(&inner);
        for comp in sub.components() {
            let vs: Vec<usize> = comp.iter().map(|&i| inner[i]).collect();
            let p = g.induced(&vs);
            if !p.is_forest() || (0..p.node_count()).any(|v| p.degree(v) > 2) || !p.is_connected() {
                return false;
            }
            let ends: Vec<usize> = (0..p.node_count())
                .filter(|&v| p.degree(v) <= 1)
                .map(|v| vs[v])
                .collect();
            let interior_ok = vs
                .iter()
                .filter(|v| !ends.contains(v))
                .all(|&v| !g.has_edge(v, x) && !g.has_edge(v, t));
            let ends_ok = match ends.as_slice() {
                [a] => g.has_edge(*a, x) && g.has_edge(*a, t),
                [a, b] => {
                    (g.has_edge(*a, x) && !g.has_edge(*a, t) && g.has_edge(*b, t) && !g.has_edge(*b, x))
                        || (g.has_edge(*b, x) && !g.has_edge(*b, t) && g.has_edge(*a, t) && !g.has_edge(*a, x))
                }
                _ => false,
            };
            if !interior_ok || !ends_ok {
                return false;
            }
            paths += 1;
        }
        paths >= 2
    }

    fn relabel_random(g: &UndirectedGraph, seed: u64) -> UndirectedGraph {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut perm: Vec<usize> = (0..g.node_count()).collect();
        perm.shuffle(&mut rand::rngs::StdRng::seed_from_u64(seed));
        g.relabel(&perm)
    }

    fn check_lattice(c: &ShapeClass) {
        let implies = [
            (Shape::SingleEdge, Shape::Chain),
            (Shape::Chain, Shape::ChainSet),
            (Shape::ChainSet, Shape::Forest),
            (Shape::Chain, Shape::Tree),
            (Shape::Star, Shape::Tree),
            (Shape::Tree, Shape::Forest),
            (Shape::Cycle, Shape::Petal),
            (Shape::Petal, Shape::Flower),
            (Shape::Tree, Shape::Flower),
            (Shape::Forest, Shape::FlowerSet),
            (Shape::Flower, Shape::FlowerSet),
        ];
        for (a, b) in implies {
            assert!(!c.is(a) || c.is(b), "{a} without {b}: {c:?}");
        }
        assert!(c.is(c.most_specific));
        assert_eq!(c.is(Shape::BeyondFlowerSet), !c.is(Shape::FlowerSet));
    }

    fn arb_graph(max_n: usize, max_e: usize) -> impl Strategy<Value = UndirectedGraph> {
        (1..=max_n).prop_flat_map(move |n| {
            prop::collection::vec((0..n, 0..n), 0..max_e)
                .prop_map(move |edges| UndirectedGraph::from_edges(n, &edges))
        })
    }

    /// Sparse graphs with mostly tree-like structure, so flowers are common.
    fn arb_sparse(max_n: usize) -> impl Strategy<Value = UndirectedGraph> {
        (2..=max_n).prop_flat_map(|n| {
            (
                prop::collection::vec(0..n, n - 1),
                prop::collection::vec((0..n, 0..n), 0..4),
            )
                .prop_map(move |(parents, extra)| {
                    let mut edges: Vec<(usize, usize)> = parents
                        .iter()
                        .enumerate()
                        .map(|(i, &p)| (i + 1, p % (i + 1)))
                        .collect();
                    edges.extend(extra.into_iter().filter(|(u, v)| u != v));
                    UndirectedGraph::from_edges(n, &edges)
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(600))]

        #[test]
        fn flower_matches_definition(g in arb_sparse(10)) {
            let oracle = oracle_centers(&g);
            match decompose_flower(&g, FlowerMode::Strict) {
                Ok(d) => {
                    let at = oracle.iter().find(|(x, _)| *x == d.center);
                    prop_assert!(at.is_some(), "center {} rejected by oracle", d.center);
                    prop_assert_eq!(at.unwrap().1, d.stats());
                    let min_stems = oracle.iter().map(|(_, s)| s.stems).min().unwrap();
                    prop_assert_eq!(d.stats().stems, min_stems);
                }
                Err(_) => prop_assert!(oracle.is_empty(), "oracle found {:?}", oracle),
            }
        }

        #[test]
        fn lattice_and_isomorphism(g in arb_graph(8, 12), seed in any::<u64>()) {
            let c = classify_shape(&g);
            check_lattice(&c);
            check_lattice(&classify_shape_with(&g, FlowerMode::Relaxed));
            let h = relabel_random(&g, seed);
            let d = classify_shape(&h);
            prop_assert_eq!(c.memberships, d.memberships);
            prop_assert_eq!(c.girth, d.girth);
            prop_assert_eq!(c.flower_stats.map(|s| s.petals), d.flower_stats.map(|s| s.petals));
        }

        #[test]
        fn relaxed_accepts_everything_strict_does(g in arb_sparse(10)) {
            let strict = classify_shape(&g);
            let relaxed = classify_shape_with(&g, FlowerMode::Relaxed);
            prop_assert!(!strict.is(Shape::Flower) || relaxed.is(Shape::Flower));
            prop_assert!(!strict.is(Shape::FlowerSet) || relaxed.is(Shape::FlowerSet));
        }
    }
}
