//! Hypertree width for small k by top-down separator search.

use std::collections::HashMap;
use std::fmt::Write;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use super::DEFAULT_BUDGET;
use crate::canonical::CanonicalHypergraph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionNode {
    pub bag: Vec<usize>,
    /// Indices into the hypergraph's edge list.
    pub cover: Vec<usize>,
    pub children: Vec<usize>,
}

/// A hypertree decomposition; node 0 is the root.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Decomposition {
    pub nodes: Vec<DecompositionNode>,
}

impl Decomposition {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn width(&self) -> usize {
        self.nodes.iter().map(|n| n.cover.len()).max().unwrap_or(0)
    }

    /// One line per node: id, parent, bag and covering edges.
    pub fn to_text(&self, h: &CanonicalHypergraph) -> String {
        let mut parent = vec![None; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            for &c in &n.children {
                parent[c] = Some(i);
            }
        }
        let name = |v: usize| h.vertices[v].to_string();
        let mut out = String::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let bag: Vec<String> = n.bag.iter().map(|&v| name(v)).collect();
            let cover: Vec<String> = n
                .cover
                .iter()
                .map(|&e| {
                    let vs: Vec<String> = h.edges[e].iter().map(|&v| name(v)).collect();
                    format!("{{{}}}", vs.join(","))
                })
                .collect();
            let parent = parent[i].map_or("-".to_owned(), |p| p.to_string());
            let _ = writeln!(
                out,
                "node {i} parent {parent} bag {{{}}} cover [{}]",
                bag.join(","),
                cover.join(" ")
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum HypertreeWidth {
    /// Width and node count of the decomposition found.
    Width { width: usize, nodes: usize },
    AboveMax(usize),
    Timeout,
}

impl std::fmt::Display for HypertreeWidth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HypertreeWidth::Width { width, .. } => write!(f, "{width}"),
            HypertreeWidth::AboveMax(k) => write!(f, ">{k}"),
            HypertreeWidth::Timeout => f.write_str("timeout"),
        }
    }
}

pub fn hypertree_width(h: &CanonicalHypergraph, k_max: usize) -> HypertreeWidth {
    hypertree_width_with_budget(h, k_max, DEFAULT_BUDGET).0
}

/// Smallest `k <= k_max` with a decomposition, plus the witness. An empty
/// hypergraph has width 0 and no nodes.
pub fn hypertree_width_with_budget(
    h: &CanonicalHypergraph,
    k_max: usize,
    budget: u64,
) -> (HypertreeWidth, Option<Decomposition>) {
    if h.edges.is_empty() {
        return (HypertreeWidth::Width { width: 0, nodes: 0 }, Some(Decomposition::default()));
    }
    let mut spent = 0;
    for k in 1..=k_max {
        match decompose(h, k, budget, &mut spent) {
            Ok(Some(d)) => {
                return (
                    HypertreeWidth::Width {
                        width: d.width(),
                        nodes: d.node_count(),
                    },
                    Some(d),
                )
            }
            Ok(None) => {}
            Err(Timeout) => return (HypertreeWidth::Timeout, None),
        }
    }
    (HypertreeWidth::AboveMax(k_max), None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Timeout;

/// A decomposition of width at most `k`, if one exists. Edges indices in
/// the result refer to `h.edges`.
pub fn decompose(
    h: &CanonicalHypergraph,
    k: usize,
    budget: u64,
    spent: &mut u64,
) -> Result<Option<Decomposition>, Timeout> {
    let nv = h.vertex_count();
    // Subsumed edges never help as separators or as components.
    let kept: Vec<usize> = (0..h.edges.len())
        .filter(|&i| {
            !h.edges.iter().enumerate().any(|(j, f)| {
                j != i
                    && h.edges[i].iter().all(|v| f.contains(v))
                    && (h.edges[i].len() < f.len() || j < i)
            })
        })
        .collect();
    let sets: Vec<FixedBitSet> = kept
        .iter()
        .map(|&i| {
            let mut s = FixedBitSet::with_capacity(nv);
            s.extend(h.edges[i].iter().copied());
            s
        })
        .collect();
    let mut search = Search {
        edges: &sets,
        k,
        budget,
        spent,
        memo: HashMap::new(),
    };
    let mut all = FixedBitSet::with_capacity(sets.len());
    all.insert_range(..);
    let root = search.solve(&all, &FixedBitSet::with_capacity(nv))?;
    Ok(root.map(|t| {
        let mut d = Decomposition::default();
        flatten(&t, &kept, &mut d);
        d
    }))
}

#[derive(Debug, Clone)]
struct Tree {
    bag: FixedBitSet,
    cover: Vec<usize>,
    children: Vec<std::rc::Rc<Tree>>,
}

fn flatten(t: &Tree, kept: &[usize], d: &mut Decomposition) -> usize {
    let id = d.nodes.len();
    d.nodes.push(DecompositionNode {
        bag: t.bag.ones().collect(),
        cover: t.cover.iter().map(|&e| kept[e]).collect(),
        children: Vec::new(),
    });
    for c in &t.children {
        let cid = flatten(c, kept, d);
        d.nodes[id].children.push(cid);
    }
    id
}

type MemoKey = (FixedBitSet, FixedBitSet);

struct Search<'a> {
    edges: &'a [FixedBitSet],
    k: usize,
    budget: u64,
    spent: &'a mut u64,
    memo: HashMap<MemoKey, Option<std::rc::Rc<Tree>>>,
}

impl Search<'_> {
    /// Decompose the edge component `comp` whose connection to the parent
    /// bag is `conn`.
    fn solve(
        &mut self,
        comp: &FixedBitSet,
        conn: &FixedBitSet,
    ) -> Result<Option<std::rc::Rc<Tree>>, Timeout> {
        let key = (comp.clone(), conn.clone());
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        let nv = conn.len();
        let mut comp_vars = FixedBitSet::with_capacity(nv);
        for e in comp.ones() {
            comp_vars.union_with(&self.edges[e]);
        }
        // Candidate separator edges: component edges first, then any other
        // edge touching the component.
        let mut candidates: Vec<usize> = comp.ones().collect();
        candidates.extend(
            (0..self.edges.len())
                .filter(|&e| !comp.contains(e) && !self.edges[e].is_disjoint(&comp_vars)),
        );
        let mut result = None;
        let mut chosen = Vec::with_capacity(self.k);
        self.separators(&candidates, 0, &mut chosen, comp, conn, &comp_vars, &mut result)?;
        self.memo.insert(key, result.clone());
        Ok(result)
    }

    #[allow(clippy::too_many_arguments)]
    fn separators(
        &mut self,
        candidates: &[usize],
        start: usize,
        chosen: &mut Vec<usize>,
        comp: &FixedBitSet,
        conn: &FixedBitSet,
        comp_vars: &FixedBitSet,
        result: &mut Option<std::rc::Rc<Tree>>,
    ) -> Result<(), Timeout> {
        if !chosen.is_empty() {
            if let Some(t) = self.try_separator(chosen, comp, conn, comp_vars)? {
                *result = Some(t);
                return Ok(());
            }
        }
        if chosen.len() == self.k {
            return Ok(());
        }
        for i in start..candidates.len() {
            chosen.push(candidates[i]);
            self.separators(candidates, i + 1, chosen, comp, conn, comp_vars, result)?;
            chosen.pop();
            if result.is_some() {
                return Ok(());
            }
        }
        Ok(())
    }

    fn try_separator(
        &mut self,
        lambda: &[usize],
        comp: &FixedBitSet,
        conn: &FixedBitSet,
        comp_vars: &FixedBitSet,
    ) -> Result<Option<std::rc::Rc<Tree>>, Timeout> {
        *self.spent += 1;
        if *self.spent > self.budget {
            return Err(Timeout);
        }
        let nv = conn.len();
        let mut vars = FixedBitSet::with_capacity(nv);
        for &e in lambda {
            vars.union_with(&self.edges[e]);
        }
        if !conn.is_subset(&vars) {
            return Ok(None);
        }
        let mut bag = vars;
        bag.intersect_with(comp_vars);
        // The bag has to cover something new, or the search would not
        // make progress.
        if bag.is_subset(conn) {
            return Ok(None);
        }
        let mut children = Vec::new();
        for child in self.components(comp, &bag) {
            let mut child_vars = FixedBitSet::with_capacity(nv);
            for e in child.ones() {
                child_vars.union_with(&self.edges[e]);
            }
            child_vars.intersect_with(&bag);
            match self.solve(&child, &child_vars)? {
                Some(t) => children.push(t),
                None => return Ok(None),
            }
        }
        Ok(Some(std::rc::Rc::new(Tree {
            bag,
            cover: lambda.to_vec(),
            children,
        })))
    }

    /// `[bag]`-components: edges of `comp` not inside `bag`, grouped by
    /// connectivity through vertices outside `bag`.
    fn components(&self, comp: &FixedBitSet, bag: &FixedBitSet) -> Vec<FixedBitSet> {
        let open: Vec<usize> = comp
            .ones()
            .filter(|&e| !self.edges[e].is_subset(bag))
            .collect();
        let mut parent: Vec<usize> = (0..open.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for i in 0..open.len() {
            for j in i + 1..open.len() {
                let mut shared = self.edges[open[i]].clone();
                shared.intersect_with(&self.edges[open[j]]);
                shared.difference_with(bag);
                if shared.count_ones(..) > 0 {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
        let mut groups: HashMap<usize, FixedBitSet> = HashMap::new();
        for (i, &e) in open.iter().enumerate() {
            let r = find(&mut parent, i);
            groups
                .entry(r)
                .or_insert_with(|| FixedBitSet::with_capacity(comp.len()))
                .insert(e);
        }
        let mut out: Vec<FixedBitSet> = groups.into_values().collect();
        out.sort_by_key(|c| c.ones().next());
        out
    }
}
