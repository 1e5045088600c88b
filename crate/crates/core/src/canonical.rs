//! Canonical graph and canonical hypergraph of a pattern.

use std::collections::HashMap;
use std::fmt::Write;

use thiserror::Error;

use crate::ast::*;
use crate::graph::UndirectedGraph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonicalError {
    /// A triple has a variable (or path) in predicate position.
    #[error("pattern has a variable or path in predicate position")]
    NotAGraphPattern,
}

/// Union-find over variables merged by `?x = ?y` filters.
#[derive(Debug, Clone, Default)]
pub struct EqualityClasses {
    parent: HashMap<String, String>,
}

impl EqualityClasses {
    fn find(&self, v: &str) -> String {
        let mut cur = v;
        while let Some(p) = self.parent.get(cur) {
            if p == cur {
                break;
            }
            cur = p;
        }
        cur.to_owned()
    }

    fn union(&mut self, a: &str, b: &str) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent.insert(hi, lo.clone());
            self.parent.entry(lo.clone()).or_insert(lo);
        }
    }

    /// Class representative of a term; non-variables represent themselves.
    pub fn representative(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => Term::Var(self.find(v)),
            t => t.clone(),
        }
    }

    pub fn same_class(&self, a: &str, b: &str) -> bool {
        self.find(a) == self.find(b)
    }
}

fn collect_equalities(p: &GraphPattern, classes: &mut EqualityClasses) {
    match p {
        GraphPattern::Filter(inner, c) => {
            if let Some((x, y)) = c.as_var_equality() {
                classes.union(x, y);
            }
            collect_equalities(inner, classes);
        }
        GraphPattern::And(a, b) | GraphPattern::Optional(a, b) => {
            collect_equalities(a, classes);
            collect_equalities(b, classes);
        }
        _ => {}
    }
}

/// Merge variables related by `?x = ?y` filters, transitively.
pub fn apply_equality_collapse(p: &GraphPattern) -> EqualityClasses {
    let mut classes = EqualityClasses::default();
    collect_equalities(p, &mut classes);
    classes
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalGraph {
    pub graph: UndirectedGraph,
    /// Terms of each node's class, in first-appearance order.
    pub labels: Vec<Vec<Term>>,
    pub include_constants: bool,
}

impl CanonicalGraph {
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph canonical {\n");
        for (i, terms) in self.labels.iter().enumerate() {
            let label: Vec<String> = terms.iter().map(|t| t.to_string()).collect();
            let _ = writeln!(out, "  n{i} [label={:?}];", label.join(" = "));
        }
        for &(u, v) in self.graph.edges() {
            let _ = writeln!(out, "  n{u} -- n{v};");
        }
        out.push_str("}\n");
        out
    }
}

/// Nodes are the subject/object term classes, edges one per triple. With
/// `include_constants = false` constant nodes are dropped together with
/// their edges; variable endpoints of such triples stay as nodes.
pub fn canonical_graph(
    p: &GraphPattern,
    include_constants: bool,
) -> Result<CanonicalGraph, CanonicalError> {
    let triples = p.local_triples();
    if triples
        .iter()
        .any(|t| !matches!(t.predicate, Predicate::Term(Term::Iri(_))))
    {
        return Err(CanonicalError::NotAGraphPattern);
    }
    let classes = apply_equality_collapse(p);
    let mut graph = UndirectedGraph::new(0);
    let mut labels: Vec<Vec<Term>> = Vec::new();
    let mut index: HashMap<Term, usize> = HashMap::new();
    let mut node = |t: &Term, graph: &mut UndirectedGraph, labels: &mut Vec<Vec<Term>>| {
        if !include_constants && t.is_constant() {
            return None;
        }
        let rep = classes.representative(t);
        let i = *index.entry(rep).or_insert_with(|| {
            labels.push(Vec::new());
            graph.add_node()
        });
        if !labels[i].contains(t) {
            labels[i].push(t.clone());
        }
        Some(i)
    };
    for t in triples {
        let s = node(&t.subject, &mut graph, &mut labels);
        let o = node(&t.object, &mut graph, &mut labels);
        if let (Some(s), Some(o)) = (s, o) {
            graph.add_edge(s, o);
        }
    }
    Ok(CanonicalGraph {
        graph,
        labels,
        include_constants,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CanonicalHypergraph {
    /// Variables and blank nodes (class representatives).
    pub vertices: Vec<Term>,
    /// Each edge is a sorted list of vertex indices; no duplicates.
    pub edges: Vec<Vec<usize>>,
}

impl CanonicalHypergraph {
    pub fn from_edges(vertex_count: usize, edges: &[Vec<usize>]) -> Self {
        let mut h = CanonicalHypergraph {
            vertices: (0..vertex_count).map(|i| Term::var(format!("v{i}"))).collect(),
            edges: Vec::new(),
        };
        for e in edges {
            let mut e = e.clone();
            e.sort_unstable();
            e.dedup();
            if !e.is_empty() && !h.edges.contains(&e) {
                h.edges.push(e);
            }
        }
        h
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Edges as sets of vertex names, for display and comparison.
    pub fn named_edges(&self) -> Vec<Vec<String>> {
        self.edges
            .iter()
            .map(|e| {
                let mut names: Vec<String> = e
                    .iter()
                    .map(|&i| match &self.vertices[i] {
                        Term::Var(v) => v.clone(),
                        t => t.to_string(),
                    })
                    .collect();
                names.sort();
                names
            })
            .collect()
    }

    /// Every edge has at most two vertices.
    pub fn is_binary(&self) -> bool {
        self.edges.iter().all(|e| e.len() <= 2)
    }

    pub fn to_dot(&self) -> String {
        // Rendered as a bipartite incidence graph.
        let mut out = String::from("graph hypergraph {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "  v{i} [label={:?}];", v.to_string());
        }
        for (j, e) in self.edges.iter().enumerate() {
            let _ = writeln!(out, "  e{j} [shape=point];");
            for &v in e {
                let _ = writeln!(out, "  e{j} -- v{v};");
            }
        }
        out.push_str("}\n");
        out
    }
}

/// One hyperedge per triple: its variables and blank nodes after equality
/// collapsing. Ground triples contribute nothing.
pub fn canonical_hypergraph(p: &GraphPattern) -> CanonicalHypergraph {
    let classes = apply_equality_collapse(p);
    let mut h = CanonicalHypergraph::default();
    let mut index: HashMap<Term, usize> = HashMap::new();
    for t in p.local_triples() {
        let mut edge = Vec::new();
        for term in t.terms() {
            if !term.is_variable_like() {
                continue;
            }
            let rep = classes.representative(term);
            let next = h.vertices.len();
            let i = *index.entry(rep.clone()).or_insert_with(|| next);
            if i == next {
                h.vertices.push(rep);
            }
            edge.push(i);
        }
        edge.sort_unstable();
        edge.dedup();
        if !edge.is_empty() && !h.edges.contains(&edge) {
            h.edges.push(edge);
        }
    }
    h
}
