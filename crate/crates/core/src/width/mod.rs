//! Treewidth, α-acyclicity and hypertree width.

mod gyo;
mod hypertree;
mod treewidth;

pub use gyo::{gyo_is_acyclic, gyo_reduce};
pub use hypertree::{
    decompose, hypertree_width, hypertree_width_with_budget, Decomposition, DecompositionNode,
    HypertreeWidth, Timeout,
};
pub use treewidth::{series_parallel_reducible, treewidth, treewidth_with_budget, Treewidth, MAX_BOUND};

use serde::Serialize;

use crate::canonical::CanonicalHypergraph;
use crate::graph::UndirectedGraph;

pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WidthOptions {
    pub treewidth_bound: usize,
    pub k_max: usize,
    /// Search nodes per query and per measure.
    pub budget: u64,
}

impl Default for WidthOptions {
    fn default() -> Self {
        WidthOptions {
            treewidth_bound: 3,
            k_max: 3,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WidthReport {
    /// `None` when the pattern has no canonical graph.
    pub treewidth: Option<Treewidth>,
    pub acyclic: bool,
    /// Hypertree width, an upper bound on generalized hypertree width.
    pub hypertree_width: HypertreeWidth,
    pub decomposition_nodes: Option<usize>,
}

pub fn analyze_widths(
    graph: Option<&UndirectedGraph>,
    hypergraph: &CanonicalHypergraph,
    opts: WidthOptions,
) -> WidthReport {
    let treewidth = graph.map(|g| treewidth_with_budget(g, opts.treewidth_bound, opts.budget));
    let acyclic = gyo_is_acyclic(hypergraph);
    let hypertree_width = if acyclic {
        // Ear removal already settles width 1; still build the witness for
        // its node count.
        hypertree_width_with_budget(hypergraph, 1, opts.budget).0
    } else {
        hypertree_width_with_budget(hypergraph, opts.k_max, opts.budget).0
    };
    let decomposition_nodes = match hypertree_width {
        HypertreeWidth::Width { nodes, .. } => Some(nodes),
        _ => None,
    };
    WidthReport {
        treewidth,
        acyclic,
        hypertree_width,
        decomposition_nodes,
    }
}
