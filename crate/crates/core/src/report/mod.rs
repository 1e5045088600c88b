//! Per-query analysis, mergeable corpus aggregates and table emission.

mod pipeline;
mod tables;

pub use pipeline::{run_pipeline, PipelineOptions, QueryRow, ReportBundle, ReportGroup};
pub use tables::{pct, Table, TableKind};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::ast::{Query, QueryType};
use crate::canonical::{canonical_graph, canonical_hypergraph};
use crate::fragment::{classify_fragments, FragmentProfile};
use crate::ingest::CorpusCounts;
use crate::paths::{classify_path, PathClass, PathTemplate};
use crate::profile::{profile, Keyword, OperatorClass, ShallowProfile};
use crate::shape::{classify_shape_with, FlowerMode, Shape, ShapeClass};
use crate::streak::StreakHistogram;
use crate::width::{analyze_widths, HypertreeWidth, Treewidth, WidthOptions, WidthReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisOptions {
    pub include_constants: bool,
    pub flower_mode: FlowerMode,
    pub widths: WidthOptions,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            include_constants: true,
            flower_mode: FlowerMode::Strict,
            widths: WidthOptions::default(),
        }
    }
}

/// The conjunctive fragments with a shape table, smallest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ShapeFragment {
    Cq,
    Cqf,
    Cqfo,
}

impl ShapeFragment {
    pub const ALL: [ShapeFragment; 3] = [ShapeFragment::Cq, ShapeFragment::Cqf, ShapeFragment::Cqfo];

    pub fn name(self) -> &'static str {
        match self {
            ShapeFragment::Cq => "CQ",
            ShapeFragment::Cqf => "CQF",
            ShapeFragment::Cqfo => "CQFO",
        }
    }

    fn holds(self, f: &FragmentProfile) -> bool {
        match self {
            ShapeFragment::Cq => f.is_cq,
            ShapeFragment::Cqf => f.is_cqf,
            ShapeFragment::Cqfo => f.is_cqfo,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphAnalysis {
    pub nodes: usize,
    pub edges: usize,
    pub shape: ShapeClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryAnalysis {
    pub profile: ShallowProfile,
    /// Select and Ask queries with a body only.
    pub fragments: Option<FragmentProfile>,
    /// CQFO queries whose predicates are all IRIs.
    pub graph: Option<GraphAnalysis>,
    /// All CQFO queries.
    pub widths: Option<WidthReport>,
    pub paths: Vec<PathClass>,
}

pub fn analyze_query(q: &Query, opts: &AnalysisOptions) -> QueryAnalysis {
    let profile = profile(q);
    let paths = crate::profile::property_paths(q)
        .into_iter()
        .map(classify_path)
        .collect();
    let body = match (q.query_type(), &q.pattern) {
        (QueryType::Select | QueryType::Ask, Some(p)) => Some(p),
        _ => None,
    };
    let fragments = body.map(classify_fragments);
    let mut graph = None;
    let mut widths = None;
    if let (Some(p), Some(f)) = (body, &fragments) {
        if f.is_cqfo {
            let cg = canonical_graph(p, opts.include_constants).ok();
            let hg = canonical_hypergraph(p);
            widths = Some(analyze_widths(cg.as_ref().map(|c| &c.graph), &hg, opts.widths));
            graph = cg.map(|c| GraphAnalysis {
                nodes: c.graph.node_count(),
                edges: c.graph.edge_count(),
                shape: classify_shape_with(&c.graph, opts.flower_mode),
            });
        }
    }
    QueryAnalysis {
        profile,
        fragments,
        graph,
        widths,
        paths,
    }
}

/// Counts for one shape table column.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ShapeCounts {
    /// Queries of the fragment.
    pub queries: u64,
    /// Of those, queries with a canonical graph.
    pub with_graph: u64,
    /// Membership counts, indexed like `Shape::ALL`.
    pub members: [u64; 12],
    pub treewidth_le2: u64,
    pub treewidth_3: u64,
    pub treewidth_above: u64,
    pub treewidth_timeout: u64,
    pub girth: BTreeMap<usize, u64>,
    pub self_loops: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FragmentCounts {
    /// Select and Ask queries with a body.
    pub with_body: u64,
    pub aof: u64,
    pub cq: u64,
    pub cpf: u64,
    pub cqf: u64,
    pub well_designed: u64,
    pub simple_filters: u64,
    pub cqfo: u64,
    /// Interface width of well-designed AOF patterns.
    pub interface_width: BTreeMap<usize, u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct WidthCounts {
    /// CQFO queries analyzed.
    pub queries: u64,
    /// Keyed by the rendered value: "1", "2", ">3", "timeout".
    pub treewidth: BTreeMap<String, u64>,
    pub acyclic: u64,
    pub hypertree_width: BTreeMap<String, u64>,
    /// (hypertree width, decomposition nodes) -> queries.
    pub decomposition_nodes: BTreeMap<(usize, usize), u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PathCount {
    pub count: u64,
    pub k_min: Option<usize>,
    pub k_max: Option<usize>,
}

/// Everything the tables of one group are computed from. Merging is
/// commutative, so parallel reduction order does not matter.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GroupReport {
    pub corpus: CorpusCounts,
    /// Queries analyzed (the unique valid queries, or all valid ones
    /// without deduplication).
    pub analyzed: u64,
    /// Indexed like `Keyword::ALL`.
    pub keywords: Vec<u64>,
    pub select_ask: u64,
    pub select_ask_triples: u64,
    /// Triple counts of Select/Ask queries: 0..=10 and 11+.
    pub triple_buckets: [u64; 12],
    pub max_triples: usize,
    /// Operator sets of Select/Ask bodies, keyed by set bits; `None` is "other".
    pub operators: BTreeMap<Option<u8>, u64>,
    pub fragments: FragmentCounts,
    pub shapes: [ShapeCounts; 3],
    pub widths: WidthCounts,
    pub paths: BTreeMap<PathTemplate, PathCount>,
    pub streaks: Option<StreakHistogram>,
    pub longest_streak: Option<usize>,
}

fn bump<K: Ord>(m: &mut BTreeMap<K, u64>, k: K, by: u64) {
    *m.entry(k).or_default() += by;
}

fn merge_maps<K: Ord + Clone>(into: &mut BTreeMap<K, u64>, from: &BTreeMap<K, u64>) {
    for (k, v) in from {
        bump(into, k.clone(), *v);
    }
}

impl ShapeCounts {
    fn add(&mut self, g: Option<&GraphAnalysis>, tw: Option<Treewidth>) {
        self.queries += 1;
        let Some(g) = g else { return };
        self.with_graph += 1;
        for (i, s) in Shape::ALL.into_iter().enumerate() {
            if g.shape.is(s) {
                self.members[i] += 1;
            }
        }
        match tw {
            Some(Treewidth::Exact(w)) if w <= 2 => self.treewidth_le2 += 1,
            Some(Treewidth::Exact(3)) => self.treewidth_3 += 1,
            Some(Treewidth::Exact(_)) | Some(Treewidth::AboveBound(_)) => self.treewidth_above += 1,
            Some(Treewidth::Timeout) | None => self.treewidth_timeout += 1,
        }
        if let Some(girth) = g.shape.girth {
            bump(&mut self.girth, girth, 1);
        }
        if g.shape.has_self_loop {
            self.self_loops += 1;
        }
    }

    fn merge(&mut self, o: &ShapeCounts) {
        self.queries += o.queries;
        self.with_graph += o.with_graph;
        for (a, b) in self.members.iter_mut().zip(o.members) {
            *a += b;
        }
        self.treewidth_le2 += o.treewidth_le2;
        self.treewidth_3 += o.treewidth_3;
        self.treewidth_above += o.treewidth_above;
        self.treewidth_timeout += o.treewidth_timeout;
        merge_maps(&mut self.girth, &o.girth);
        self.self_loops += o.self_loops;
    }

    pub fn member_count(&self, s: Shape) -> u64 {
        self.members[s as usize]
    }
}

impl GroupReport {
    pub fn new() -> Self {
        GroupReport {
            keywords: vec![0; Keyword::ALL.len()],
            ..Default::default()
        }
    }

    pub fn add(&mut self, a: &QueryAnalysis) {
        if self.keywords.is_empty() {
            self.keywords = vec![0; Keyword::ALL.len()];
        }
        self.analyzed += 1;
        let p = &a.profile;
        for (i, k) in Keyword::ALL.into_iter().enumerate() {
            if p.keywords.contains(k) {
                self.keywords[i] += 1;
            }
        }
        if matches!(p.query_type, QueryType::Select | QueryType::Ask) {
            self.select_ask += 1;
            self.select_ask_triples += p.triple_count as u64;
            self.triple_buckets[p.triple_count.min(11)] += 1;
            self.max_triples = self.max_triples.max(p.triple_count);
            if let Some(op) = p.operators {
                let key = match op {
                    OperatorClass::Set(s) => Some(s.bits()),
                    OperatorClass::Other => None,
                };
                bump(&mut self.operators, key, 1);
            }
        }
        if let Some(f) = &a.fragments {
            let c = &mut self.fragments;
            c.with_body += 1;
            c.aof += f.is_aof as u64;
            c.cq += f.is_cq as u64;
            c.cpf += f.is_cpf as u64;
            c.cqf += f.is_cqf as u64;
            c.simple_filters += (f.is_aof && f.simple_filters) as u64;
            c.cqfo += f.is_cqfo as u64;
            if f.is_well_designed == Some(true) {
                c.well_designed += 1;
                if let Some(iw) = f.interface_width {
                    bump(&mut c.interface_width, iw, 1);
                }
            }
            let tw = a.widths.as_ref().and_then(|w| w.treewidth);
            for (i, frag) in ShapeFragment::ALL.into_iter().enumerate() {
                if frag.holds(f) {
                    self.shapes[i].add(a.graph.as_ref(), tw);
                }
            }
        }
        if let Some(w) = &a.widths {
            let c = &mut self.widths;
            c.queries += 1;
            if let Some(tw) = w.treewidth {
                bump(&mut c.treewidth, tw.to_string(), 1);
            }
            c.acyclic += w.acyclic as u64;
            bump(&mut c.hypertree_width, w.hypertree_width.to_string(), 1);
            if let HypertreeWidth::Width { width, nodes } = w.hypertree_width {
                bump(&mut c.decomposition_nodes, (width, nodes), 1);
            }
        }
        for pc in &a.paths {
            let e = self.paths.entry(pc.template).or_insert(PathCount {
                count: 0,
                k_min: None,
                k_max: None,
            });
            e.count += 1;
            if let Some(k) = pc.k {
                e.k_min = Some(e.k_min.map_or(k, |m| m.min(k)));
                e.k_max = Some(e.k_max.map_or(k, |m| m.max(k)));
            }
        }
    }

    pub fn merge(&mut self, o: &GroupReport) {
        self.corpus += o.corpus;
        self.analyzed += o.analyzed;
        if self.keywords.len() < o.keywords.len() {
            self.keywords.resize(o.keywords.len(), 0);
        }
        for (a, b) in self.keywords.iter_mut().zip(&o.keywords) {
            *a += b;
        }
        self.select_ask += o.select_ask;
        self.select_ask_triples += o.select_ask_triples;
        for (a, b) in self.triple_buckets.iter_mut().zip(o.triple_buckets) {
            *a += b;
        }
        self.max_triples = self.max_triples.max(o.max_triples);
        merge_maps(&mut self.operators, &o.operators);
        let (f, g) = (&mut self.fragments, &o.fragments);
        f.with_body += g.with_body;
        f.aof += g.aof;
        f.cq += g.cq;
        f.cpf += g.cpf;
        f.cqf += g.cqf;
        f.well_designed += g.well_designed;
        f.simple_filters += g.simple_filters;
        f.cqfo += g.cqfo;
        merge_maps(&mut f.interface_width, &g.interface_width);
        for (a, b) in self.shapes.iter_mut().zip(&o.shapes) {
            a.merge(b);
        }
        let (w, v) = (&mut self.widths, &o.widths);
        w.queries += v.queries;
        merge_maps(&mut w.treewidth, &v.treewidth);
        w.acyclic += v.acyclic;
        merge_maps(&mut w.hypertree_width, &v.hypertree_width);
        merge_maps(&mut w.decomposition_nodes, &v.decomposition_nodes);
        for (t, pc) in &o.paths {
            let e = self.paths.entry(*t).or_insert(PathCount {
                count: 0,
                k_min: None,
                k_max: None,
            });
            e.count += pc.count;
            e.k_min = match (e.k_min, pc.k_min) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            e.k_max = e.k_max.max(pc.k_max);
        }
        if let Some(h) = &o.streaks {
            let mine = self.streaks.get_or_insert_with(StreakHistogram::default);
            for (a, b) in mine.counts.iter_mut().zip(h.counts) {
                *a += b;
            }
        }
        self.longest_streak = self.longest_streak.max(o.longest_streak);
    }
}
