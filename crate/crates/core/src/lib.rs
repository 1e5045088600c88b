//! Analysis toolkit for SPARQL query logs.

pub mod ast;
pub mod parser;
pub mod paths;
pub mod canonical;
pub mod fragment;
pub mod graph;
pub mod ingest;
pub mod profile;
pub mod report;
pub mod shape;
pub mod streak;
pub mod width;
pub mod workload;
mod serialize;

pub use ast::*;
pub use parser::{parse_query, ParseError};
pub use canonical::{canonical_graph, canonical_hypergraph, CanonicalError, CanonicalGraph, CanonicalHypergraph};
pub use fragment::{classify_fragments, opt_normal_form, FragmentProfile, PatternTree};
pub use graph::UndirectedGraph;
pub use ingest::{read_log, CorpusCounts, DedupMode, LogFormat, LogRecord};
pub use paths::{classify_path, PathClass, PathTemplate};
pub use profile::{profile, Keyword, OperatorClass, OperatorSet, ProjectionStatus, ShallowProfile};
pub use report::{analyze_query, AnalysisOptions, GroupReport, PipelineOptions, QueryAnalysis, ReportBundle, TableKind};
pub use shape::{classify_shape, FlowerMode, FlowerStats, Shape, ShapeClass};
pub use streak::{detect_streaks, Streak, StreakConfig, StreakHistogram};
pub use width::{analyze_widths, gyo_is_acyclic, hypertree_width, treewidth, HypertreeWidth, Treewidth, WidthOptions, WidthReport};
pub use workload::{generate, GenShape, GenSpec, GeneratedQuery};
