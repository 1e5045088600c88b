//! Shared fixtures for the benchmarks.

use percent_encoding::{utf8_percent_encode, NON_ALPHANUMERIC};
use sparqlog_core::workload::{generate, GenShape, GenSpec};

/// A mixed workload of generated queries, one query per element.
pub fn mixed_queries(per_shape: usize, length: usize, seed: u64) -> Vec<String> {
    let mut out = Vec::new();
    for shape in GenShape::ALL {
        let len = length.max(shape.min_length());
        let spec = GenSpec::new(shape, len, per_shape, seed);
        out.extend(generate(&spec).expect("valid spec").into_iter().map(|q| q.text));
    }
    out
}

/// A log in the single-line format, queries percent-encoded one per line.
pub fn encoded_log(queries: &[String]) -> String {
    queries
        .iter()
        .map(|q| utf8_percent_encode(q, NON_ALPHANUMERIC).to_string() + "\n")
        .collect()
}
