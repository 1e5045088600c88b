//! Fixed-schema tables rendered from a `GroupReport`.

use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::{GroupReport, ShapeFragment};
use crate::paths::PathTemplate;
use crate::profile::{Keyword, OperatorSet};
use crate::shape::Shape;
use crate::streak::StreakHistogram;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TableKind {
    Corpus,
    Keywords,
    Operators,
    Triples,
    TripleSummary,
    Fragments,
    Shapes,
    Girth,
    Widths,
    DecompositionNodes,
    Paths,
    StreakHistogram,
}

impl TableKind {
    pub const ALL: [TableKind; 12] = [
        TableKind::Corpus,
        TableKind::Keywords,
        TableKind::Operators,
        TableKind::Triples,
        TableKind::TripleSummary,
        TableKind::Fragments,
        TableKind::Shapes,
        TableKind::Girth,
        TableKind::Widths,
        TableKind::DecompositionNodes,
        TableKind::Paths,
        TableKind::StreakHistogram,
    ];

    /// File stem of the table's CSV.
    pub fn name(self) -> &'static str {
        match self {
            TableKind::Corpus => "corpus",
            TableKind::Keywords => "keywords",
            TableKind::Operators => "operators",
            TableKind::Triples => "triples",
            TableKind::TripleSummary => "triple_summary",
            TableKind::Fragments => "fragments",
            TableKind::Shapes => "shapes",
            TableKind::Girth => "girth",
            TableKind::Widths => "widths",
            TableKind::DecompositionNodes => "decomposition_nodes",
            TableKind::Paths => "paths",
            TableKind::StreakHistogram => "streak_histogram",
        }
    }

    pub fn header(self) -> Vec<&'static str> {
        match self {
            TableKind::Corpus => vec!["total", "valid", "unique"],
            TableKind::Keywords => vec!["element", "absolute", "relative"],
            TableKind::Operators => vec!["operator_set", "kind", "absolute", "relative"],
            TableKind::Triples => vec!["triples", "absolute", "relative"],
            TableKind::TripleSummary => vec!["select_ask", "select_ask_relative", "avg_triples", "max_triples"],
            TableKind::Fragments => vec!["fragment", "absolute", "relative"],
            TableKind::Shapes => vec![
                "shape", "cq", "cq_relative", "cqf", "cqf_relative", "cqfo", "cqfo_relative",
            ],
            TableKind::Girth => vec!["girth", "cq", "cqf", "cqfo"],
            TableKind::Widths => vec!["measure", "value", "absolute", "relative"],
            TableKind::DecompositionNodes => vec!["hypertree_width", "nodes", "absolute"],
            TableKind::Paths => vec!["expression_type", "absolute", "relative", "k", "note"],
            TableKind::StreakHistogram => vec!["streak_length", "absolute"],
        }
    }

    pub fn render(self, r: &GroupReport) -> Table {
        let rows = match self {
            TableKind::Corpus => corpus(r),
            TableKind::Keywords => keywords(r),
            TableKind::Operators => operators(r),
            TableKind::Triples => triples(r),
            TableKind::TripleSummary => triple_summary(r),
            TableKind::Fragments => fragments(r),
            TableKind::Shapes => shapes(r),
            TableKind::Girth => girth(r),
            TableKind::Widths => widths(r),
            TableKind::DecompositionNodes => decomposition_nodes(r),
            TableKind::Paths => paths(r),
            TableKind::StreakHistogram => streaks(r),
        };
        Table {
            kind: self,
            header: self.header(),
            rows,
        }
    }
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TableKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        TableKind::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown table `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Table {
    #[serde(skip)]
    pub kind: TableKind,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn write_csv(&self, path: &Path) -> io::Result<()> {
        self.write_to(std::fs::File::create(path)?)
    }

    pub fn write_to<W: io::Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()
    }

    /// Value of `column` in the first row whose first cell is `key`.
    pub fn lookup(&self, key: &str, column: &str) -> Option<&str> {
        let c = self.header.iter().position(|h| *h == column)?;
        self.rows
            .iter()
            .find(|r| r[0] == key)
            .map(|r| r[c].as_str())
    }
}

/// Percentage with two decimals; empty when the base is zero.
pub fn pct(part: u64, whole: u64) -> String {
    if whole == 0 {
        String::new()
    } else {
        format!("{:.2}", 100.0 * part as f64 / whole as f64)
    }
}

fn row<const N: usize>(cells: [String; N]) -> Vec<String> {
    cells.into()
}

fn corpus(r: &GroupReport) -> Vec<Vec<String>> {
    let c = r.corpus;
    vec![row([c.total.to_string(), c.valid.to_string(), c.unique.to_string()])]
}

fn keywords(r: &GroupReport) -> Vec<Vec<String>> {
    Keyword::ALL
        .into_iter()
        .enumerate()
        .map(|(i, k)| {
            let n = r.keywords.get(i).copied().unwrap_or(0);
            row([k.name().to_owned(), n.to_string(), pct(n, r.analyzed)])
        })
        .collect()
}

fn set_label(bits: u8) -> String {
    let s = OperatorSet::from_bits(bits);
    if s.is_empty() {
        "none".to_owned()
    } else {
        s.to_string()
    }
}

/// The operator-set rows in table order, each block closed by its subtotal;
/// sets outside the blocks follow in bit order, then the non-algebraic
/// bodies.
fn operators(r: &GroupReport) -> Vec<Vec<String>> {
    let base = r.operators.values().sum::<u64>();
    let sets = |letters: &[&str]| -> Vec<u8> {
        letters
            .iter()
            .map(|l| OperatorSet::from_letters(l).expect("valid letters").bits())
            .collect()
    };
    let blocks: [(&str, Vec<u8>); 5] = [
        ("CPF subtotal", sets(&["", "F", "A", "AF"])),
        ("CPF+O", sets(&["O", "OF", "AO", "AOF"])),
        ("CPF+G", sets(&["G", "GF", "AG", "AGF"])),
        ("CPF+U", sets(&["U", "UF", "AU", "AUF"])),
        ("", sets(&["AOUF"])),
    ];
    let count = |b: u8| r.operators.get(&Some(b)).copied().unwrap_or(0);
    let mut rows = Vec::new();
    let mut listed = Vec::new();
    for (subtotal, members) in &blocks {
        let mut sum = 0;
        for &b in members {
            let n = count(b);
            sum += n;
            listed.push(b);
            rows.push(row([set_label(b), "set".into(), n.to_string(), pct(n, base)]));
        }
        if !subtotal.is_empty() {
            rows.push(row([(*subtotal).into(), "subtotal".into(), sum.to_string(), pct(sum, base)]));
        }
    }
    for (key, n) in &r.operators {
        if let Some(b) = key {
            if !listed.contains(b) {
                rows.push(row([set_label(*b), "set".into(), n.to_string(), pct(*n, base)]));
            }
        }
    }
    let other = r.operators.get(&None).copied().unwrap_or(0);
    rows.push(row(["other".into(), "set".into(), other.to_string(), pct(other, base)]));
    rows.push(row(["total".into(), "total".into(), base.to_string(), pct(base, base)]));
    rows
}

fn triples(r: &GroupReport) -> Vec<Vec<String>> {
    r.triple_buckets
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let label = if i == 11 { "11+".to_owned() } else { i.to_string() };
            row([label, n.to_string(), pct(n, r.select_ask)])
        })
        .collect()
}

fn triple_summary(r: &GroupReport) -> Vec<Vec<String>> {
    let avg = if r.select_ask == 0 {
        String::new()
    } else {
        format!("{:.2}", r.select_ask_triples as f64 / r.select_ask as f64)
    };
    vec![row([
        r.select_ask.to_string(),
        pct(r.select_ask, r.analyzed),
        avg,
        r.max_triples.to_string(),
    ])]
}

fn fragments(r: &GroupReport) -> Vec<Vec<String>> {
    let f = &r.fragments;
    let base = f.with_body;
    let mut rows: Vec<Vec<String>> = [
        ("select/ask with body", f.with_body),
        ("AOF", f.aof),
        ("CQ", f.cq),
        ("CPF", f.cpf),
        ("CQF", f.cqf),
        ("AOF simple filters", f.simple_filters),
        ("well-designed", f.well_designed),
        ("CQFO", f.cqfo),
    ]
    .into_iter()
    .map(|(name, n)| row([name.to_owned(), n.to_string(), pct(n, base)]))
    .collect();
    for (iw, n) in &f.interface_width {
        rows.push(row([format!("interface width {iw}"), n.to_string(), pct(*n, base)]));
    }
    rows
}

/// Cumulative membership rows; relative to the fragment's queries with a
/// canonical graph.
fn shapes(r: &GroupReport) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    let mut push = |label: &str, value: &dyn Fn(usize) -> u64| {
        let mut cells = vec![label.to_owned()];
        for (i, _) in ShapeFragment::ALL.iter().enumerate() {
            let n = value(i);
            cells.push(n.to_string());
            cells.push(pct(n, r.shapes[i].with_graph));
        }
        rows.push(cells);
    };
    for s in Shape::ALL {
        push(s.name(), &|i| r.shapes[i].member_count(s));
    }
    push("self loop", &|i| r.shapes[i].self_loops);
    push("treewidth <= 2", &|i| r.shapes[i].treewidth_le2);
    push("treewidth = 3", &|i| r.shapes[i].treewidth_3);
    push("treewidth > 3", &|i| r.shapes[i].treewidth_above);
    push("treewidth timeout", &|i| r.shapes[i].treewidth_timeout);
    push("total", &|i| r.shapes[i].with_graph);
    push("variable predicates", &|i| r.shapes[i].queries - r.shapes[i].with_graph);
    rows
}

fn girth(r: &GroupReport) -> Vec<Vec<String>> {
    let mut lengths: Vec<usize> = r.shapes.iter().flat_map(|s| s.girth.keys().copied()).collect();
    lengths.sort_unstable();
    lengths.dedup();
    lengths
        .into_iter()
        .map(|g| {
            let mut cells = vec![g.to_string()];
            cells.extend(r.shapes.iter().map(|s| s.girth.get(&g).copied().unwrap_or(0).to_string()));
            cells
        })
        .collect()
}

/// Numeric values first in numeric order, then the ">k" and timeout rows.
fn width_order(a: &str) -> (u8, usize) {
    match a.parse::<usize>() {
        Ok(n) => (0, n),
        Err(_) if a.starts_with('>') => (1, a[1..].parse().unwrap_or(0)),
        Err(_) => (2, 0),
    }
}

fn widths(r: &GroupReport) -> Vec<Vec<String>> {
    let w = &r.widths;
    let mut rows = Vec::new();
    let mut block = |measure: &str, m: &std::collections::BTreeMap<String, u64>| {
        let base: u64 = m.values().sum();
        let mut entries: Vec<_> = m.iter().collect();
        entries.sort_by_key(|(k, _)| width_order(k));
        for (k, n) in entries {
            rows.push(row([measure.to_owned(), k.clone(), n.to_string(), pct(*n, base)]));
        }
    };
    block("treewidth", &w.treewidth);
    block("hypertree width (>= ghw)", &w.hypertree_width);
    rows.push(row([
        "alpha-acyclic".into(),
        "true".into(),
        w.acyclic.to_string(),
        pct(w.acyclic, w.queries),
    ]));
    rows
}

fn decomposition_nodes(r: &GroupReport) -> Vec<Vec<String>> {
    r.widths
        .decomposition_nodes
        .iter()
        .map(|((w, n), c)| row([w.to_string(), n.to_string(), c.to_string()]))
        .collect()
}

fn paths(r: &GroupReport) -> Vec<Vec<String>> {
    let navigational: u64 = r
        .paths
        .iter()
        .filter(|(t, _)| t.is_navigational())
        .map(|(_, c)| c.count)
        .sum();
    PathTemplate::ALL
        .into_iter()
        .filter_map(|t| r.paths.get(&t).map(|c| (t, c)))
        .map(|(t, c)| {
            let k = match (c.k_min, c.k_max) {
                (Some(a), Some(b)) if a == b => a.to_string(),
                (Some(a), Some(b)) => format!("{a}-{b}"),
                _ => String::new(),
            };
            let rel = if t.is_navigational() {
                pct(c.count, navigational)
            } else {
                String::new()
            };
            let note = if t.outside_ctract() {
                "not in C_tract"
            } else if !t.is_navigational() {
                "not navigational"
            } else {
                ""
            };
            row([t.notation().to_owned(), c.count.to_string(), rel, k, note.to_owned()])
        })
        .collect()
}

fn streaks(r: &GroupReport) -> Vec<Vec<String>> {
    let Some(h) = &r.streaks else { return Vec::new() };
    StreakHistogram::LABELS
        .iter()
        .zip(h.counts)
        .map(|(l, n)| row([(*l).to_owned(), n.to_string()]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_query;
    use crate::report::{analyze_query, AnalysisOptions};

    fn report(texts: &[&str]) -> GroupReport {
        let mut g = GroupReport::new();
        for t in texts {
            g.add(&analyze_query(&parse_query(t).unwrap(), &AnalysisOptions::default()));
        }
        g
    }

    #[test]
    fn percentages_have_two_decimals() {
        assert_eq!(pct(1, 3), "33.33");
        assert_eq!(pct(0, 0), "");
        assert_eq!(pct(5, 5), "100.00");
    }

    #[test]
    fn operator_subtotals() {
        let g = report(&[
            "PREFIX : <http://e/> ASK { ?a :p ?b }",
            "PREFIX : <http://e/> ASK { ?a :p ?b . ?b :p ?c FILTER(?c > 1) }",
            "PREFIX : <http://e/> ASK { ?a :p ?b OPTIONAL { ?b :p ?c } }",
            "PREFIX : <http://e/> ASK { ?a :p ?b MINUS { ?b :p ?c } }",
        ]);
        let t = TableKind::Operators.render(&g);
        assert_eq!(t.lookup("none", "absolute"), Some("1"));
        assert_eq!(t.lookup("AF", "absolute"), Some("1"));
        assert_eq!(t.lookup("CPF subtotal", "absolute"), Some("2"));
        assert_eq!(t.lookup("CPF subtotal", "relative"), Some("50.00"));
        assert_eq!(t.lookup("CPF+O", "absolute"), Some("1"));
        assert_eq!(t.lookup("other", "absolute"), Some("1"));
        assert_eq!(t.lookup("total", "absolute"), Some("4"));
    }

    #[test]
    fn shape_rows_are_cumulative() {
        let g = report(&[
            "PREFIX : <http://e/> ASK { ?a :p ?b }",
            "PREFIX : <http://e/> ASK { ?a :p ?b . ?b :p ?c }",
            "PREFIX : <http://e/> ASK { ?a :p ?b . ?b :p ?c . ?c :p ?a }",
            "PREFIX : <http://e/> ASK { ?a :p ?b . ?c :p ?d }",
        ]);
        let t = TableKind::Shapes.render(&g);
        let cq = |s: &str| t.lookup(s, "cq").unwrap().parse::<u64>().unwrap();
        assert_eq!(cq("single edge"), 1);
        assert_eq!(cq("chain"), 2);
        assert_eq!(cq("chain set"), 3);
        assert_eq!(cq("cycle"), 1);
        assert_eq!(cq("flower set"), 4);
        assert_eq!(cq("treewidth <= 2"), 4);
        assert_eq!(cq("total"), 4);
        assert_eq!(t.lookup("chain", "cq_relative"), Some("50.00"));
    }

    #[test]
    fn path_rows_with_k_ranges() {
        let g = report(&[
            "PREFIX : <http://e/> ASK { ?a (:p|:q)* ?b }",
            "PREFIX : <http://e/> ASK { ?a (:p|:q|:r)* ?b }",
            "PREFIX : <http://e/> ASK { ?a :p* ?b }",
            "PREFIX : <http://e/> ASK { ?a (:p/:q)* ?b }",
            "PREFIX : <http://e/> ASK { ?a ^:p ?b }",
        ]);
        let t = TableKind::Paths.render(&g);
        assert_eq!(t.lookup("(a1|...|ak)*", "k"), Some("2-3"));
        assert_eq!(t.lookup("(a1|...|ak)*", "relative"), Some("50.00"));
        assert_eq!(t.lookup("(a/b)*", "note"), Some("not in C_tract"));
        assert_eq!(t.lookup("^a", "relative"), Some(""));
        assert_eq!(t.rows[0][0], "(a1|...|ak)*");
    }

    #[test]
    fn every_table_matches_its_header() {
        let mut g = report(&["PREFIX : <http://e/> SELECT * { ?a :p ?b OPTIONAL { ?b :q ?c } }"]);
        g.streaks = Some(StreakHistogram::default());
        for kind in TableKind::ALL {
            let t = kind.render(&g);
            assert!(t.rows.iter().all(|r| r.len() == t.header.len()), "{kind}");
            assert_eq!(kind.name().parse::<TableKind>(), Ok(kind));
        }
    }
}
