//! Synthetic queries of a declared canonical-graph shape.

use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::shape::Shape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GenShape {
    Chain,
    Cycle,
    Star,
    Tree,
    Petal,
    Flower,
    FlowerSet,
}

impl GenShape {
    pub const ALL: [GenShape; 7] = [
        GenShape::Chain,
        GenShape::Cycle,
        GenShape::Star,
        GenShape::Tree,
        GenShape::Petal,
        GenShape::Flower,
        GenShape::FlowerSet,
    ];

    /// Shape class every generated query must belong to.
    pub fn declared(self) -> Shape {
        match self {
            GenShape::Chain => Shape::Chain,
            GenShape::Cycle => Shape::Cycle,
            GenShape::Star => Shape::Star,
            GenShape::Tree => Shape::Tree,
            GenShape::Petal => Shape::Petal,
            GenShape::Flower => Shape::Flower,
            GenShape::FlowerSet => Shape::FlowerSet,
        }
    }

    /// Smallest valid `length` (number of triples).
    pub fn min_length(self) -> usize {
        match self {
            GenShape::Cycle | GenShape::Star | GenShape::Petal => 3,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GenShape::Chain => "chain",
            GenShape::Cycle => "cycle",
            GenShape::Star => "star",
            GenShape::Tree => "tree",
            GenShape::Petal => "petal",
            GenShape::Flower => "flower",
            GenShape::FlowerSet => "flowerset",
        }
    }
}

impl fmt::Display for GenShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GenShape {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, GenError> {
        GenShape::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s) || (s == "flower-set" && *g == GenShape::FlowerSet))
            .ok_or_else(|| GenError(format!("unknown shape '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
pub enum GenQueryType {
    #[default]
    Ask,
    Select,
}

impl FromStr for GenQueryType {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, GenError> {
        match s.to_ascii_lowercase().as_str() {
            "ask" => Ok(GenQueryType::Ask),
            "select" => Ok(GenQueryType::Select),
            _ => Err(GenError(format!("unknown query type '{s}'"))),
        }
    }
}

/// Exact attachment counts for generated flowers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct FlowerParams {
    pub petals: usize,
    pub stamens: usize,
    pub stems: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenSpec {
    pub shape: GenShape,
    /// Number of triples. Ignored for flowers with explicit `flower` counts.
    pub length: usize,
    pub count: usize,
    pub seed: u64,
    pub query_type: GenQueryType,
    /// Draw predicates from this many IRIs instead of a fresh one per edge.
    pub vocabulary: Option<usize>,
    pub flower: Option<FlowerParams>,
}

impl GenSpec {
    pub fn new(shape: GenShape, length: usize, count: usize, seed: u64) -> Self {
        GenSpec {
            shape,
            length,
            count,
            seed,
            query_type: GenQueryType::Ask,
            vocabulary: None,
            flower: None,
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if let Some(f) = self.flower {
            if self.shape != GenShape::Flower {
                return Err(GenError("flower counts only apply to the flower shape".into()));
            }
            if f.petals + f.stamens + f.stems == 0 {
                return Err(GenError("a flower needs at least one attachment".into()));
            }
        } else if self.length < self.shape.min_length() {
            return Err(GenError(format!(
                "{} needs length at least {}",
                self.shape,
                self.shape.min_length()
            )));
        }
        if self.vocabulary == Some(0) {
            return Err(GenError("vocabulary must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid workload spec: {0}")]
pub struct GenError(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratedQuery {
    pub text: String,
    pub declared: Shape,
    /// Edges of the intended canonical graph over variables `?x0..`.
    pub edges: Vec<(usize, usize)>,
}

pub fn generate(spec: &GenSpec) -> Result<Vec<GeneratedQuery>, GenError> {
    spec.validate()?;
    Ok((0..spec.count).map(|i| generate_one(spec, i as u64)).collect())
}

/// Item `i` of a spec; each item has its own stream, so items can be
/// generated independently.
pub fn generate_one(spec: &GenSpec, i: u64) -> GeneratedQuery {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(i);
    let (nodes, edges) = match spec.flower {
        Some(f) => {
            let mut b = Builder::default();
            let x = b.node();
            b.flower_exact(&mut rng, x, f);
            (b.nodes, b.edges)
        }
        None => shape_edges(&mut rng, spec.shape, spec.length),
    };
    GeneratedQuery {
        text: render(&mut rng, nodes, &edges, spec),
        declared: spec.shape.declared(),
        edges,
    }
}

#[derive(Default)]
struct Builder {
    nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl Builder {
    fn node(&mut self) -> usize {
        self.nodes += 1;
        self.nodes - 1
    }

    /// A path of `len` edges starting at `from`; returns its last node.
    fn path_from(&mut self, from: usize, len: usize) -> usize {
        let mut cur = from;
        for _ in 0..len {
            let next = self.node();
            self.edges.push((cur, next));
            cur = next;
        }
        cur
    }

    fn cycle(&mut self, len: usize) {
        let first = self.node();
        let last = self.path_from(first, len - 1);
        self.edges.push((last, first));
    }

    /// `paths` internally disjoint paths between `s` and a fresh `t`.
    fn petal(&mut self, rng: &mut impl Rng, s: usize, len: usize) {
        let max_paths = len.div_ceil(2);
        let paths = rng.gen_range(2..=max_paths.max(2));
        let mut lengths = vec![2; paths];
        if 2 * paths > len || rng.gen_bool(0.3) {
            lengths[0] = 1;
        }
        for _ in 0..len - lengths.iter().sum::<usize>() {
            let k = rng.gen_range(0..paths);
            if lengths[k] == 1 {
                // Keep at most one direct edge between the terminals.
                lengths[(k + 1) % paths] += 1;
            } else {
                lengths[k] += 1;
            }
        }
        let t = self.node();
        for l in lengths {
            if l == 1 {
                self.edges.push((s, t));
            } else {
                let end = self.path_from(s, l - 1);
                self.edges.push((end, t));
            }
        }
    }

    /// A tree hanging from `root` through one edge, branching at least once.
    fn stem(&mut self, rng: &mut impl Rng, root: usize, len: usize) {
        let a = self.node();
        self.edges.push((root, a));
        let mut inner = vec![a];
        for _ in 0..2 {
            let b = self.node();
            self.edges.push((a, b));
            inner.push(b);
        }
        for _ in 3..len {
            let p = *inner.choose(rng).unwrap();
            let c = self.node();
            self.edges.push((p, c));
            inner.push(c);
        }
    }

    /// Random attachments at `x` using exactly `budget` edges.
    fn flower(&mut self, rng: &mut impl Rng, x: usize, mut budget: usize) {
        while budget > 0 {
            let kind = if budget >= 3 { rng.gen_range(0..3) } else { 0 };
            let size = match kind {
                0 => rng.gen_range(1..=budget.min(4)),
                _ => rng.gen_range(3..=budget.min(7)),
            };
            match kind {
                0 => {
                    self.path_from(x, size);
                }
                1 => self.petal(rng, x, size),
                _ => self.stem(rng, x, size),
            }
            budget -= size;
        }
    }

    fn flower_exact(&mut self, rng: &mut impl Rng, x: usize, f: FlowerParams) {
        for _ in 0..f.petals {
            let size = rng.gen_range(3..=6);
            self.petal(rng, x, size);
        }
        for _ in 0..f.stamens {
            let size = rng.gen_range(1..=3);
            self.path_from(x, size);
        }
        for _ in 0..f.stems {
            let size = rng.gen_range(3..=6);
            self.stem(rng, x, size);
        }
    }
}

fn shape_edges(rng: &mut impl Rng, shape: GenShape, len: usize) -> (usize, Vec<(usize, usize)>) {
    let mut b = Builder::default();
    match shape {
        GenShape::Chain => {
            let s = b.node();
            b.path_from(s, len);
        }
        GenShape::Cycle => b.cycle(len),
        GenShape::Star => {
            let center = b.node();
            let rays = rng.gen_range(3..=len);
            let mut legs = vec![1; rays];
            for _ in rays..len {
                legs[rng.gen_range(0..rays)] += 1;
            }
            for l in legs {
                b.path_from(center, l);
            }
        }
        GenShape::Tree => {
            b.node();
            for i in 1..=len {
                let parent = rng.gen_range(0..i);
                let child = b.node();
                b.edges.push((parent, child));
            }
        }
        GenShape::Petal => {
            let s = b.node();
            b.petal(rng, s, len);
        }
        GenShape::Flower => {
            let x = b.node();
            b.flower(rng, x, len);
        }
        GenShape::FlowerSet => {
            let flowers = rng.gen_range(1..=len.div_ceil(4));
            let mut budgets = vec![1; flowers];
            for _ in flowers..len {
                budgets[rng.gen_range(0..flowers)] += 1;
            }
            for budget in budgets {
                let x = b.node();
                b.flower(rng, x, budget);
            }
        }
    }
    (b.nodes, b.edges)
}

/// Query text with shuffled variable names, shuffled triple order and
/// random edge directions.
fn render(rng: &mut impl Rng, nodes: usize, edges: &[(usize, usize)], spec: &GenSpec) -> String {
    let mut names: Vec<usize> = (0..nodes).collect();
    names.shuffle(rng);
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.shuffle(rng);
    let mut body = Vec::with_capacity(edges.len());
    for (n, &i) in order.iter().enumerate() {
        let (mut s, mut o) = edges[i];
        if rng.gen_bool(0.5) {
            std::mem::swap(&mut s, &mut o);
        }
        let p = match spec.vocabulary {
            Some(v) => rng.gen_range(0..v),
            None => n,
        };
        body.push(format!("?x{} :p{} ?x{}", names[s], p, names[o]));
    }
    let head = match spec.query_type {
        GenQueryType::Ask => "ASK WHERE",
        GenQueryType::Select => "SELECT * WHERE",
    };
    format!(
        "PREFIX : <http://example.org/gen/>\n{head} {{ {} }}",
        body.join(" . ")
    )
}

/// The chain and cycle workloads of lengths 3 to 8, 100 queries each.
pub fn gmark_presets(seed: u64) -> Vec<(String, GenSpec)> {
    let mut out = Vec::new();
    for len in 3..=8 {
        for shape in [GenShape::Chain, GenShape::Cycle] {
            out.push((
                format!("W-{len}/{shape}"),
                GenSpec::new(shape, len, 100, seed.wrapping_add(len as u64)),
            ));
        }
    }
    out
}

/// One `.rq` file per query plus a `manifest.csv` of declared shapes.
pub fn write_rq_dir(queries: &[GeneratedQuery], dir: &Path) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut manifest = csv::Writer::from_path(dir.join("manifest.csv"))?;
    manifest.write_record(["file", "declared_shape", "triples"])?;
    let width = queries.len().to_string().len().max(5);
    for (i, q) in queries.iter().enumerate() {
        let name = format!("q{i:0width$}.rq");
        std::fs::write(dir.join(&name), &q.text)?;
        manifest.write_record([name, q.declared.name().to_owned(), q.edges.len().to_string()])?;
    }
    manifest.flush()
}
