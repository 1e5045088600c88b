//! Brute-force oracles and fixtures shared by the integration tests. They
//! follow the definitions directly and share no code with the library.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use sparqlog_core::width::Decomposition;
use sparqlog_core::CanonicalHypergraph;

/// The two queries of the hypergraph example.
pub const EXAMPLE1_CHAIN: &str = "ASK WHERE {?x1 :a ?x2 . ?x2 :b ?x3 . ?x3 :c ?x4}";
pub const EXAMPLE1_VARPRED: &str = "ASK WHERE {?x1 ?x2 ?x3 . ?x3 :a ?x4 . ?x4 ?x2 ?x5}";

pub const WIKIDATA_SITES: &str = "SELECT ?label ?coord ?subj
WHERE
{ ?subj wdt:P31/wdt:P279* wd:Q839954 .
  ?subj wdt:P625 ?coord .
  ?subj rdfs:label ?label filter(lang(?label)=\"en\")
}";

/// The flower query found in the DBpedia logs (31 nodes, 35 edges).
pub const DBPEDIA_FLOWER_EDGES: [(usize, usize); 35] = [
    (4, 1), (5, 4), (5, 2), (5, 6), (6, 3), (5, 7), (5, 9), (7, 8), (9, 8),
    (5, 10), (5, 11), (5, 12), (10, 13), (11, 13), (12, 13), (5, 16), (16, 17),
    (5, 14), (14, 15), (5, 18), (5, 20), (18, 19), (20, 19), (5, 21), (5, 22),
    (5, 24), (22, 23), (24, 23), (5, 25), (25, 26), (5, 27), (5, 28), (5, 29),
    (28, 30), (29, 31),
];

/// The treewidth-3 query: every subject variable joined to every object
/// variable.
pub fn treewidth3_query() -> String {
    let subjects = ["subject_nationality", "subject_birthPlace", "subject_genre"];
    let objects = ["object_genre", "object_birthPlace", "object_nationality"];
    let mut triples = Vec::new();
    for (i, s) in subjects.iter().enumerate() {
        for (j, o) in objects.iter().enumerate() {
            triples.push(format!("?{s} dbo:rel{i}{j} ?{o}"));
        }
    }
    format!("SELECT * WHERE {{ {} }}", triples.join(" . "))
}

/// ASK query with one fresh predicate per edge.
pub fn query_from_edges(edges: &[(usize, usize)]) -> String {
    let body: Vec<String> = edges
        .iter()
        .enumerate()
        .map(|(i, (u, v))| format!("?n{u} <http://example.org/e{i}> ?n{v}"))
        .collect();
    format!("ASK WHERE {{ {} }}", body.join(" . "))
}

pub fn random_graph(rng: &mut impl Rng, max_n: usize) -> (usize, Vec<(usize, usize)>) {
    let n = rng.gen_range(1..=max_n);
    let p = rng.gen_range(0.1..0.9);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    (n, edges)
}

/// Treewidth as the minimum over elimination orderings of the largest
/// neighborhood, computed by dynamic programming over eliminated sets.
pub fn treewidth_oracle(n: usize, edges: &[(usize, usize)]) -> usize {
    if edges.iter().all(|(u, v)| u == v) {
        return if edges.is_empty() { 0 } else { 1 };
    }
    let mut adj = vec![0u32; n];
    for &(u, v) in edges {
        if u != v {
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
    }
    // q(S, v): vertices outside S ∪ {v} reachable from v through S.
    let q = |s: u32, v: usize| -> u32 {
        let mut seen = 1u32 << v;
        let mut stack = vec![v];
        let mut out = 0u32;
        while let Some(x) = stack.pop() {
            let mut nb = adj[x] & !seen;
            while nb != 0 {
                let y = nb.trailing_zeros() as usize;
                nb &= nb - 1;
                seen |= 1 << y;
                if s & (1 << y) != 0 {
                    stack.push(y);
                } else {
                    out |= 1 << y;
                }
            }
        }
        out
    };
    let full = (1u32 << n) - 1;
    let mut best = vec![usize::MAX; 1 << n];
    best[0] = 0;
    for s in 0..=full {
        if best[s as usize] == usize::MAX {
            continue;
        }
        for v in 0..n {
            if s & (1 << v) == 0 {
                let w = best[s as usize].max(q(s, v).count_ones() as usize);
                let t = (s | (1 << v)) as usize;
                best[t] = best[t].min(w);
            }
        }
    }
    best[full as usize]
}

pub fn random_hypergraph(rng: &mut impl Rng, max_v: usize, max_e: usize) -> CanonicalHypergraph {
    let n = rng.gen_range(1..=max_v);
    let m = rng.gen_range(1..=max_e);
    let edges: Vec<Vec<usize>> = (0..m)
        .map(|_| {
            let size = rng.gen_range(1..=n.min(3));
            let mut e: Vec<usize> = (0..size).map(|_| rng.gen_range(0..n)).collect();
            e.sort_unstable();
            e.dedup();
            e
        })
        .collect();
    CanonicalHypergraph::from_edges(n, &edges)
}

/// Denser variant: 4 to `max_e` edges of two or three vertices, so most
/// instances are cyclic.
pub fn random_cyclic_hypergraph(rng: &mut impl Rng, max_v: usize, max_e: usize) -> CanonicalHypergraph {
    let n = rng.gen_range(4..=max_v);
    let m = rng.gen_range(4..=max_e);
    let edges: Vec<Vec<usize>> = (0..m)
        .map(|_| {
            let mut e: Vec<usize> = (0..n).collect();
            for i in 0..n {
                e.swap(i, rng.gen_range(i..n));
            }
            e.truncate(rng.gen_range(2..=3));
            e.sort_unstable();
            e
        })
        .collect();
    CanonicalHypergraph::from_edges(n, &edges)
}

/// Every labeled tree on `m` nodes, via Prüfer sequences.
fn for_each_tree(m: usize, f: &mut dyn FnMut(&[(usize, usize)]) -> bool) -> bool {
    if m <= 1 {
        return f(&[]);
    }
    if m == 2 {
        return f(&[(0, 1)]);
    }
    let len = m - 2;
    let mut seq = vec![0usize; len];
    loop {
        let mut degree = vec![1usize; m];
        for &x in &seq {
            degree[x] += 1;
        }
        let mut edges = Vec::with_capacity(m - 1);
        for &x in &seq {
            let leaf = (0..m).find(|&i| degree[i] == 1).unwrap();
            edges.push((leaf, x));
            degree[leaf] -= 1;
            degree[x] -= 1;
        }
        let rest: Vec<usize> = (0..m).filter(|&i| degree[i] == 1).collect();
        edges.push((rest[0], rest[1]));
        if f(&edges) {
            return true;
        }
        let mut i = 0;
        loop {
            if i == len {
                return false;
            }
            seq[i] += 1;
            if seq[i] < m {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
    }
}

/// α-acyclicity as existence of a join tree over the hyperedges: for each
/// vertex, the edges containing it form a connected subtree. Edges are
/// deduplicated first; empty edges are dropped.
pub fn join_tree_exists(h: &CanonicalHypergraph) -> bool {
    let edges: Vec<BTreeSet<usize>> = h
        .edges
        .iter()
        .filter(|e| !e.is_empty())
        .map(|e| e.iter().copied().collect())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let m = edges.len();
    let vertices: BTreeSet<usize> = edges.iter().flatten().copied().collect();
    for_each_tree(m, &mut |tree| {
        vertices.iter().all(|v| {
            let holders: Vec<usize> = (0..m).filter(|&i| edges[i].contains(v)).collect();
            let inside = tree
                .iter()
                .filter(|(a, b)| edges[*a].contains(v) && edges[*b].contains(v))
                .count();
            inside + 1 == holders.len()
        })
    })
}

fn min_edge_cover(h: &CanonicalHypergraph, bag: &[usize]) -> usize {
    let m = h.edges.len();
    (0..1usize << m)
        .filter(|mask| {
            bag.iter()
                .all(|v| (0..m).any(|i| mask & (1 << i) != 0 && h.edges[i].contains(v)))
        })
        .map(|mask| mask.count_ones() as usize)
        .min()
        .unwrap_or(usize::MAX)
}

fn permutations(n: usize, f: &mut dyn FnMut(&[usize])) {
    fn go(order: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
        if k == order.len() {
            f(order);
            return;
        }
        for i in k..order.len() {
            order.swap(k, i);
            go(order, k + 1, f);
            order.swap(k, i);
        }
    }
    go(&mut (0..n).collect(), 0, f)
}

/// Generalized hypertree width: the minimum over elimination orderings of
/// the primal graph of the largest edge-cover number of a bag, each cover
/// found by exhaustive search over edge subsets.
pub fn ghw_oracle(h: &CanonicalHypergraph) -> usize {
    let n = h.vertex_count();
    let used: BTreeSet<usize> = h.edges.iter().flatten().copied().collect();
    if used.is_empty() {
        return 0;
    }
    let mut adj = vec![vec![false; n]; n];
    for e in &h.edges {
        for &a in e {
            for &b in e {
                if a != b {
                    adj[a][b] = true;
                }
            }
        }
    }
    let mut best = usize::MAX;
    permutations(n, &mut |order| {
        let mut g = adj.clone();
        let mut alive = vec![true; n];
        let mut width = 0;
        for &v in order {
            alive[v] = false;
            if !used.contains(&v) {
                continue;
            }
            let nbrs: Vec<usize> = (0..n).filter(|&u| alive[u] && g[v][u]).collect();
            let mut bag = nbrs.clone();
            bag.push(v);
            width = width.max(min_edge_cover(h, &bag));
            if width >= best {
                return;
            }
            for &a in &nbrs {
                for &b in &nbrs {
                    if a != b {
                        g[a][b] = true;
                    }
                }
            }
        }
        best = best.min(width);
    });
    best
}

/// Checks all conditions of a hypertree decomposition of width at most `k`.
pub fn check_decomposition(h: &CanonicalHypergraph, d: &Decomposition, k: usize) -> Result<(), String> {
    let n = d.nodes.len();
    let mut parent = vec![None; n];
    for (i, node) in d.nodes.iter().enumerate() {
        for &c in &node.children {
            if c == 0 || c >= n || parent[c].is_some() {
                return Err(format!("bad child {c}"));
            }
            parent[c] = Some(i);
        }
    }
    // Every node reaches the root.
    for i in 0..n {
        let mut cur = i;
        let mut steps = 0;
        while let Some(p) = parent[cur] {
            cur = p;
            steps += 1;
            if steps > n {
                return Err("cycle".into());
            }
        }
        if cur != 0 {
            return Err(format!("node {i} detached"));
        }
    }
    for e in &h.edges {
        if !d.nodes.iter().any(|x| e.iter().all(|v| x.bag.contains(v))) {
            return Err(format!("edge {e:?} not in any bag"));
        }
    }
    for v in 0..h.vertex_count() {
        let holders: Vec<usize> = (0..n).filter(|&i| d.nodes[i].bag.contains(&v)).collect();
        let roots = holders
            .iter()
            .filter(|&&i| parent[i].is_none_or(|p| !d.nodes[p].bag.contains(&v)))
            .count();
        if !holders.is_empty() && roots != 1 {
            return Err(format!("bags holding {v} are disconnected"));
        }
    }
    let below = |i: usize| {
        let mut out = BTreeSet::new();
        let mut stack = vec![i];
        while let Some(j) = stack.pop() {
            out.extend(d.nodes[j].bag.iter().copied());
            stack.extend(d.nodes[j].children.iter().copied());
        }
        out
    };
    for (i, x) in d.nodes.iter().enumerate() {
        if x.cover.len() > k {
            return Err(format!("node {i} uses {} edges", x.cover.len()));
        }
        let covered: BTreeSet<usize> = x.cover.iter().flat_map(|&e| h.edges[e].iter().copied()).collect();
        if !x.bag.iter().all(|v| covered.contains(v)) {
            return Err(format!("node {i} bag not covered"));
        }
        if below(i).iter().any(|v| covered.contains(v) && !x.bag.contains(v)) {
            return Err(format!("special condition violated at node {i}"));
        }
    }
    Ok(())
}

pub fn levenshtein_oracle(a: &[char], b: &[char]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

/// Prologue removal by a plain scan: the first whole-word keyword outside
/// `<...>` and `"..."`. Good enough for logs without `<` comparisons.
pub fn naive_strip(q: &str) -> String {
    let chars: Vec<char> = q.chars().collect();
    let word = |c: char| c.is_alphanumeric() || c == '_';
    let (mut in_iri, mut in_str) = (false, false);
    for i in 0..chars.len() {
        match chars[i] {
            '<' if !in_str => in_iri = true,
            '>' if !in_str => in_iri = false,
            '"' if !in_iri => in_str = !in_str,
            _ => {}
        }
        if in_iri || in_str || (i > 0 && (word(chars[i - 1]) || "?$:@".contains(chars[i - 1]))) {
            continue;
        }
        for k in ["select", "ask", "construct", "describe"] {
            let end = i + k.len();
            if end <= chars.len()
                && chars[i..end].iter().collect::<String>().eq_ignore_ascii_case(k)
                && chars.get(end).is_none_or(|&c| !word(c) && c != ':')
            {
                return chars[i..].iter().collect();
            }
        }
    }
    q.to_owned()
}

/// Maximal streaks by the definitions: `j` matches `i` when it is the first
/// later query similar to `i`; a streak follows matches with gaps of at
/// most `w` and starts at a query no earlier query matches within `w`.
pub fn streaks_oracle(log: &[String], w: usize, theta: f64) -> Vec<Vec<usize>> {
    let texts: Vec<Vec<char>> = log.iter().map(|q| naive_strip(q).chars().collect()).collect();
    let similar = |i: usize, j: usize| {
        let (a, b) = (&texts[i], &texts[j]);
        let longest = a.len().max(b.len());
        longest == 0 || levenshtein_oracle(a, b) as f64 / longest as f64 <= theta
    };
    let n = log.len();
    let next: Vec<Option<usize>> = (0..n)
        .map(|i| (i + 1..n).find(|&j| similar(i, j)).filter(|&j| j - i <= w))
        .collect();
    let mut has_pred = vec![false; n];
    for j in next.iter().flatten() {
        has_pred[*j] = true;
    }
    let mut out = Vec::new();
    for start in (0..n).filter(|&i| !has_pred[i]) {
        let mut s = vec![start];
        let mut cur = start;
        while let Some(j) = next[cur] {
            s.push(j);
            cur = j;
        }
        out.push(s);
    }
    out.sort();
    out
}

/// A log drawn from a few base queries with small random edits, so that
/// similar, dissimilar and borderline pairs all occur.
pub fn synthetic_streak_log(rng: &mut impl Rng, len: usize) -> Vec<String> {
    let bases = [
        "SELECT ?s WHERE { ?s <http://e/p> ?o . ?o <http://e/q> \"x\" }",
        "ASK { ?a <http://e/knows> ?b }",
        "SELECT DISTINCT ?name WHERE { ?p <http://e/name> ?name } LIMIT 10",
        "CONSTRUCT { ?s ?p ?o } WHERE { ?s ?p ?o }",
    ];
    (0..len)
        .map(|_| {
            let base = bases[rng.gen_range(0..bases.len())];
            let mut chars: Vec<char> = base.chars().collect();
            let edits = rng.gen_range(0..chars.len() / 3);
            for _ in 0..edits {
                let i = rng.gen_range(1..chars.len());
                match rng.gen_range(0..3) {
                    0 => chars[i] = (b'0' + rng.gen_range(0..10)) as char,
                    1 => chars.insert(i, (b'0' + rng.gen_range(0..10)) as char),
                    _ => {
                        chars.remove(i);
                    }
                }
            }
            let prefix = if rng.gen_bool(0.5) { "PREFIX e: <http://e/>\n" } else { "" };
            format!("{prefix}{}", chars.into_iter().collect::<String>())
        })
        .collect()
}

/// Random AOF pattern as query text: triples, groups, OPTIONAL and
/// FILTERs that are simple or not.
pub fn random_aof_query(rng: &mut impl Rng) -> String {
    fn var(rng: &mut impl Rng) -> String {
        format!("?v{}", rng.gen_range(0..6))
    }
    fn pattern(rng: &mut impl Rng, depth: u32) -> String {
        let leaf = depth == 0 || rng.gen_bool(0.3);
        if leaf {
            let o = if rng.gen_bool(0.15) { "<http://e/c>".to_owned() } else { var(rng) };
            return format!("{} <http://e/p{}> {}", var(rng), rng.gen_range(0..3), o);
        }
        match rng.gen_range(0..4) {
            0 => format!("{} . {}", pattern(rng, depth - 1), pattern(rng, depth - 1)),
            1 => format!("{{ {} }} {{ {} }}", pattern(rng, depth - 1), pattern(rng, depth - 1)),
            2 => format!("{} OPTIONAL {{ {} }}", pattern(rng, depth - 1), pattern(rng, depth - 1)),
            _ => {
                let f = match rng.gen_range(0..4) {
                    0 => format!("{} = {}", var(rng), var(rng)),
                    1 => format!("{} > 3", var(rng)),
                    2 => format!("{} < {}", var(rng), var(rng)),
                    _ => format!("lang({}) = \"en\"", var(rng)),
                };
                format!("{} FILTER({f})", pattern(rng, depth - 1))
            }
        }
    }
    format!("SELECT * WHERE {{ {} }}", pattern(rng, 4))
}
