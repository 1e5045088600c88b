//! Conjunctive fragments of And/Opt/Filter patterns: CQ, CPF, CQF,
//! well-designedness, pattern trees, interface width and CQFO.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::ast::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FragmentError {
    #[error("pattern uses operators outside And/Opt/Filter")]
    NotAof,
}

/// A filter is simple when it mentions at most one variable or is exactly
/// `?x = ?y`.
pub fn filter_is_simple(c: &FilterConstraint) -> bool {
    c.vars.len() <= 1 || c.as_var_equality().is_some()
}

/// Only triple patterns (no paths), And, Opt and Filter without EXISTS.
pub fn is_aof(p: &GraphPattern) -> bool {
    match p {
        GraphPattern::Empty => true,
        GraphPattern::Triple(t) => !t.is_path(),
        GraphPattern::And(a, b) | GraphPattern::Optional(a, b) => is_aof(a) && is_aof(b),
        GraphPattern::Filter(inner, c) => !c.expr.contains_exists() && is_aof(inner),
        _ => false,
    }
}

fn uses_optional(p: &GraphPattern) -> bool {
    match p {
        GraphPattern::Optional(..) => true,
        GraphPattern::And(a, b) => uses_optional(a) || uses_optional(b),
        GraphPattern::Filter(inner, _) => uses_optional(inner),
        _ => false,
    }
}

fn filters<'a>(p: &'a GraphPattern, out: &mut Vec<&'a FilterConstraint>) {
    match p {
        GraphPattern::Filter(inner, c) => {
            filters(inner, out);
            out.push(c);
        }
        GraphPattern::And(a, b) | GraphPattern::Optional(a, b) => {
            filters(a, out);
            filters(b, out);
        }
        _ => {}
    }
}

fn uses_filter(p: &GraphPattern) -> bool {
    let mut fs = Vec::new();
    filters(p, &mut fs);
    !fs.is_empty()
}

/// Triples and And only.
pub fn is_cq(p: &GraphPattern) -> bool {
    is_aof(p) && !uses_optional(p) && !uses_filter(p)
}

/// Triples, And and Filter.
pub fn is_cpf(p: &GraphPattern) -> bool {
    is_aof(p) && !uses_optional(p)
}

/// CPF with simple filters only.
pub fn is_cqf(p: &GraphPattern) -> bool {
    is_cpf(p) && all_filters_simple(p)
}

fn all_filters_simple(p: &GraphPattern) -> bool {
    let mut fs = Vec::new();
    filters(p, &mut fs);
    fs.into_iter().all(filter_is_simple)
}

/// One node of a pattern tree: a conjunction of triples with its filters.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TreeNode {
    pub triples: Vec<TriplePattern>,
    pub filters: Vec<FilterConstraint>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

impl TreeNode {
    /// Variables of the node's triples and filters.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for t in &self.triples {
            out.extend(t.vars());
        }
        for f in &self.filters {
            out.extend(f.vars.iter().cloned());
        }
        out
    }
}

/// Curried tree of an AOF pattern; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternTree {
    pub nodes: Vec<TreeNode>,
}

impl PatternTree {
    fn leaf(node: TreeNode) -> Self {
        PatternTree { nodes: vec![node] }
    }

    /// Append `other`'s nodes, returning the index its root got.
    fn absorb(&mut self, other: PatternTree) -> usize {
        let offset = self.nodes.len();
        for mut n in other.nodes {
            n.parent = n.parent.map(|p| p + offset);
            for c in &mut n.children {
                *c += offset;
            }
            self.nodes.push(n);
        }
        offset
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    /// Tree edges as (parent, child) pairs.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.parent.map(|p| (p, i)))
    }

    /// Every variable occurs in a connected set of nodes.
    pub fn is_well_designed(&self) -> bool {
        let vars: Vec<BTreeSet<String>> = self.nodes.iter().map(TreeNode::vars).collect();
        let mut all = BTreeSet::new();
        for v in &vars {
            all.extend(v.iter().cloned());
        }
        // In a tree, an occurrence set is connected iff exactly one of its
        // nodes has no parent inside the set.
        all.iter().all(|x| {
            let tops = self
                .nodes
                .iter()
                .enumerate()
                .filter(|(i, n)| {
                    vars[*i].contains(x) && n.parent.is_none_or(|p| !vars[p].contains(x))
                })
                .count();
            tops == 1
        })
    }

    /// Largest number of variables shared by a node and one of its children;
    /// 0 for a single node.
    pub fn interface_width(&self) -> usize {
        let vars: Vec<BTreeSet<String>> = self.nodes.iter().map(TreeNode::vars).collect();
        self.edges()
            .map(|(p, c)| vars[p].intersection(&vars[c]).count())
            .max()
            .unwrap_or(0)
    }

    fn render(&self, i: usize) -> GraphPattern {
        let n = &self.nodes[i];
        let mut p = n
            .triples
            .iter()
            .cloned()
            .map(GraphPattern::Triple)
            .reduce(GraphPattern::and)
            .unwrap_or(GraphPattern::Empty);
        for f in &n.filters {
            p = GraphPattern::Filter(Box::new(p), f.clone());
        }
        for &c in &n.children {
            p = GraphPattern::optional(p, self.render(c));
        }
        p
    }

    /// The OPT-normal-form pattern this tree encodes.
    pub fn to_pattern(&self) -> GraphPattern {
        self.render(0)
    }
}

/// Build the pattern tree: conjunctions merge their root nodes, filters
/// attach to the root of their argument, and `P1 Opt P2` hangs the tree of
/// `P2` under the root of `P1`.
pub fn build_pattern_tree(p: &GraphPattern) -> Result<PatternTree, FragmentError> {
    Ok(match p {
        GraphPattern::Empty => PatternTree::leaf(TreeNode::default()),
        GraphPattern::Triple(t) if !t.is_path() => PatternTree::leaf(TreeNode {
            triples: vec![t.clone()],
            ..TreeNode::default()
        }),
        GraphPattern::And(a, b) => {
            let mut ta = build_pattern_tree(a)?;
            let tb = build_pattern_tree(b)?;
            // tb's root merges into ta's root; its other nodes are appended.
            let shift = ta.nodes.len() - 1;
            let remap = |i: usize| if i == 0 { 0 } else { i + shift };
            let mut nodes = tb.nodes.into_iter();
            let b_root = nodes.next().expect("trees have a root");
            for mut n in nodes {
                n.parent = n.parent.map(remap);
                for c in &mut n.children {
                    *c = remap(*c);
                }
                ta.nodes.push(n);
            }
            let root = &mut ta.nodes[0];
            root.triples.extend(b_root.triples);
            root.filters.extend(b_root.filters);
            root.children.extend(b_root.children.into_iter().map(remap));
            ta
        }
        GraphPattern::Filter(inner, c) if !c.expr.contains_exists() => {
            let mut t = build_pattern_tree(inner)?;
            t.nodes[0].filters.push(c.clone());
            t
        }
        GraphPattern::Optional(a, b) => {
            let mut ta = build_pattern_tree(a)?;
            let tb = build_pattern_tree(b)?;
            let child = ta.absorb(tb);
            ta.nodes[child].parent = Some(0);
            ta.nodes[0].children.push(child);
            ta
        }
        _ => return Err(FragmentError::NotAof),
    })
}

/// Rewrite an AOF pattern so that no Opt occurs below an And and every
/// filter sits directly on the conjunction of its block. Idempotent.
pub fn opt_normal_form(p: &GraphPattern) -> Result<GraphPattern, FragmentError> {
    Ok(build_pattern_tree(p)?.to_pattern())
}

/// Occurrence counts of variables over triple and filter leaves.
fn occurrences(p: &GraphPattern, out: &mut HashMap<String, usize>) {
    match p {
        GraphPattern::Triple(t) => {
            for v in t.vars() {
                *out.entry(v).or_default() += 1;
            }
        }
        GraphPattern::Filter(inner, c) => {
            occurrences(inner, out);
            for v in &c.vars {
                *out.entry(v.clone()).or_default() += 1;
            }
        }
        GraphPattern::And(a, b) | GraphPattern::Optional(a, b) => {
            occurrences(a, out);
            occurrences(b, out);
        }
        _ => {}
    }
}

/// For every `P1 Opt P2` occurrence, the variables of `P2` missing from `P1`
/// occur nowhere outside that occurrence. `None` for non-AOF patterns.
pub fn is_well_designed(p: &GraphPattern) -> Option<bool> {
    if !is_aof(p) {
        return None;
    }
    let mut total = HashMap::new();
    occurrences(p, &mut total);
    fn check(p: &GraphPattern, total: &HashMap<String, usize>) -> bool {
        match p {
            GraphPattern::Optional(a, b) => {
                let left = a.vars();
                let mut inside = HashMap::new();
                occurrences(p, &mut inside);
                let ok = b
                    .vars()
                    .iter()
                    .filter(|v| !left.contains(*v))
                    .all(|v| inside.get(v) == total.get(v));
                ok && check(a, total) && check(b, total)
            }
            GraphPattern::And(a, b) => check(a, total) && check(b, total),
            GraphPattern::Filter(inner, _) => check(inner, total),
            _ => true,
        }
    }
    Some(check(p, &total))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FragmentProfile {
    pub is_aof: bool,
    pub is_cq: bool,
    pub is_cpf: bool,
    pub is_cqf: bool,
    /// `None` outside AOF.
    pub is_well_designed: Option<bool>,
    pub simple_filters: bool,
    /// Of the pattern tree of the OPT normal form; `None` outside AOF.
    pub interface_width: Option<usize>,
    pub is_cqfo: bool,
}

pub fn classify_fragments(p: &GraphPattern) -> FragmentProfile {
    let aof = is_aof(p);
    if !aof {
        return FragmentProfile {
            is_aof: false,
            is_cq: false,
            is_cpf: false,
            is_cqf: false,
            is_well_designed: None,
            simple_filters: false,
            interface_width: None,
            is_cqfo: false,
        };
    }
    let opt = uses_optional(p);
    let has_filter = uses_filter(p);
    let simple = all_filters_simple(p);
    let wd = is_well_designed(p).unwrap_or(false);
    let iw = build_pattern_tree(p)
        .map(|t| t.interface_width())
        .unwrap_or(0);
    FragmentProfile {
        is_aof: true,
        is_cq: !opt && !has_filter,
        is_cpf: !opt,
        is_cqf: !opt && simple,
        is_well_designed: Some(wd),
        simple_filters: simple,
        interface_width: Some(iw),
        is_cqfo: wd && simple && iw <= 1,
    }
}

/// All triple patterns of an AOF pattern, in document order.
pub fn aof_triples(p: &GraphPattern) -> Vec<&TriplePattern> {
    p.local_triples()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_query;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn body(text: &str) -> GraphPattern {
        parse_query(text).unwrap().pattern.unwrap()
    }

    fn t(s: &str, p: &str, o: &str) -> GraphPattern {
        let term = |x: &str| match x.strip_prefix('?') {
            Some(v) => Term::var(v),
            None => Term::iri(x),
        };
        GraphPattern::Triple(TriplePattern::new(
            term(s),
            Predicate::Term(Term::iri(p)),
            term(o),
        ))
    }

    fn opt(a: GraphPattern, b: GraphPattern) -> GraphPattern {
        GraphPattern::optional(a, b)
    }

    fn p1() -> GraphPattern {
        opt(
            opt(t("?A", "name", "?N"), t("?A", "email", "?E")),
            t("?A", "webPage", "?W"),
        )
    }

    fn p2() -> GraphPattern {
        opt(
            t("?A", "name", "?N"),
            opt(t("?A", "email", "?E"), t("?A", "webPage", "?W")),
        )
    }

    #[test]
    fn simple_filters() {
        let f = |e: &str| {
            let GraphPattern::Filter(_, c) = body(&format!("ASK {{ ?x <p> ?y FILTER({e}) }}"))
            else {
                panic!()
            };
            filter_is_simple(&c)
        };
        assert!(f("lang(?label) = \"en\""));
        assert!(f("?x = ?y"));
        assert!(!f("?x < ?y"));
        assert!(!f("?x = ?y && ?x = ?z"));
    }

    #[test]
    fn fragment_examples() {
        let p = classify_fragments(&body("ASK { ?x <a> ?y . ?y <b> ?z }"));
        assert!(p.is_cq && p.is_cpf && p.is_cqf && p.is_aof && p.is_cqfo);
        let p = classify_fragments(&body("ASK { ?x <a> ?y FILTER(?x < ?y) }"));
        assert!(p.is_cpf && !p.is_cqf && !p.is_cq);
        let p = classify_fragments(&body("ASK { { ?x <a> ?y } UNION { ?x <b> ?y } }"));
        assert!(!p.is_aof && !p.is_cq && !p.is_cpf && !p.is_cqfo);
        assert!(!is_aof(&body("ASK { ?x <a>/<b> ?y }")));
        assert!(!is_aof(&body("ASK { ?x <a> ?y FILTER EXISTS { ?y <b> ?z } }")));
    }

    #[test]
    fn example_pattern_trees() {
        let t1 = build_pattern_tree(&p1()).unwrap();
        assert_eq!(t1.nodes.len(), 3);
        assert_eq!(t1.root().children, [1, 2]);
        let t2 = build_pattern_tree(&p2()).unwrap();
        assert_eq!(t2.root().children, [1]);
        assert_eq!(t2.nodes[1].children, [2]);
        for (p, t) in [(p1(), t1), (p2(), t2)] {
            assert_eq!(is_well_designed(&p), Some(true));
            assert!(t.is_well_designed());
            assert_eq!(t.interface_width(), 1);
            assert!(classify_fragments(&p).is_cqfo);
        }
        let single = build_pattern_tree(&t("?x", "p", "?y")).unwrap();
        assert_eq!(single.nodes.len(), 1);
        assert_eq!(single.interface_width(), 0);
    }

    #[test]
    fn example_violations() {
        let root_without_a = opt(
            opt(t("?B", "name", "?N"), t("?A", "email", "?E")),
            t("?A", "webPage", "?W"),
        );
        assert_eq!(is_well_designed(&root_without_a), Some(false));
        assert!(!build_pattern_tree(&root_without_a).unwrap().is_well_designed());
        assert!(!classify_fragments(&root_without_a).is_cqfo);

        let w_for_n = opt(
            opt(t("?A", "name", "?W"), t("?A", "email", "?E")),
            t("?A", "webPage", "?W"),
        );
        assert_eq!(is_well_designed(&w_for_n), Some(true));
        let p = classify_fragments(&w_for_n);
        assert_eq!(p.interface_width, Some(2));
        assert!(!p.is_cqfo);

        let email_without_a = opt(
            t("?A", "name", "?N"),
            opt(t("?B", "email", "?E"), t("?A", "webPage", "?W")),
        );
        assert_eq!(is_well_designed(&email_without_a), Some(false));
        assert!(!build_pattern_tree(&email_without_a).unwrap().is_well_designed());
    }

    #[test]
    fn normal_form_examples() {
        assert_eq!(opt_normal_form(&p1()).unwrap(), p1());
        assert_eq!(opt_normal_form(&p2()).unwrap(), p2());
        let cq = body("ASK { ?x <a> ?y . ?y <b> ?z . ?z <c> ?w }");
        assert_eq!(opt_normal_form(&cq).unwrap(), cq);
        let p = GraphPattern::and(opt(t("?x", "a", "?y"), t("?y", "b", "?z")), t("?x", "c", "?w"));
        let expected = opt(
            GraphPattern::and(t("?x", "a", "?y"), t("?x", "c", "?w")),
            t("?y", "b", "?z"),
        );
        assert_eq!(opt_normal_form(&p).unwrap(), expected);
        assert!(opt_normal_form(&body("ASK { ?x <a>* ?y }")).is_err());
    }

    // ----- brute-force evaluation over small graphs ------------------------

    type Mapping = BTreeMap<String, String>;

    fn term_value(t: &Term, m: &Mapping) -> Option<String> {
        match t {
            Term::Var(v) => m.get(v).cloned(),
            Term::Iri(i) => Some(i.clone()),
            _ => None,
        }
    }

    fn eval_expr(e: &Expression, m: &Mapping) -> Option<bool> {
        let val = |e: &Expression| match e {
            Expression::Var(v) => m.get(v).cloned(),
            Expression::Constant(Term::Iri(i)) => Some(i.clone()),
            _ => None,
        };
        match e {
            Expression::Compare(CompareOp::Eq, a, b) => Some(val(a)? == val(b)?),
            Expression::Compare(CompareOp::Ne, a, b) => Some(val(a)? != val(b)?),
            Expression::BuiltIn { name, args } if name == "BOUND" => match &args[0] {
                Expression::Var(v) => Some(m.contains_key(v)),
                _ => None,
            },
            Expression::Not(a) => Some(!eval_expr(a, m)?),
            _ => None,
        }
    }

    fn compatible(a: &Mapping, b: &Mapping) -> bool {
        a.iter().all(|(k, v)| b.get(k).is_none_or(|w| w == v))
    }

    fn eval(p: &GraphPattern, g: &[(String, String, String)]) -> BTreeSet<Mapping> {
        match p {
            GraphPattern::Empty => [Mapping::new()].into(),
            GraphPattern::Triple(tp) => {
                let Predicate::Term(pred) = &tp.predicate else { panic!() };
                let mut out = BTreeSet::new();
                for (s, pr, o) in g {
                    let mut m = Mapping::new();
                    let ok = [(&tp.subject, s), (pred, pr), (&tp.object, o)]
                        .into_iter()
                        .all(|(t, val)| match t {
                            Term::Var(v) => match m.get(v) {
                                Some(x) => x == val,
                                None => {
                                    m.insert(v.clone(), val.clone());
                                    true
                                }
                            },
                            _ => term_value(t, &m).as_ref() == Some(val),
                        });
                    if ok {
                        out.insert(m);
                    }
                }
                out
            }
            GraphPattern::And(a, b) => {
                let (ra, rb) = (eval(a, g), eval(b, g));
                let mut out = BTreeSet::new();
                for x in &ra {
                    for y in &rb {
                        if compatible(x, y) {
                            let mut m = x.clone();
                            m.extend(y.clone());
                            out.insert(m);
                        }
                    }
                }
                out
            }
            GraphPattern::Optional(a, b) => {
                let (ra, rb) = (eval(a, g), eval(b, g));
                let mut out = BTreeSet::new();
                for x in &ra {
                    let mut matched = false;
                    for y in &rb {
                        if compatible(x, y) {
                            matched = true;
                            let mut m = x.clone();
                            m.extend(y.clone());
                            out.insert(m);
                        }
                    }
                    if !matched {
                        out.insert(x.clone());
                    }
                }
                out
            }
            GraphPattern::Filter(inner, c) => eval(inner, g)
                .into_iter()
                .filter(|m| eval_expr(&c.expr, m) == Some(true))
                .collect(),
            _ => unreachable!(),
        }
    }

    fn random_aof(rng: &mut ChaCha8Rng, depth: u32) -> GraphPattern {
        let var = |rng: &mut ChaCha8Rng| Term::var(format!("x{}", rng.gen_range(0..4)));
        let node = |rng: &mut ChaCha8Rng| {
            if rng.gen_bool(0.8) {
                var(rng)
            } else {
                Term::iri(format!("c{}", rng.gen_range(0..2)))
            }
        };
        if depth == 0 || rng.gen_bool(0.3) {
            return GraphPattern::Triple(TriplePattern::new(
                node(rng),
                Predicate::Term(Term::iri(format!("p{}", rng.gen_range(0..2)))),
                node(rng),
            ));
        }
        match rng.gen_range(0..3) {
            0 => GraphPattern::and(random_aof(rng, depth - 1), random_aof(rng, depth - 1)),
            1 => GraphPattern::optional(random_aof(rng, depth - 1), random_aof(rng, depth - 1)),
            _ => {
                let inner = random_aof(rng, depth - 1);
                let vars: Vec<String> = inner.vars().into_iter().collect();
                let pick = |rng: &mut ChaCha8Rng| Expression::Var(vars[rng.gen_range(0..vars.len())].clone());
                let e = if vars.is_empty() {
                    Expression::Compare(
                        CompareOp::Eq,
                        Box::new(Expression::Constant(Term::iri("c0"))),
                        Box::new(Expression::Constant(Term::iri("c0"))),
                    )
                } else {
                    match rng.gen_range(0..3) {
                        0 => Expression::Compare(CompareOp::Eq, Box::new(pick(rng)), Box::new(pick(rng))),
                        1 => Expression::BuiltIn {
                            name: "BOUND".into(),
                            args: vec![pick(rng)],
                        },
                        _ => Expression::Compare(
                            CompareOp::Ne,
                            Box::new(pick(rng)),
                            Box::new(Expression::Constant(Term::iri("c1"))),
                        ),
                    }
                };
                GraphPattern::filter(inner, e)
            }
        }
    }

    fn random_graph(rng: &mut ChaCha8Rng) -> Vec<(String, String, String)> {
        (0..5)
            .map(|_| {
                (
                    format!("c{}", rng.gen_range(0..3)),
                    format!("p{}", rng.gen_range(0..2)),
                    format!("c{}", rng.gen_range(0..3)),
                )
            })
            .collect()
    }

    fn triple_multiset(p: &GraphPattern) -> Vec<TriplePattern> {
        let mut v: Vec<TriplePattern> = p.local_triples().into_iter().cloned().collect();
        v.sort_by_key(|t| format!("{t}"));
        v
    }

    #[test]
    fn normal_form_preserves_semantics_of_well_designed_patterns() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 300 {
            let p = random_aof(&mut rng, 3);
            if is_well_designed(&p) != Some(true) {
                continue;
            }
            checked += 1;
            let nf = opt_normal_form(&p).unwrap();
            for _ in 0..5 {
                let g = random_graph(&mut rng);
                assert_eq!(eval(&p, &g), eval(&nf, &g), "{p}\n{nf}\n{g:?}");
            }
        }
    }

    #[test]
    fn normal_form_invariants_on_random_patterns() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let p = random_aof(&mut rng, 4);
            let nf = opt_normal_form(&p).unwrap();
            assert_eq!(triple_multiset(&p), triple_multiset(&nf));
            assert_eq!(p.vars(), nf.vars());
            assert_eq!(opt_normal_form(&nf).unwrap(), nf);
            let tree = build_pattern_tree(&nf).unwrap();
            // On normal-form input the definition and the tree criterion agree.
            assert_eq!(is_well_designed(&nf), Some(tree.is_well_designed()), "{nf}");
            // In general well-designedness implies a connected tree.
            if is_well_designed(&p) == Some(true) {
                assert!(build_pattern_tree(&p).unwrap().is_well_designed(), "{p}");
            }
            let prof = classify_fragments(&p);
            assert!(!prof.is_cq || prof.is_cpf);
            assert!(!prof.is_cq || prof.is_cqf);
            assert!(!prof.is_cq || prof.is_cqfo);
            assert!(!prof.is_cqf || prof.is_cpf);
            assert_eq!(
                prof.is_cqfo,
                prof.is_well_designed == Some(true)
                    && prof.simple_filters
                    && prof.interface_width.unwrap() <= 1
            );
        }
    }
}
