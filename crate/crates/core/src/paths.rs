//! Structural taxonomy of property-path expressions.

use std::fmt;

use serde::Serialize;

use crate::ast::{NegatedItem, PropertyPath};

/// A property path with inverses pushed to the leaves, `^iri` and `!iri`
/// turned into atoms and sequences/alternatives flattened.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NormalPath {
    Atom(Atom),
    /// A negated set with at least two members.
    NegatedSet(Vec<NegatedItem>),
    Seq(Vec<NormalPath>),
    Alt(Vec<NormalPath>),
    Star(Box<NormalPath>),
    Plus(Box<NormalPath>),
    Opt(Box<NormalPath>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    Link(String),
    Inverse(String),
    /// `!a` or `!^a`.
    Negated(NegatedItem),
}

pub fn normalize_path(pp: &PropertyPath) -> NormalPath {
    norm(pp, false)
}

fn norm(pp: &PropertyPath, inverse: bool) -> NormalPath {
    match pp {
        PropertyPath::Link(iri) if inverse => NormalPath::Atom(Atom::Inverse(iri.clone())),
        PropertyPath::Link(iri) => NormalPath::Atom(Atom::Link(iri.clone())),
        PropertyPath::Inverse(p) => norm(p, !inverse),
        PropertyPath::NegatedSet(items) => {
            let items: Vec<NegatedItem> = items
                .iter()
                .map(|i| NegatedItem {
                    iri: i.iri.clone(),
                    inverse: i.inverse != inverse,
                })
                .collect();
            match <[NegatedItem; 1]>::try_from(items) {
                Ok([item]) => NormalPath::Atom(Atom::Negated(item)),
                Err(items) => NormalPath::NegatedSet(items),
            }
        }
        PropertyPath::Seq(a, b) => {
            let (first, second) = if inverse { (b, a) } else { (a, b) };
            let mut parts = Vec::new();
            for p in [first, second] {
                match norm(p, inverse) {
                    NormalPath::Seq(inner) => parts.extend(inner),
                    other => parts.push(other),
                }
            }
            NormalPath::Seq(parts)
        }
        PropertyPath::Alt(a, b) => {
            let mut parts = Vec::new();
            for p in [a, b] {
                match norm(p, inverse) {
                    NormalPath::Alt(inner) => parts.extend(inner),
                    other => parts.push(other),
                }
            }
            NormalPath::Alt(parts)
        }
        PropertyPath::Star(p) => NormalPath::Star(Box::new(norm(p, inverse))),
        PropertyPath::Plus(p) => NormalPath::Plus(Box::new(norm(p, inverse))),
        PropertyPath::Opt(p) => NormalPath::Opt(Box::new(norm(p, inverse))),
    }
}

/// Expression templates, in the row order of the navigational path table,
/// plus the non-navigational forms and a catch-all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PathTemplate {
    AltStar,
    Star,
    Seq,
    StarSeq,
    Alt,
    Plus,
    OptSeq,
    SeqAlt,
    SeqOptTail,
    SeqStarOrAtom,
    StarOpt,
    SeqSeqStar,
    NegatedSet,
    AltPlus,
    AltAlt,
    OptOrAtom,
    StarOrAtom,
    AltOpt,
    AtomOrPlus,
    PlusOrPlus,
    SeqStarGroup,
    BareNegation,
    BareInverse,
    Link,
    Other,
}

impl PathTemplate {
    /// The 21 navigational templates in table order.
    pub const TABLE: [PathTemplate; 21] = [
        PathTemplate::AltStar,
        PathTemplate::Star,
        PathTemplate::Seq,
        PathTemplate::StarSeq,
        PathTemplate::Alt,
        PathTemplate::Plus,
        PathTemplate::OptSeq,
        PathTemplate::SeqAlt,
        PathTemplate::SeqOptTail,
        PathTemplate::SeqStarOrAtom,
        PathTemplate::StarOpt,
        PathTemplate::SeqSeqStar,
        PathTemplate::NegatedSet,
        PathTemplate::AltPlus,
        PathTemplate::AltAlt,
        PathTemplate::OptOrAtom,
        PathTemplate::StarOrAtom,
        PathTemplate::AltOpt,
        PathTemplate::AtomOrPlus,
        PathTemplate::PlusOrPlus,
        PathTemplate::SeqStarGroup,
    ];

    pub const ALL: [PathTemplate; 25] = [
        PathTemplate::AltStar,
        PathTemplate::Star,
        PathTemplate::Seq,
        PathTemplate::StarSeq,
        PathTemplate::Alt,
        PathTemplate::Plus,
        PathTemplate::OptSeq,
        PathTemplate::SeqAlt,
        PathTemplate::SeqOptTail,
        PathTemplate::SeqStarOrAtom,
        PathTemplate::StarOpt,
        PathTemplate::SeqSeqStar,
        PathTemplate::NegatedSet,
        PathTemplate::AltPlus,
        PathTemplate::AltAlt,
        PathTemplate::OptOrAtom,
        PathTemplate::StarOrAtom,
        PathTemplate::AltOpt,
        PathTemplate::AtomOrPlus,
        PathTemplate::PlusOrPlus,
        PathTemplate::SeqStarGroup,
        PathTemplate::BareNegation,
        PathTemplate::BareInverse,
        PathTemplate::Link,
        PathTemplate::Other,
    ];

    pub fn notation(self) -> &'static str {
        match self {
            PathTemplate::AltStar => "(a1|...|ak)*",
            PathTemplate::Star => "a*",
            PathTemplate::Seq => "a1/.../ak",
            PathTemplate::StarSeq => "a*/b",
            PathTemplate::Alt => "a1|...|ak",
            PathTemplate::Plus => "a+",
            PathTemplate::OptSeq => "a1?/.../ak?",
            PathTemplate::SeqAlt => "a(b1|...|bk)",
            PathTemplate::SeqOptTail => "a1/a2?/.../ak?",
            PathTemplate::SeqStarOrAtom => "(a/b*)|c",
            PathTemplate::StarOpt => "a*/b?",
            PathTemplate::SeqSeqStar => "a/b/c*",
            PathTemplate::NegatedSet => "!(a|b)",
            PathTemplate::AltPlus => "(a1|...|ak)+",
            PathTemplate::AltAlt => "(a1|...|ak)(a1|...|ak)",
            PathTemplate::OptOrAtom => "a?|b",
            PathTemplate::StarOrAtom => "a*|b",
            PathTemplate::AltOpt => "(a|b)?",
            PathTemplate::AtomOrPlus => "a|b+",
            PathTemplate::PlusOrPlus => "a+|b+",
            PathTemplate::SeqStarGroup => "(a/b)*",
            PathTemplate::BareNegation => "!a",
            PathTemplate::BareInverse => "^a",
            PathTemplate::Link => "a",
            PathTemplate::Other => "other",
        }
    }

    pub fn is_navigational(self) -> bool {
        !matches!(
            self,
            PathTemplate::BareNegation | PathTemplate::BareInverse | PathTemplate::Link
        )
    }

    /// The one template observed outside the tractable class for simple
    /// path semantics. A static annotation, not a computed property.
    pub fn outside_ctract(self) -> bool {
        self == PathTemplate::SeqStarGroup
    }
}

impl fmt::Display for PathTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.notation())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct PathClass {
    pub template: PathTemplate,
    /// Arity for the parameterized templates.
    pub k: Option<usize>,
    pub navigational: bool,
}

impl PathClass {
    fn new(template: PathTemplate, k: Option<usize>) -> Self {
        PathClass {
            template,
            k,
            navigational: template.is_navigational(),
        }
    }
}

pub fn classify_path(pp: &PropertyPath) -> PathClass {
    classify_normal(&normalize_path(pp))
}

fn is_atom(p: &NormalPath) -> bool {
    matches!(p, NormalPath::Atom(_))
}

fn star_atom(p: &NormalPath) -> bool {
    matches!(p, NormalPath::Star(a) if is_atom(a))
}

fn plus_atom(p: &NormalPath) -> bool {
    matches!(p, NormalPath::Plus(a) if is_atom(a))
}

fn opt_atom(p: &NormalPath) -> bool {
    matches!(p, NormalPath::Opt(a) if is_atom(a))
}

/// Number of alternatives when `p` is an alternative of at least two atoms.
fn atom_alt(p: &NormalPath) -> Option<usize> {
    match p {
        NormalPath::Alt(xs) if xs.len() >= 2 && xs.iter().all(is_atom) => Some(xs.len()),
        _ => None,
    }
}

/// A two-element sequence matching `(f, g)` in either order.
fn pair_either(xs: &[NormalPath], f: fn(&NormalPath) -> bool, g: fn(&NormalPath) -> bool) -> bool {
    matches!(xs, [a, b] if (f(a) && g(b)) || (g(a) && f(b)))
}

pub fn classify_normal(p: &NormalPath) -> PathClass {
    use PathTemplate as T;
    let class = |t, k| PathClass::new(t, k);
    match p {
        NormalPath::Atom(Atom::Link(_)) => class(T::Link, None),
        NormalPath::Atom(Atom::Inverse(_)) => class(T::BareInverse, None),
        NormalPath::Atom(Atom::Negated(_)) => class(T::BareNegation, None),
        NormalPath::NegatedSet(_) => class(T::NegatedSet, None),
        NormalPath::Star(inner) => {
            if let Some(k) = atom_alt(inner) {
                class(T::AltStar, Some(k))
            } else if is_atom(inner) {
                class(T::Star, None)
            } else if matches!(&**inner, NormalPath::Seq(xs) if xs.iter().all(is_atom)) {
                class(T::SeqStarGroup, None)
            } else {
                class(T::Other, None)
            }
        }
        NormalPath::Plus(inner) => {
            if is_atom(inner) {
                class(T::Plus, None)
            } else if let Some(k) = atom_alt(inner) {
                class(T::AltPlus, Some(k))
            } else {
                class(T::Other, None)
            }
        }
        NormalPath::Opt(inner) => {
            if is_atom(inner) {
                class(T::OptSeq, Some(1))
            } else if atom_alt(inner).is_some() {
                class(T::AltOpt, None)
            } else {
                class(T::Other, None)
            }
        }
        NormalPath::Seq(xs) => classify_seq(xs),
        NormalPath::Alt(xs) => classify_alt(xs),
    }
}

fn classify_seq(xs: &[NormalPath]) -> PathClass {
    use PathTemplate as T;
    let n = xs.len();
    if xs.iter().all(is_atom) {
        return PathClass::new(T::Seq, Some(n));
    }
    if pair_either(xs, star_atom, is_atom) {
        return PathClass::new(T::StarSeq, None);
    }
    if xs.iter().all(opt_atom) {
        return PathClass::new(T::OptSeq, Some(n));
    }
    if let [a, b] = xs {
        let k = if is_atom(a) {
            atom_alt(b)
        } else if is_atom(b) {
            atom_alt(a)
        } else {
            None
        };
        if k.is_some() {
            return PathClass::new(T::SeqAlt, k);
        }
    }
    // One plain atom at one end, optional atoms everywhere else.
    if n >= 2 {
        let forward = is_atom(&xs[0]) && xs[1..].iter().all(opt_atom);
        let backward = is_atom(&xs[n - 1]) && xs[..n - 1].iter().all(opt_atom);
        if forward || backward {
            return PathClass::new(T::SeqOptTail, Some(n - 1));
        }
    }
    if pair_either(xs, star_atom, opt_atom) {
        return PathClass::new(T::StarOpt, None);
    }
    if let [a, b, c] = xs {
        if (is_atom(a) && is_atom(b) && star_atom(c)) || (star_atom(a) && is_atom(b) && is_atom(c)) {
            return PathClass::new(T::SeqSeqStar, None);
        }
    }
    if let [a, b] = xs {
        if let (Some(i), Some(j)) = (atom_alt(a), atom_alt(b)) {
            return PathClass::new(T::AltAlt, Some(i.max(j)));
        }
    }
    PathClass::new(T::Other, None)
}

fn classify_alt(xs: &[NormalPath]) -> PathClass {
    use PathTemplate as T;
    if xs.iter().all(is_atom) {
        return PathClass::new(T::Alt, Some(xs.len()));
    }
    let seq_star = |p: &NormalPath| matches!(p, NormalPath::Seq(s) if pair_either(s, is_atom, star_atom));
    if pair_either(xs, seq_star, is_atom) {
        return PathClass::new(T::SeqStarOrAtom, None);
    }
    if pair_either(xs, opt_atom, is_atom) {
        return PathClass::new(T::OptOrAtom, None);
    }
    if pair_either(xs, star_atom, is_atom) {
        return PathClass::new(T::StarOrAtom, None);
    }
    if pair_either(xs, is_atom, plus_atom) {
        return PathClass::new(T::AtomOrPlus, None);
    }
    if pair_either(xs, plus_atom, plus_atom) {
        return PathClass::new(T::PlusOrPlus, None);
    }
    PathClass::new(T::Other, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Predicate, Query};
    use crate::parse_query;
    use proptest::prelude::*;

    fn path(text: &str) -> PropertyPath {
        let q: Query = parse_query(&format!(
            "PREFIX : <http://e/> ASK {{ ?s {text} ?o }}"
        ))
        .unwrap();
        match q.pattern.unwrap() {
            crate::ast::GraphPattern::Triple(t) => match t.predicate {
                Predicate::Path(p) => p,
                other => panic!("not a path: {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
    }

    fn class(text: &str) -> (PathTemplate, Option<usize>) {
        let c = classify_path(&path(text));
        (c.template, c.k)
    }

    #[test]
    fn wikidata_path() {
        let q = parse_query(
            "PREFIX wdt: <http://www.wikidata.org/prop/direct/> \
             SELECT ?x WHERE { ?x wdt:P31/wdt:P279* ?c }",
        )
        .unwrap();
        let pp = crate::profile::property_paths(&q);
        assert_eq!(pp.len(), 1);
        let c = classify_path(pp[0]);
        assert_eq!(c.template, PathTemplate::StarSeq);
        assert!(c.navigational);
    }

    #[test]
    fn table_rows() {
        use PathTemplate as T;
        let cases: &[(&str, T, Option<usize>)] = &[
            ("(:a|:b|:c)*", T::AltStar, Some(3)),
            (":a*", T::Star, None),
            (":a/:b/:c", T::Seq, Some(3)),
            ("(^:a)/:b", T::Seq, Some(2)),
            ("(!:a)/:b", T::Seq, Some(2)),
            (":a*/:b", T::StarSeq, None),
            (":b/:a*", T::StarSeq, None),
            (":a|:b", T::Alt, Some(2)),
            (":a+", T::Plus, None),
            (":a?", T::OptSeq, Some(1)),
            (":a?/:b?/:c?", T::OptSeq, Some(3)),
            (":a/(:b|:c)", T::SeqAlt, Some(2)),
            ("(:b|:c)/:a", T::SeqAlt, Some(2)),
            (":a/:b?", T::SeqOptTail, Some(1)),
            (":a/:b?/:c?", T::SeqOptTail, Some(2)),
            (":c?/:b?/:a", T::SeqOptTail, Some(2)),
            ("(:a/:b*)|:c", T::SeqStarOrAtom, None),
            (":c|(:b*/:a)", T::SeqStarOrAtom, None),
            (":a*/:b?", T::StarOpt, None),
            (":a/:b/:c*", T::SeqSeqStar, None),
            (":c*/:b/:a", T::SeqSeqStar, None),
            ("!(:a|:b)", T::NegatedSet, None),
            ("(:a|:b)+", T::AltPlus, Some(2)),
            ("(:a|:b)/(:c|:d|:e)", T::AltAlt, Some(3)),
            (":a?|:b", T::OptOrAtom, None),
            (":a*|:b", T::StarOrAtom, None),
            ("(:a|:b)?", T::AltOpt, None),
            (":a|:b+", T::AtomOrPlus, None),
            (":a+|:b+", T::PlusOrPlus, None),
            ("(:a/:b)*", T::SeqStarGroup, None),
            ("!:a", T::BareNegation, None),
            ("!^:a", T::BareNegation, None),
            ("^:a", T::BareInverse, None),
            ("^(^:a)", T::Link, None),
            ("(:a/:b)+", T::Other, None),
            (":a*/:b*", T::Other, None),
        ];
        for (text, t, k) in cases {
            assert_eq!(class(text), (*t, *k), "{text}");
        }
        assert!(PathTemplate::SeqStarGroup.outside_ctract());
        assert!(!classify_path(&path("!:a")).navigational);
        assert!(classify_path(&path("!(:a|:b)")).navigational);
    }

    #[test]
    fn normalization() {
        let n = normalize_path(&path(":a|(:b|:c)"));
        assert!(matches!(n, NormalPath::Alt(ref xs) if xs.len() == 3));
        let n = normalize_path(&path("^(:a/:b)"));
        let NormalPath::Seq(xs) = n else { panic!() };
        assert_eq!(xs[0], NormalPath::Atom(Atom::Inverse("http://e/b".into())));
        assert!(matches!(normalize_path(&path("!(:a|:b)")), NormalPath::NegatedSet(_)));
        let n = normalize_path(&path("^!(:a|^:b)"));
        let NormalPath::NegatedSet(items) = n else { panic!() };
        assert!(items[0].inverse && !items[1].inverse);
    }

    fn arb_path() -> impl Strategy<Value = PropertyPath> {
        let leaf = prop_oneof![
            (0..3u8).prop_map(|i| PropertyPath::Link(format!("http://e/{i}"))),
            (0..3u8).prop_map(|i| PropertyPath::NegatedSet(vec![NegatedItem {
                iri: format!("http://e/{i}"),
                inverse: false
            }])),
        ];
        leaf.prop_recursive(4, 16, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|p| PropertyPath::Inverse(Box::new(p))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| PropertyPath::Seq(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| PropertyPath::Alt(Box::new(a), Box::new(b))),
                inner.clone().prop_map(|p| PropertyPath::Star(Box::new(p))),
                inner.clone().prop_map(|p| PropertyPath::Plus(Box::new(p))),
                inner.prop_map(|p| PropertyPath::Opt(Box::new(p))),
            ]
        })
    }

    /// Reverse every sequence: the mirror image of an expression.
    fn mirror(p: &PropertyPath) -> PropertyPath {
        use PropertyPath as P;
        match p {
            P::Seq(a, b) => P::Seq(Box::new(mirror(b)), Box::new(mirror(a))),
            P::Alt(a, b) => P::Alt(Box::new(mirror(b)), Box::new(mirror(a))),
            P::Inverse(a) => P::Inverse(Box::new(mirror(a))),
            P::Star(a) => P::Star(Box::new(mirror(a))),
            P::Plus(a) => P::Plus(Box::new(mirror(a))),
            P::Opt(a) => P::Opt(Box::new(mirror(a))),
            other => other.clone(),
        }
    }

    proptest! {
        #[test]
        fn mirror_invariance(p in arb_path()) {
            prop_assert_eq!(classify_path(&p), classify_path(&mirror(&p)));
        }

        #[test]
        fn inverse_does_not_change_class_of_navigational_paths(p in arb_path()) {
            let c = classify_path(&p);
            let inv = classify_path(&PropertyPath::Inverse(Box::new(p)));
            if c.template.is_navigational() {
                prop_assert_eq!(c, inv);
            }
        }
    }
}
