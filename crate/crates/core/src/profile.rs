//! Per-query syntactic profile: keywords, triple counts, operator sets and
//! projection.

use std::fmt;

use serde::Serialize;

use crate::ast::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Keyword {
    Select,
    Ask,
    Describe,
    Construct,
    Distinct,
    Limit,
    Offset,
    OrderBy,
    Filter,
    And,
    Union,
    Opt,
    Graph,
    NotExists,
    Minus,
    Exists,
    Count,
    Max,
    Min,
    Avg,
    Sum,
    GroupBy,
    Having,
    Service,
    Bind,
    Values,
    Sample,
    GroupConcat,
    Reduced,
}

impl Keyword {
    /// Report order: the keyword table first, then the extra constructs.
    pub const ALL: [Keyword; 29] = [
        Keyword::Select,
        Keyword::Ask,
        Keyword::Describe,
        Keyword::Construct,
        Keyword::Distinct,
        Keyword::Limit,
        Keyword::Offset,
        Keyword::OrderBy,
        Keyword::Filter,
        Keyword::And,
        Keyword::Union,
        Keyword::Opt,
        Keyword::Graph,
        Keyword::NotExists,
        Keyword::Minus,
        Keyword::Exists,
        Keyword::Count,
        Keyword::Max,
        Keyword::Min,
        Keyword::Avg,
        Keyword::Sum,
        Keyword::GroupBy,
        Keyword::Having,
        Keyword::Service,
        Keyword::Bind,
        Keyword::Values,
        Keyword::Sample,
        Keyword::GroupConcat,
        Keyword::Reduced,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Keyword::Select => "Select",
            Keyword::Ask => "Ask",
            Keyword::Describe => "Describe",
            Keyword::Construct => "Construct",
            Keyword::Distinct => "Distinct",
            Keyword::Limit => "Limit",
            Keyword::Offset => "Offset",
            Keyword::OrderBy => "Order By",
            Keyword::Filter => "Filter",
            Keyword::And => "And",
            Keyword::Union => "Union",
            Keyword::Opt => "Opt",
            Keyword::Graph => "Graph",
            Keyword::NotExists => "Not Exists",
            Keyword::Minus => "Minus",
            Keyword::Exists => "Exists",
            Keyword::Count => "Count",
            Keyword::Max => "Max",
            Keyword::Min => "Min",
            Keyword::Avg => "Avg",
            Keyword::Sum => "Sum",
            Keyword::GroupBy => "Group By",
            Keyword::Having => "Having",
            Keyword::Service => "Service",
            Keyword::Bind => "Bind",
            Keyword::Values => "Values",
            Keyword::Sample => "Sample",
            Keyword::GroupConcat => "Group_Concat",
            Keyword::Reduced => "Reduced",
        }
    }

    fn bit(self) -> u32 {
        1 << (self as u32)
    }
}

/// Set of keywords occurring at least once in a query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct KeywordSet(u32);

impl KeywordSet {
    pub fn insert(&mut self, k: Keyword) {
        self.0 |= k.bit();
    }

    pub fn contains(&self, k: Keyword) -> bool {
        self.0 & k.bit() != 0
    }

    pub fn iter(&self) -> impl Iterator<Item = Keyword> + '_ {
        Keyword::ALL.into_iter().filter(|k| self.contains(*k))
    }

    pub fn is_subset(&self, other: &KeywordSet) -> bool {
        self.0 & !other.0 == 0
    }
}

impl Serialize for KeywordSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter().map(Keyword::name))
    }
}

/// Subset of the operators Filter, And, Opt, Graph, Union.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OperatorSet(u8);

impl OperatorSet {
    pub const F: OperatorSet = OperatorSet(1);
    pub const A: OperatorSet = OperatorSet(2);
    pub const O: OperatorSet = OperatorSet(4);
    pub const G: OperatorSet = OperatorSet(8);
    pub const U: OperatorSet = OperatorSet(16);

    pub const fn empty() -> Self {
        OperatorSet(0)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    /// Bits outside the five operators are dropped.
    pub fn from_bits(bits: u8) -> Self {
        OperatorSet(bits & 0b1_1111)
    }

    pub fn union(self, o: OperatorSet) -> Self {
        OperatorSet(self.0 | o.0)
    }

    pub fn contains(self, o: OperatorSet) -> bool {
        self.0 & o.0 == o.0
    }

    pub fn is_subset(self, o: OperatorSet) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Parse letters such as `"AOF"`.
    pub fn from_letters(s: &str) -> Option<Self> {
        let mut set = OperatorSet::empty();
        for c in s.chars() {
            set = set.union(match c {
                'F' => OperatorSet::F,
                'A' => OperatorSet::A,
                'O' => OperatorSet::O,
                'G' => OperatorSet::G,
                'U' => OperatorSet::U,
                _ => return None,
            });
        }
        Some(set)
    }
}

impl fmt::Display for OperatorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("none");
        }
        for (bit, c) in [
            (OperatorSet::A, 'A'),
            (OperatorSet::O, 'O'),
            (OperatorSet::G, 'G'),
            (OperatorSet::U, 'U'),
            (OperatorSet::F, 'F'),
        ] {
            if self.contains(bit) {
                write!(f, "{c}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorClass {
    Set(OperatorSet),
    /// The body uses something besides triples, Filter, And, Opt, Graph and
    /// Union.
    Other,
}

impl Serialize for OperatorClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            OperatorClass::Set(set) => s.collect_str(set),
            OperatorClass::Other => s.serialize_str("other"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ProjectionStatus {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShallowProfile {
    pub query_type: QueryType,
    pub keywords: KeywordSet,
    /// Triple and property-path patterns in the body, subqueries and EXISTS
    /// patterns included, SERVICE bodies excluded.
    pub triple_count: usize,
    /// How many of those are property-path patterns.
    pub path_count: usize,
    /// `None` for queries without a body.
    pub operators: Option<OperatorClass>,
    /// `None` for Construct and Describe queries.
    pub projection: Option<ProjectionStatus>,
    pub subquery_count: usize,
}

pub fn profile(q: &Query) -> ShallowProfile {
    let mut scan = Scan::default();
    scan.query(q);
    ShallowProfile {
        query_type: q.query_type(),
        keywords: scan.keywords,
        triple_count: scan.triples.len(),
        path_count: scan.triples.iter().filter(|t| t.is_path()).count(),
        operators: q.pattern.as_ref().map(operator_class),
        projection: projection_status(q),
        subquery_count: scan.subqueries,
    }
}

pub fn keyword_profile(q: &Query) -> KeywordSet {
    let mut scan = Scan::default();
    scan.query(q);
    scan.keywords
}

pub fn triple_count(q: &Query) -> usize {
    counted_triples(q).len()
}

/// The triple patterns counted by [`triple_count`], in document order.
pub fn counted_triples(q: &Query) -> Vec<&TriplePattern> {
    let mut scan = Scan::default();
    scan.query(q);
    scan.triples
}

/// Property paths of all counted path patterns.
pub fn property_paths(q: &Query) -> Vec<&PropertyPath> {
    counted_triples(q)
        .into_iter()
        .filter_map(|t| match &t.predicate {
            Predicate::Path(p) => Some(p),
            Predicate::Term(_) => None,
        })
        .collect()
}

#[derive(Default)]
struct Scan<'a> {
    keywords: KeywordSet,
    triples: Vec<&'a TriplePattern>,
    subqueries: usize,
    service_depth: usize,
}

impl<'a> Scan<'a> {
    fn query(&mut self, q: &'a Query) {
        let k = &mut self.keywords;
        match &q.form {
            QueryForm::Select {
                distinct, reduced, ..
            } => {
                k.insert(Keyword::Select);
                if *distinct {
                    k.insert(Keyword::Distinct);
                }
                if *reduced {
                    k.insert(Keyword::Reduced);
                }
            }
            QueryForm::Ask => k.insert(Keyword::Ask),
            QueryForm::Construct(_) => k.insert(Keyword::Construct),
            QueryForm::Describe(_) => k.insert(Keyword::Describe),
        }
        let m = &q.modifiers;
        if m.limit.is_some() {
            k.insert(Keyword::Limit);
        }
        if m.offset.is_some() {
            k.insert(Keyword::Offset);
        }
        if !m.order_by.is_empty() {
            k.insert(Keyword::OrderBy);
        }
        if !m.group_by.is_empty() {
            k.insert(Keyword::GroupBy);
        }
        if !m.having.is_empty() {
            k.insert(Keyword::Having);
        }
        if q.values.is_some() {
            k.insert(Keyword::Values);
        }
        for e in q.expressions() {
            self.expr(e);
        }
        if let Some(p) = &q.pattern {
            self.pattern(p);
        }
    }

    fn pattern(&mut self, p: &'a GraphPattern) {
        match p {
            GraphPattern::Empty => {}
            GraphPattern::Triple(t) => {
                if self.service_depth == 0 {
                    self.triples.push(t);
                }
            }
            GraphPattern::And(a, b) => {
                self.keywords.insert(Keyword::And);
                self.pattern(a);
                self.pattern(b);
            }
            GraphPattern::Union(a, b) => {
                self.keywords.insert(Keyword::Union);
                self.pattern(a);
                self.pattern(b);
            }
            GraphPattern::Optional(a, b) => {
                self.keywords.insert(Keyword::Opt);
                self.pattern(a);
                self.pattern(b);
            }
            GraphPattern::Minus(a, b) => {
                self.keywords.insert(Keyword::Minus);
                self.pattern(a);
                self.pattern(b);
            }
            GraphPattern::Filter(inner, c) => {
                self.keywords.insert(Keyword::Filter);
                self.pattern(inner);
                self.expr(&c.expr);
            }
            GraphPattern::Graph(_, inner) => {
                self.keywords.insert(Keyword::Graph);
                self.pattern(inner);
            }
            GraphPattern::Service { inner, .. } => {
                self.keywords.insert(Keyword::Service);
                self.service_depth += 1;
                self.pattern(inner);
                self.service_depth -= 1;
            }
            GraphPattern::Bind { expr, inner, .. } => {
                self.keywords.insert(Keyword::Bind);
                self.pattern(inner);
                self.expr(expr);
            }
            GraphPattern::Values(_) => self.keywords.insert(Keyword::Values),
            GraphPattern::SubQuery(q) => {
                self.subqueries += 1;
                self.query(q);
            }
        }
    }

    fn expr(&mut self, e: &'a Expression) {
        let mut nested: Vec<&'a GraphPattern> = Vec::new();
        let k = &mut self.keywords;
        e.walk(&mut |sub| match sub {
            Expression::Exists(p) => {
                k.insert(Keyword::Exists);
                nested.push(p);
            }
            Expression::NotExists(p) => {
                k.insert(Keyword::NotExists);
                nested.push(p);
            }
            Expression::Aggregate { kind, .. } => k.insert(match kind {
                AggregateKind::Count => Keyword::Count,
                AggregateKind::Sum => Keyword::Sum,
                AggregateKind::Min => Keyword::Min,
                AggregateKind::Max => Keyword::Max,
                AggregateKind::Avg => Keyword::Avg,
                AggregateKind::Sample => Keyword::Sample,
                AggregateKind::GroupConcat => Keyword::GroupConcat,
            }),
            _ => {}
        });
        for p in nested {
            self.pattern(p);
        }
    }
}

/// Operators used in a body, or `Other` when it uses anything beyond
/// triples, Filter, And, Opt, Graph and Union.
pub fn operator_class(p: &GraphPattern) -> OperatorClass {
    fn go(p: &GraphPattern, set: &mut OperatorSet) -> bool {
        match p {
            GraphPattern::Empty => true,
            GraphPattern::Triple(t) => !t.is_path(),
            GraphPattern::And(a, b) => {
                *set = set.union(OperatorSet::A);
                go(a, set) && go(b, set)
            }
            GraphPattern::Optional(a, b) => {
                *set = set.union(OperatorSet::O);
                go(a, set) && go(b, set)
            }
            GraphPattern::Union(a, b) => {
                *set = set.union(OperatorSet::U);
                go(a, set) && go(b, set)
            }
            GraphPattern::Filter(inner, c) => {
                *set = set.union(OperatorSet::F);
                !c.expr.contains_exists() && go(inner, set)
            }
            GraphPattern::Graph(_, inner) => {
                *set = set.union(OperatorSet::G);
                go(inner, set)
            }
            GraphPattern::Minus(..)
            | GraphPattern::Bind { .. }
            | GraphPattern::Values(_)
            | GraphPattern::SubQuery(_)
            | GraphPattern::Service { .. } => false,
        }
    }
    let mut set = OperatorSet::empty();
    if go(p, &mut set) {
        OperatorClass::Set(set)
    } else {
        OperatorClass::Other
    }
}

fn has_local_bind(p: &GraphPattern) -> bool {
    match p {
        GraphPattern::Bind { .. } => true,
        GraphPattern::And(a, b)
        | GraphPattern::Union(a, b)
        | GraphPattern::Optional(a, b)
        | GraphPattern::Minus(a, b) => has_local_bind(a) || has_local_bind(b),
        GraphPattern::Filter(inner, _)
        | GraphPattern::Graph(_, inner)
        | GraphPattern::Service { inner, .. } => has_local_bind(inner),
        GraphPattern::Empty
        | GraphPattern::Triple(_)
        | GraphPattern::Values(_)
        | GraphPattern::SubQuery(_) => false,
    }
}

/// Whether a Select or Ask query projects away some in-scope variable.
/// `None` for other query types.
pub fn projection_status(q: &Query) -> Option<ProjectionStatus> {
    let body = q.pattern.as_ref();
    if !q.is_select_or_ask() {
        return None;
    }
    if body.is_some_and(has_local_bind) {
        return Some(ProjectionStatus::Unknown);
    }
    let yes = match &q.form {
        QueryForm::Select {
            projection: Projection::Star,
            ..
        } => false,
        QueryForm::Select {
            projection: Projection::Items(items),
            ..
        } => {
            let scope = body.map(GraphPattern::in_scope_vars).unwrap_or_default();
            scope.iter().any(|v| !items.iter().any(|i| i.var() == v))
        }
        _ => body.is_some_and(|b| !b.vars().is_empty()),
    };
    Some(if yes {
        ProjectionStatus::Yes
    } else {
        ProjectionStatus::No
    })
}
