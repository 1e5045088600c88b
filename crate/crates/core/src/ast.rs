//! Typed syntax tree for the SPARQL 1.1 query subset used in log analysis.

use std::collections::{BTreeMap, BTreeSet};

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDF_FIRST: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#first";
pub const RDF_REST: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#rest";
pub const RDF_NIL: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#nil";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";

/// An RDF term or a variable.
///
/// IRIs are stored fully expanded; variables carry no `?`/`$` sigil.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    BlankNode(String),
    Literal {
        lexical: String,
        datatype: Option<String>,
        lang: Option<String>,
    },
    Var(String),
}

impl Term {
    pub fn iri(s: impl Into<String>) -> Self {
        Term::Iri(s.into())
    }

    pub fn var(s: impl Into<String>) -> Self {
        Term::Var(s.into())
    }

    pub fn simple_literal(s: impl Into<String>) -> Self {
        Term::Literal {
            lexical: s.into(),
            datatype: None,
            lang: None,
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    /// Variables and blank nodes; the nodes of a canonical hypergraph.
    pub fn is_variable_like(&self) -> bool {
        matches!(self, Term::Var(_) | Term::BlankNode(_))
    }

    /// IRIs and literals.
    pub fn is_constant(&self) -> bool {
        matches!(self, Term::Iri(_) | Term::Literal { .. })
    }
}

/// One member of a negated property set `!(a|^b)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NegatedItem {
    pub iri: String,
    pub inverse: bool,
}

/// A property path expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PropertyPath {
    Link(String),
    Inverse(Box<PropertyPath>),
    NegatedSet(Vec<NegatedItem>),
    Seq(Box<PropertyPath>, Box<PropertyPath>),
    Alt(Box<PropertyPath>, Box<PropertyPath>),
    Star(Box<PropertyPath>),
    Plus(Box<PropertyPath>),
    Opt(Box<PropertyPath>),
}

/// Predicate position of a triple pattern.
///
/// A bare IRI or variable is always `Term`; only genuine path expressions
/// are `Path`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Predicate {
    Term(Term),
    Path(PropertyPath),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: Term,
    pub predicate: Predicate,
    pub object: Term,
}

impl TriplePattern {
    pub fn new(subject: Term, predicate: Predicate, object: Term) -> Self {
        TriplePattern {
            subject,
            predicate,
            object,
        }
    }

    pub fn is_path(&self) -> bool {
        matches!(self.predicate, Predicate::Path(_))
    }

    pub fn has_variable_predicate(&self) -> bool {
        matches!(self.predicate, Predicate::Term(Term::Var(_)))
    }

    /// Subject, predicate (when a plain term) and object, in that order.
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        let p = match &self.predicate {
            Predicate::Term(t) => Some(t),
            Predicate::Path(_) => None,
        };
        std::iter::once(&self.subject)
            .chain(p)
            .chain(std::iter::once(&self.object))
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.terms()
            .filter_map(|t| t.as_var().map(str::to_owned))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AggregateKind {
    Count,
    Sum,
    Min,
    Max,
    Avg,
    Sample,
    GroupConcat,
}

impl AggregateKind {
    pub fn keyword(self) -> &'static str {
        match self {
            AggregateKind::Count => "COUNT",
            AggregateKind::Sum => "SUM",
            AggregateKind::Min => "MIN",
            AggregateKind::Max => "MAX",
            AggregateKind::Avg => "AVG",
            AggregateKind::Sample => "SAMPLE",
            AggregateKind::GroupConcat => "GROUP_CONCAT",
        }
    }
}

/// Expression tree used by FILTER, BIND, HAVING, ORDER BY and projections.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expression {
    Var(String),
    Constant(Term),
    Or(Box<Expression>, Box<Expression>),
    And(Box<Expression>, Box<Expression>),
    Not(Box<Expression>),
    Compare(CompareOp, Box<Expression>, Box<Expression>),
    In {
        expr: Box<Expression>,
        list: Vec<Expression>,
        negated: bool,
    },
    Arith(ArithOp, Box<Expression>, Box<Expression>),
    UnaryMinus(Box<Expression>),
    UnaryPlus(Box<Expression>),
    /// Built-in call; `name` is the upper-cased keyword (e.g. `LANG`, `REGEX`).
    BuiltIn { name: String, args: Vec<Expression> },
    /// Call of an IRI-named extension function.
    Function {
        iri: String,
        args: Vec<Expression>,
        distinct: bool,
    },
    Aggregate {
        kind: AggregateKind,
        distinct: bool,
        /// `None` only for `COUNT(*)`.
        arg: Option<Box<Expression>>,
        separator: Option<String>,
    },
    Exists(Box<GraphPattern>),
    NotExists(Box<GraphPattern>),
}

impl Expression {
    /// Variables syntactically occurring in the expression, including those
    /// of embedded EXISTS patterns.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expression::Var(v) => {
                out.insert(v.clone());
            }
            Expression::Constant(t) => {
                if let Term::Var(v) = t {
                    out.insert(v.clone());
                }
            }
            Expression::Or(a, b)
            | Expression::And(a, b)
            | Expression::Compare(_, a, b)
            | Expression::Arith(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expression::Not(a) | Expression::UnaryMinus(a) | Expression::UnaryPlus(a) => {
                a.collect_vars(out)
            }
            Expression::In { expr, list, .. } => {
                expr.collect_vars(out);
                list.iter().for_each(|e| e.collect_vars(out));
            }
            Expression::BuiltIn { args, .. } | Expression::Function { args, .. } => {
                args.iter().for_each(|e| e.collect_vars(out))
            }
            Expression::Aggregate { arg, .. } => {
                if let Some(a) = arg {
                    a.collect_vars(out);
                }
            }
            Expression::Exists(p) | Expression::NotExists(p) => p.collect_vars(out),
        }
    }

    /// Pre-order visit of every sub-expression (EXISTS patterns are not entered).
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expression)) {
        f(self);
        match self {
            Expression::Var(_) | Expression::Constant(_) => {}
            Expression::Or(a, b)
            | Expression::And(a, b)
            | Expression::Compare(_, a, b)
            | Expression::Arith(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Expression::Not(a) | Expression::UnaryMinus(a) | Expression::UnaryPlus(a) => a.walk(f),
            Expression::In { expr, list, .. } => {
                expr.walk(f);
                list.iter().for_each(|e| e.walk(f));
            }
            Expression::BuiltIn { args, .. } | Expression::Function { args, .. } => {
                args.iter().for_each(|e| e.walk(f))
            }
            Expression::Aggregate { arg, .. } => {
                if let Some(a) = arg {
                    a.walk(f);
                }
            }
            Expression::Exists(_) | Expression::NotExists(_) => {}
        }
    }

    pub fn contains_exists(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if matches!(e, Expression::Exists(_) | Expression::NotExists(_)) {
                found = true;
            }
        });
        found
    }
}

/// A FILTER constraint together with its variable set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FilterConstraint {
    pub expr: Expression,
    pub vars: BTreeSet<String>,
}

impl FilterConstraint {
    pub fn new(expr: Expression) -> Self {
        let vars = expr.vars();
        FilterConstraint { expr, vars }
    }

    /// `Some((x, y))` when the constraint is exactly `?x = ?y`.
    pub fn as_var_equality(&self) -> Option<(&str, &str)> {
        match &self.expr {
            Expression::Compare(CompareOp::Eq, a, b) => match (a.as_ref(), b.as_ref()) {
                (Expression::Var(x), Expression::Var(y)) => Some((x, y)),
                _ => None,
            },
            _ => None,
        }
    }
}

/// Inline data (`VALUES`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ValuesBlock {
    pub vars: Vec<String>,
    /// `None` cells are `UNDEF`.
    pub rows: Vec<Vec<Option<Term>>>,
}

/// Graph pattern tree after the standard group-to-algebra translation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GraphPattern {
    /// The empty group `{}`.
    Empty,
    Triple(TriplePattern),
    And(Box<GraphPattern>, Box<GraphPattern>),
    Filter(Box<GraphPattern>, FilterConstraint),
    Union(Box<GraphPattern>, Box<GraphPattern>),
    Optional(Box<GraphPattern>, Box<GraphPattern>),
    Graph(Term, Box<GraphPattern>),
    Minus(Box<GraphPattern>, Box<GraphPattern>),
    Bind {
        expr: Expression,
        var: String,
        inner: Box<GraphPattern>,
    },
    Values(ValuesBlock),
    SubQuery(Box<Query>),
    Service {
        target: Term,
        silent: bool,
        inner: Box<GraphPattern>,
    },
}

impl GraphPattern {
    pub fn and(a: GraphPattern, b: GraphPattern) -> GraphPattern {
        GraphPattern::And(Box::new(a), Box::new(b))
    }

    pub fn optional(a: GraphPattern, b: GraphPattern) -> GraphPattern {
        GraphPattern::Optional(Box::new(a), Box::new(b))
    }

    pub fn filter(p: GraphPattern, expr: Expression) -> GraphPattern {
        GraphPattern::Filter(Box::new(p), FilterConstraint::new(expr))
    }

    /// `vars(P)`: every variable occurring anywhere in the pattern,
    /// including filters, binds, inline data and subqueries.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            GraphPattern::Empty => {}
            GraphPattern::Triple(t) => {
                for term in t.terms() {
                    if let Term::Var(v) = term {
                        out.insert(v.clone());
                    }
                }
            }
            GraphPattern::And(a, b)
            | GraphPattern::Union(a, b)
            | GraphPattern::Optional(a, b)
            | GraphPattern::Minus(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            GraphPattern::Filter(p, f) => {
                p.collect_vars(out);
                out.extend(f.vars.iter().cloned());
            }
            GraphPattern::Graph(t, p) | GraphPattern::Service { target: t, inner: p, .. } => {
                if let Term::Var(v) = t {
                    out.insert(v.clone());
                }
                p.collect_vars(out);
            }
            GraphPattern::Bind { expr, var, inner } => {
                inner.collect_vars(out);
                expr.collect_vars(out);
                out.insert(var.clone());
            }
            GraphPattern::Values(v) => out.extend(v.vars.iter().cloned()),
            GraphPattern::SubQuery(q) => q.collect_vars(out),
        }
    }

    /// In-scope variables following the algebra's scoping rules: filters and
    /// the right side of MINUS add nothing, subqueries expose only their
    /// projection.
    pub fn in_scope_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_in_scope(&mut out);
        out
    }

    fn collect_in_scope(&self, out: &mut BTreeSet<String>) {
        match self {
            GraphPattern::Empty => {}
            GraphPattern::Triple(t) => out.extend(t.vars()),
            GraphPattern::And(a, b) | GraphPattern::Union(a, b) | GraphPattern::Optional(a, b) => {
                a.collect_in_scope(out);
                b.collect_in_scope(out);
            }
            GraphPattern::Minus(a, _) | GraphPattern::Filter(a, _) => a.collect_in_scope(out),
            GraphPattern::Graph(t, p) | GraphPattern::Service { target: t, inner: p, .. } => {
                if let Term::Var(v) = t {
                    out.insert(v.clone());
                }
                p.collect_in_scope(out);
            }
            GraphPattern::Bind { var, inner, .. } => {
                inner.collect_in_scope(out);
                out.insert(var.clone());
            }
            GraphPattern::Values(v) => out.extend(v.vars.iter().cloned()),
            GraphPattern::SubQuery(q) => out.extend(q.projected_vars()),
        }
    }

    /// Pre-order traversal of this pattern and all nested patterns,
    /// including EXISTS patterns inside filter/bind expressions and
    /// subquery bodies.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a GraphPattern)) {
        f(self);
        match self {
            GraphPattern::Empty | GraphPattern::Triple(_) | GraphPattern::Values(_) => {}
            GraphPattern::And(a, b)
            | GraphPattern::Union(a, b)
            | GraphPattern::Optional(a, b)
            | GraphPattern::Minus(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            GraphPattern::Filter(p, c) => {
                p.walk(f);
                walk_expr_patterns(&c.expr, f);
            }
            GraphPattern::Graph(_, p) | GraphPattern::Service { inner: p, .. } => p.walk(f),
            GraphPattern::Bind { expr, inner, .. } => {
                inner.walk(f);
                walk_expr_patterns(expr, f);
            }
            GraphPattern::SubQuery(q) => q.walk_patterns(f),
        }
    }

    /// All triple patterns, left to right, without entering subqueries,
    /// SERVICE bodies or EXISTS patterns.
    pub fn local_triples(&self) -> Vec<&TriplePattern> {
        let mut out = Vec::new();
        self.collect_local_triples(&mut out);
        out
    }

    fn collect_local_triples<'a>(&'a self, out: &mut Vec<&'a TriplePattern>) {
        match self {
            GraphPattern::Triple(t) => out.push(t),
            GraphPattern::And(a, b)
            | GraphPattern::Union(a, b)
            | GraphPattern::Optional(a, b)
            | GraphPattern::Minus(a, b) => {
                a.collect_local_triples(out);
                b.collect_local_triples(out);
            }
            GraphPattern::Filter(p, _)
            | GraphPattern::Graph(_, p)
            | GraphPattern::Bind { inner: p, .. } => p.collect_local_triples(out),
            GraphPattern::Empty
            | GraphPattern::Values(_)
            | GraphPattern::SubQuery(_)
            | GraphPattern::Service { .. } => {}
        }
    }
}

pub(crate) fn walk_expr_patterns<'a>(e: &'a Expression, f: &mut dyn FnMut(&'a GraphPattern)) {
    e.walk(&mut |sub| {
        if let Expression::Exists(p) | Expression::NotExists(p) = sub {
            p.walk(f);
        }
    });
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ProjectionItem {
    Var(String),
    Expr(Expression, String),
}

impl ProjectionItem {
    pub fn var(&self) -> &str {
        match self {
            ProjectionItem::Var(v) | ProjectionItem::Expr(_, v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Projection {
    Star,
    Items(Vec<ProjectionItem>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QueryForm {
    Select {
        projection: Projection,
        distinct: bool,
        reduced: bool,
    },
    Ask,
    Construct(Vec<TriplePattern>),
    /// An empty target list means `DESCRIBE *`.
    Describe(Vec<Term>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum QueryType {
    Select,
    Ask,
    Construct,
    Describe,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Prologue {
    pub base: Option<String>,
    pub prefixes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DatasetClause {
    pub iri: String,
    pub named: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupCondition {
    pub expr: Expression,
    pub alias: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderCondition {
    pub expr: Expression,
    pub descending: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SolutionModifiers {
    pub group_by: Vec<GroupCondition>,
    pub having: Vec<Expression>,
    pub order_by: Vec<OrderCondition>,
    pub limit: Option<u64>,
    pub offset: Option<u64>,
}

/// A parsed query: (query form, pattern, solution modifiers) plus prologue.
///
/// Equality ignores `raw_text`, so a query and its re-parsed serialization
/// compare equal.
#[derive(Debug, Clone, Eq)]
pub struct Query {
    pub form: QueryForm,
    pub prologue: Prologue,
    pub dataset: Vec<DatasetClause>,
    pub pattern: Option<GraphPattern>,
    pub modifiers: SolutionModifiers,
    /// Trailing `VALUES` clause.
    pub values: Option<ValuesBlock>,
    pub raw_text: String,
}

impl PartialEq for Query {
    fn eq(&self, other: &Self) -> bool {
        self.form == other.form
            && self.prologue == other.prologue
            && self.dataset == other.dataset
            && self.pattern == other.pattern
            && self.modifiers == other.modifiers
            && self.values == other.values
    }
}

impl std::hash::Hash for Query {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.form.hash(state);
        self.prologue.hash(state);
        self.dataset.hash(state);
        self.pattern.hash(state);
        self.modifiers.hash(state);
        self.values.hash(state);
    }
}

impl Query {
    pub fn query_type(&self) -> QueryType {
        match self.form {
            QueryForm::Select { .. } => QueryType::Select,
            QueryForm::Ask => QueryType::Ask,
            QueryForm::Construct(_) => QueryType::Construct,
            QueryForm::Describe(_) => QueryType::Describe,
        }
    }

    pub fn is_select_or_ask(&self) -> bool {
        matches!(self.query_type(), QueryType::Select | QueryType::Ask)
    }

    /// Variables visible outside a (sub)query.
    pub fn projected_vars(&self) -> BTreeSet<String> {
        match &self.form {
            QueryForm::Select {
                projection: Projection::Items(items),
                ..
            } => items.iter().map(|i| i.var().to_owned()).collect(),
            QueryForm::Select { .. } => self
                .pattern
                .as_ref()
                .map(GraphPattern::in_scope_vars)
                .unwrap_or_default(),
            _ => BTreeSet::new(),
        }
    }

    /// Every variable mentioned anywhere in the query.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<String>) {
        if let QueryForm::Select {
            projection: Projection::Items(items),
            ..
        } = &self.form
        {
            for item in items {
                if let ProjectionItem::Expr(e, _) = item {
                    e.collect_vars(out);
                }
                out.insert(item.var().to_owned());
            }
        }
        if let Some(p) = &self.pattern {
            p.collect_vars(out);
        }
        for g in &self.modifiers.group_by {
            g.expr.collect_vars(out);
            if let Some(a) = &g.alias {
                out.insert(a.clone());
            }
        }
        for h in &self.modifiers.having {
            h.collect_vars(out);
        }
        for o in &self.modifiers.order_by {
            o.expr.collect_vars(out);
        }
        if let Some(v) = &self.values {
            out.extend(v.vars.iter().cloned());
        }
    }

    /// Visit every graph pattern in the body, nested subqueries included.
    pub fn walk_patterns<'a>(&'a self, f: &mut dyn FnMut(&'a GraphPattern)) {
        if let Some(p) = &self.pattern {
            p.walk(f);
        }
        for e in self.expressions() {
            walk_expr_patterns(e, f);
        }
    }

    /// Top-level expressions outside the body: projection, grouping,
    /// HAVING and ORDER BY.
    pub fn expressions(&self) -> Vec<&Expression> {
        let mut out = Vec::new();
        if let QueryForm::Select {
            projection: Projection::Items(items),
            ..
        } = &self.form
        {
            for item in items {
                if let ProjectionItem::Expr(e, _) = item {
                    out.push(e);
                }
            }
        }
        out.extend(self.modifiers.group_by.iter().map(|g| &g.expr));
        out.extend(self.modifiers.having.iter());
        out.extend(self.modifiers.order_by.iter().map(|o| &o.expr));
        out
    }
}
