//! SPARQL text rendering of the AST.
//!
//! The output is deliberately over-bracketed: every sub-pattern becomes its
//! own group and every expression and path is parenthesized, so that parsing
//! the rendered text reproduces the same tree.

use std::fmt::{self, Display, Formatter, Write};

use crate::ast::*;

impl Display for Term {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(i) => write!(f, "<{i}>"),
            Term::BlankNode(b) => write!(f, "_:{b}"),
            Term::Var(v) => write!(f, "?{v}"),
            Term::Literal {
                lexical,
                datatype,
                lang,
            } => {
                f.write_char('"')?;
                for c in lexical.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\r' => f.write_str("\\r")?,
                        '\t' => f.write_str("\\t")?,
                        c => f.write_char(c)?,
                    }
                }
                f.write_char('"')?;
                if let Some(l) = lang {
                    write!(f, "@{l}")?;
                } else if let Some(dt) = datatype {
                    write!(f, "^^<{dt}>")?;
                }
                Ok(())
            }
        }
    }
}

impl Display for NegatedItem {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if self.inverse {
            f.write_char('^')?;
        }
        write!(f, "<{}>", self.iri)
    }
}

impl Display for PropertyPath {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            PropertyPath::Link(i) => write!(f, "<{i}>"),
            PropertyPath::Inverse(p) => write!(f, "^({p})"),
            PropertyPath::NegatedSet(items) => {
                f.write_str("!(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_char('|')?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_char(')')
            }
            PropertyPath::Seq(a, b) => write!(f, "({a})/({b})"),
            PropertyPath::Alt(a, b) => write!(f, "({a})|({b})"),
            PropertyPath::Star(p) => write!(f, "({p})*"),
            PropertyPath::Plus(p) => write!(f, "({p})+"),
            PropertyPath::Opt(p) => write!(f, "({p})?"),
        }
    }
}

impl Display for Predicate {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Term(t) => write!(f, "{t}"),
            Predicate::Path(p) => write!(f, "{p}"),
        }
    }
}

impl Display for TriplePattern {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

fn comma_list(f: &mut Formatter<'_>, args: &[Expression]) -> fmt::Result {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

impl Display for Expression {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Var(v) => write!(f, "?{v}"),
            Expression::Constant(t) => write!(f, "{t}"),
            Expression::Or(a, b) => write!(f, "({a} || {b})"),
            Expression::And(a, b) => write!(f, "({a} && {b})"),
            Expression::Not(e) => write!(f, "(!{e})"),
            Expression::Compare(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expression::In {
                expr,
                list,
                negated,
            } => {
                let kw = if *negated { "NOT IN" } else { "IN" };
                write!(f, "({expr} {kw} (")?;
                comma_list(f, list)?;
                f.write_str("))")
            }
            Expression::Arith(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expression::UnaryMinus(e) => write!(f, "(-{e})"),
            Expression::UnaryPlus(e) => write!(f, "(+{e})"),
            Expression::BuiltIn { name, args } => {
                write!(f, "{name}(")?;
                comma_list(f, args)?;
                f.write_char(')')
            }
            Expression::Function {
                iri,
                args,
                distinct,
            } => {
                write!(f, "<{iri}>(")?;
                if *distinct {
                    f.write_str("DISTINCT ")?;
                }
                comma_list(f, args)?;
                f.write_char(')')
            }
            Expression::Aggregate {
                kind,
                distinct,
                arg,
                separator,
            } => {
                write!(f, "{}(", kind.keyword())?;
                if *distinct {
                    f.write_str("DISTINCT ")?;
                }
                match arg {
                    Some(a) => write!(f, "{a}")?,
                    None => f.write_char('*')?,
                }
                if let Some(s) = separator {
                    write!(f, " ; SEPARATOR={}", Term::simple_literal(s.clone()))?;
                }
                f.write_char(')')
            }
            Expression::Exists(p) => write!(f, "EXISTS {p}"),
            Expression::NotExists(p) => write!(f, "NOT EXISTS {p}"),
        }
    }
}

fn values_block(f: &mut Formatter<'_>, v: &ValuesBlock) -> fmt::Result {
    f.write_str("VALUES (")?;
    for var in &v.vars {
        write!(f, " ?{var}")?;
    }
    f.write_str(" ) {")?;
    for row in &v.rows {
        f.write_str(" (")?;
        for cell in row {
            match cell {
                Some(t) => write!(f, " {t}")?,
                None => f.write_str(" UNDEF")?,
            }
        }
        f.write_str(" )")?;
    }
    f.write_str(" }")
}

/// Renders as a group `{ ... }`.
impl Display for GraphPattern {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            GraphPattern::Empty => f.write_str("{ }"),
            GraphPattern::Triple(t) => write!(f, "{{ {t} }}"),
            GraphPattern::And(a, b) => write!(f, "{{ {a} {b} }}"),
            GraphPattern::Filter(p, c) => write!(f, "{{ {p} FILTER({}) }}", c.expr),
            GraphPattern::Union(a, b) => write!(f, "{{ {a} UNION {b} }}"),
            GraphPattern::Optional(a, b) => write!(f, "{{ {a} OPTIONAL {b} }}"),
            GraphPattern::Minus(a, b) => write!(f, "{{ {a} MINUS {b} }}"),
            GraphPattern::Graph(t, p) => write!(f, "{{ GRAPH {t} {p} }}"),
            GraphPattern::Service {
                target,
                silent,
                inner,
            } => {
                let s = if *silent { "SILENT " } else { "" };
                write!(f, "{{ SERVICE {s}{target} {inner} }}")
            }
            GraphPattern::Bind { expr, var, inner } => {
                write!(f, "{{ {inner} BIND({expr} AS ?{var}) }}")
            }
            GraphPattern::Values(v) => {
                f.write_str("{ ")?;
                values_block(f, v)?;
                f.write_str(" }")
            }
            GraphPattern::SubQuery(q) => {
                f.write_str("{ ")?;
                write_query_body(f, q)?;
                f.write_str(" }")
            }
        }
    }
}

impl Display for Query {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if let Some(b) = &self.prologue.base {
            writeln!(f, "BASE <{b}>")?;
        }
        for (p, ns) in &self.prologue.prefixes {
            writeln!(f, "PREFIX {p}: <{ns}>")?;
        }
        write_query_body(f, self)
    }
}

fn write_query_body(f: &mut Formatter<'_>, q: &Query) -> fmt::Result {
    match &q.form {
        QueryForm::Select {
            projection,
            distinct,
            reduced,
        } => {
            f.write_str("SELECT")?;
            if *distinct {
                f.write_str(" DISTINCT")?;
            }
            if *reduced {
                f.write_str(" REDUCED")?;
            }
            match projection {
                Projection::Star => f.write_str(" *")?,
                Projection::Items(items) => {
                    for item in items {
                        match item {
                            ProjectionItem::Var(v) => write!(f, " ?{v}")?,
                            ProjectionItem::Expr(e, v) => write!(f, " ({e} AS ?{v})")?,
                        }
                    }
                }
            }
        }
        QueryForm::Ask => f.write_str("ASK")?,
        QueryForm::Construct(template) => {
            f.write_str("CONSTRUCT {")?;
            for t in template {
                write!(f, " {t}")?;
            }
            f.write_str(" }")?;
        }
        QueryForm::Describe(targets) => {
            f.write_str("DESCRIBE")?;
            if targets.is_empty() {
                f.write_str(" *")?;
            }
            for t in targets {
                write!(f, " {t}")?;
            }
        }
    }
    for d in &q.dataset {
        let named = if d.named { " NAMED" } else { "" };
        write!(f, " FROM{named} <{}>", d.iri)?;
    }
    if let Some(p) = &q.pattern {
        write!(f, " WHERE {p}")?;
    }
    let m = &q.modifiers;
    if !m.group_by.is_empty() {
        f.write_str(" GROUP BY")?;
        for g in &m.group_by {
            match &g.alias {
                Some(a) => write!(f, " ({} AS ?{a})", g.expr)?,
                None => write!(f, " ({})", g.expr)?,
            }
        }
    }
    if !m.having.is_empty() {
        f.write_str(" HAVING")?;
        for h in &m.having {
            write!(f, " ({h})")?;
        }
    }
    if !m.order_by.is_empty() {
        f.write_str(" ORDER BY")?;
        for o in &m.order_by {
            let dir = if o.descending { "DESC" } else { "ASC" };
            write!(f, " {dir}({})", o.expr)?;
        }
    }
    if let Some(l) = m.limit {
        write!(f, " LIMIT {l}")?;
    }
    if let Some(o) = m.offset {
        write!(f, " OFFSET {o}")?;
    }
    if let Some(v) = &q.values {
        f.write_char(' ')?;
        values_block(f, v)?;
    }
    Ok(())
}
