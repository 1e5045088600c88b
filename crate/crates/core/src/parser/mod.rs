//! Recursive-descent parser for SPARQL 1.1 queries.
//!
//! Group graph patterns are translated on the fly into the binary
//! And/Filter/Optional/... tree of [`GraphPattern`]. Blank-node property
//! lists, collections and the `a` keyword are desugared into plain triple
//! patterns; anonymous blank nodes are labelled `b0`, `b1`, ... in document
//! order.

mod lexer;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ast::*;
use lexer::{Tok, Token};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(offset: usize, message: impl Into<String>) -> Self {
        ParseError {
            offset,
            message: message.into(),
        }
    }
}

type PResult<T> = Result<T, ParseError>;

const MAX_DEPTH: usize = 200;

/// Prefixes that public endpoints predeclare; used when a query relies on a
/// prefix it never declares.
const WELL_KNOWN_PREFIXES: &[(&str, &str)] = &[
    ("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
    ("rdfs", "http://www.w3.org/2000/01/rdf-schema#"),
    ("xsd", "http://www.w3.org/2001/XMLSchema#"),
    ("owl", "http://www.w3.org/2002/07/owl#"),
    ("foaf", "http://xmlns.com/foaf/0.1/"),
    ("dc", "http://purl.org/dc/elements/1.1/"),
    ("dcterms", "http://purl.org/dc/terms/"),
    ("skos", "http://www.w3.org/2004/02/skos/core#"),
    ("schema", "http://schema.org/"),
    ("geo", "http://www.w3.org/2003/01/geo/wgs84_pos#"),
    ("dbo", "http://dbpedia.org/ontology/"),
    ("dbr", "http://dbpedia.org/resource/"),
    ("dbp", "http://dbpedia.org/property/"),
    ("dbpedia", "http://dbpedia.org/resource/"),
    ("dbpedia-owl", "http://dbpedia.org/ontology/"),
    ("wd", "http://www.wikidata.org/entity/"),
    ("wdt", "http://www.wikidata.org/prop/direct/"),
    ("wikibase", "http://wikiba.se/ontology#"),
    ("p", "http://www.wikidata.org/prop/"),
    ("ps", "http://www.wikidata.org/prop/statement/"),
    ("pq", "http://www.wikidata.org/prop/qualifier/"),
    ("bd", "http://www.bigdata.com/rdf#"),
];

const BUILTINS: &[&str] = &[
    "STR", "LANG", "LANGMATCHES", "DATATYPE", "BOUND", "IRI", "URI", "BNODE", "RAND", "ABS",
    "CEIL", "FLOOR", "ROUND", "CONCAT", "STRLEN", "UCASE", "LCASE", "ENCODE_FOR_URI",
    "CONTAINS", "STRSTARTS", "STRENDS", "STRBEFORE", "STRAFTER", "YEAR", "MONTH", "DAY",
    "HOURS", "MINUTES", "SECONDS", "TIMEZONE", "TZ", "NOW", "UUID", "STRUUID", "MD5", "SHA1",
    "SHA256", "SHA384", "SHA512", "COALESCE", "IF", "STRLANG", "STRDT", "SAMETERM", "ISIRI",
    "ISURI", "ISBLANK", "ISLITERAL", "ISNUMERIC", "REGEX", "SUBSTR", "REPLACE",
];

const UPDATE_KEYWORDS: &[&str] = &[
    "INSERT", "DELETE", "LOAD", "CLEAR", "CREATE", "DROP", "COPY", "MOVE", "ADD", "WITH",
];

/// Parse a SPARQL query. The returned query keeps `text` as its `raw_text`.
pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    let tokens = lexer::tokenize(text)?;
    let mut p = Parser {
        text,
        tokens,
        pos: 0,
        prologue: Prologue::default(),
        bnode_counter: 0,
        depth: 0,
    };
    let q = p.query_unit()?;
    Ok(q)
}

struct Parser<'a> {
    text: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    prologue: Prologue,
    bnode_counter: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
    // ----- token helpers -------------------------------------------------

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].offset
    }

    fn advance(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(ParseError::new(self.offset(), msg))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> PResult<()> {
        if self.eat(t) {
            Ok(())
        } else {
            self.error(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }

    fn is_keyword_at(&self, n: usize, kw: &str) -> bool {
        matches!(self.peek_at(n), Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.error(format!("expected {kw}, found {}", describe(self.peek())))
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.error("nesting too deep");
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn fresh_bnode(&mut self) -> Term {
        let t = Term::BlankNode(format!("b{}", self.bnode_counter));
        self.bnode_counter += 1;
        t
    }

    // ----- query level ---------------------------------------------------

    fn query_unit(&mut self) -> PResult<Query> {
        self.prologue_decls()?;
        let q = if self.is_keyword("SELECT") {
            self.select_query(false)?
        } else if self.eat_keyword("CONSTRUCT") {
            self.construct_query()?
        } else if self.eat_keyword("DESCRIBE") {
            self.describe_query()?
        } else if self.eat_keyword("ASK") {
            let dataset = self.dataset_clauses()?;
            let pattern = self.where_clause()?;
            let modifiers = self.solution_modifiers()?;
            self.query(QueryForm::Ask, dataset, Some(pattern), modifiers)
        } else if UPDATE_KEYWORDS.iter().any(|k| self.is_keyword(k)) {
            return self.error("SPARQL Update is not supported");
        } else {
            return self.error(format!(
                "expected SELECT, CONSTRUCT, DESCRIBE or ASK, found {}",
                describe(self.peek())
            ));
        };
        let mut q = q;
        if self.eat_keyword("VALUES") {
            q.values = Some(self.data_block()?);
        }
        if *self.peek() != Tok::Eof {
            return self.error(format!("unexpected {} after query", describe(self.peek())));
        }
        q.raw_text = self.text.to_owned();
        Ok(q)
    }

    fn query(
        &self,
        form: QueryForm,
        dataset: Vec<DatasetClause>,
        pattern: Option<GraphPattern>,
        modifiers: SolutionModifiers,
    ) -> Query {
        Query {
            form,
            prologue: self.prologue.clone(),
            dataset,
            pattern,
            modifiers,
            values: None,
            raw_text: String::new(),
        }
    }

    fn prologue_decls(&mut self) -> PResult<()> {
        loop {
            if self.eat_keyword("BASE") {
                match self.advance() {
                    Tok::IriRef(iri) => {
                        let resolved = self.resolve(&iri);
                        self.prologue.base = Some(resolved);
                    }
                    _ => return self.error("expected IRI after BASE"),
                }
            } else if self.eat_keyword("PREFIX") {
                let prefix = match self.advance() {
                    Tok::PName(p, l) if l.is_empty() => p,
                    _ => return self.error("expected prefix declaration `name:`"),
                };
                match self.advance() {
                    Tok::IriRef(iri) => {
                        let resolved = self.resolve(&iri);
                        self.prologue.prefixes.insert(prefix, resolved);
                    }
                    _ => return self.error("expected IRI in PREFIX declaration"),
                }
            } else {
                return Ok(());
            }
        }
    }

    fn resolve(&self, iri: &str) -> String {
        let Some(base) = &self.prologue.base else {
            return iri.to_owned();
        };
        if has_scheme(iri) {
            return iri.to_owned();
        }
        match url::Url::parse(base).and_then(|b| b.join(iri)) {
            Ok(u) => u.to_string(),
            Err(_) => format!("{base}{iri}"),
        }
    }

    fn expand_pname(&self, prefix: &str, local: &str) -> String {
        if let Some(ns) = self.prologue.prefixes.get(prefix) {
            return format!("{ns}{local}");
        }
        if let Some((_, ns)) = WELL_KNOWN_PREFIXES.iter().find(|(p, _)| *p == prefix) {
            return format!("{ns}{local}");
        }
        format!("{prefix}:{local}")
    }

    fn select_query(&mut self, sub: bool) -> PResult<Query> {
        self.expect_keyword("SELECT")?;
        let mut distinct = false;
        let mut reduced = false;
        if self.eat_keyword("DISTINCT") {
            distinct = true;
        } else if self.eat_keyword("REDUCED") {
            reduced = true;
        }
        let projection = if self.eat(&Tok::Star) {
            Projection::Star
        } else {
            let mut items = Vec::new();
            loop {
                match self.peek().clone() {
                    Tok::Var(v) => {
                        self.advance();
                        items.push(ProjectionItem::Var(v));
                    }
                    Tok::LParen => {
                        self.advance();
                        let e = self.expression()?;
                        self.expect_keyword("AS")?;
                        let v = self.var()?;
                        self.expect(&Tok::RParen, "')'")?;
                        items.push(ProjectionItem::Expr(e, v));
                    }
                    _ => break,
                }
            }
            if items.is_empty() {
                return self.error("empty SELECT projection");
            }
            Projection::Items(items)
        };
        let dataset = if sub { Vec::new() } else { self.dataset_clauses()? };
        let pattern = self.where_clause()?;
        let modifiers = self.solution_modifiers()?;
        Ok(self.query(
            QueryForm::Select {
                projection,
                distinct,
                reduced,
            },
            dataset,
            Some(pattern),
            modifiers,
        ))
    }

    fn construct_query(&mut self) -> PResult<Query> {
        if *self.peek() == Tok::LBrace {
            self.advance();
            let template = self.triples_template()?;
            self.expect(&Tok::RBrace, "'}'")?;
            let dataset = self.dataset_clauses()?;
            let pattern = self.where_clause()?;
            let modifiers = self.solution_modifiers()?;
            Ok(self.query(QueryForm::Construct(template), dataset, Some(pattern), modifiers))
        } else {
            // CONSTRUCT WHERE { template }
            let dataset = self.dataset_clauses()?;
            self.expect_keyword("WHERE")?;
            self.expect(&Tok::LBrace, "'{'")?;
            let template = self.triples_template()?;
            self.expect(&Tok::RBrace, "'}'")?;
            let modifiers = self.solution_modifiers()?;
            let pattern = template
                .iter()
                .cloned()
                .map(GraphPattern::Triple)
                .fold(GraphPattern::Empty, join);
            Ok(self.query(QueryForm::Construct(template), dataset, Some(pattern), modifiers))
        }
    }

    fn triples_template(&mut self) -> PResult<Vec<TriplePattern>> {
        let mut out = Vec::new();
        while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
            if self.eat(&Tok::Dot) {
                continue;
            }
            let ts = self.triples_same_subject()?;
            if ts.iter().any(TriplePattern::is_path) {
                return self.error("property paths are not allowed in CONSTRUCT templates");
            }
            out.extend(ts);
        }
        Ok(out)
    }

    fn describe_query(&mut self) -> PResult<Query> {
        let mut targets = Vec::new();
        if !self.eat(&Tok::Star) {
            loop {
                match self.peek().clone() {
                    Tok::Var(v) => {
                        self.advance();
                        targets.push(Term::Var(v));
                    }
                    Tok::IriRef(_) | Tok::PName(..) => {
                        let iri = self.iri()?;
                        targets.push(Term::Iri(iri));
                    }
                    _ => break,
                }
            }
            if targets.is_empty() {
                return self.error("DESCRIBE needs at least one target or '*'");
            }
        }
        let dataset = self.dataset_clauses()?;
        let pattern = if self.is_keyword("WHERE") || *self.peek() == Tok::LBrace {
            Some(self.where_clause()?)
        } else {
            None
        };
        let modifiers = self.solution_modifiers()?;
        Ok(self.query(QueryForm::Describe(targets), dataset, pattern, modifiers))
    }

    fn dataset_clauses(&mut self) -> PResult<Vec<DatasetClause>> {
        let mut out = Vec::new();
        while self.eat_keyword("FROM") {
            let named = self.eat_keyword("NAMED");
            let iri = self.iri()?;
            out.push(DatasetClause { iri, named });
        }
        Ok(out)
    }

    fn where_clause(&mut self) -> PResult<GraphPattern> {
        self.eat_keyword("WHERE");
        self.group_graph_pattern()
    }

    fn solution_modifiers(&mut self) -> PResult<SolutionModifiers> {
        let mut m = SolutionModifiers::default();
        if self.is_keyword("GROUP") {
            self.advance();
            self.expect_keyword("BY")?;
            loop {
                match self.peek().clone() {
                    Tok::Var(v) => {
                        self.advance();
                        m.group_by.push(GroupCondition {
                            expr: Expression::Var(v),
                            alias: None,
                        });
                    }
                    Tok::LParen => {
                        self.advance();
                        let expr = self.expression()?;
                        let alias = if self.eat_keyword("AS") {
                            Some(self.var()?)
                        } else {
                            None
                        };
                        self.expect(&Tok::RParen, "')'")?;
                        m.group_by.push(GroupCondition { expr, alias });
                    }
                    _ if self.starts_call() => {
                        let expr = self.primary()?;
                        m.group_by.push(GroupCondition { expr, alias: None });
                    }
                    _ => break,
                }
            }
            if m.group_by.is_empty() {
                return self.error("empty GROUP BY");
            }
        }
        if self.eat_keyword("HAVING") {
            while matches!(self.peek(), Tok::LParen) || self.starts_call() {
                let e = self.constraint()?;
                m.having.push(e);
            }
            if m.having.is_empty() {
                return self.error("empty HAVING");
            }
        }
        if self.is_keyword("ORDER") {
            self.advance();
            self.expect_keyword("BY")?;
            loop {
                if self.is_keyword("ASC") || self.is_keyword("DESC") {
                    let descending = self.is_keyword("DESC");
                    self.advance();
                    self.expect(&Tok::LParen, "'('")?;
                    let expr = self.expression()?;
                    self.expect(&Tok::RParen, "')'")?;
                    m.order_by.push(OrderCondition { expr, descending });
                } else if let Tok::Var(v) = self.peek().clone() {
                    self.advance();
                    m.order_by.push(OrderCondition {
                        expr: Expression::Var(v),
                        descending: false,
                    });
                } else if matches!(self.peek(), Tok::LParen) || self.starts_call() {
                    let expr = self.constraint()?;
                    m.order_by.push(OrderCondition {
                        expr,
                        descending: false,
                    });
                } else {
                    break;
                }
            }
            if m.order_by.is_empty() {
                return self.error("empty ORDER BY");
            }
        }
        loop {
            if m.limit.is_none() && self.eat_keyword("LIMIT") {
                m.limit = Some(self.integer()?);
            } else if m.offset.is_none() && self.eat_keyword("OFFSET") {
                m.offset = Some(self.integer()?);
            } else {
                break;
            }
        }
        Ok(m)
    }

    fn integer(&mut self) -> PResult<u64> {
        match self.peek().clone() {
            Tok::Integer(s) => {
                let v = s
                    .parse::<u64>()
                    .map_err(|_| ParseError::new(self.offset(), "integer out of range"))?;
                self.advance();
                Ok(v)
            }
            _ => self.error("expected a non-negative integer"),
        }
    }

    fn var(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Var(v) => {
                self.advance();
                Ok(v)
            }
            t => self.error(format!("expected variable, found {}", describe(&t))),
        }
    }

    fn iri(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::IriRef(i) => {
                self.advance();
                Ok(self.resolve(&i))
            }
            Tok::PName(p, l) => {
                self.advance();
                Ok(self.expand_pname(&p, &l))
            }
            t => self.error(format!("expected IRI, found {}", describe(&t))),
        }
    }

    // ----- graph patterns ------------------------------------------------

    fn group_graph_pattern(&mut self) -> PResult<GraphPattern> {
        self.enter()?;
        let r = self.group_graph_pattern_inner();
        self.leave();
        r
    }

    fn group_graph_pattern_inner(&mut self) -> PResult<GraphPattern> {
        self.expect(&Tok::LBrace, "'{'")?;
        if self.is_keyword("SELECT") {
            let start = self.offset();
            let mut sub = self.select_query(true)?;
            if self.eat_keyword("VALUES") {
                sub.values = Some(self.data_block()?);
            }
            let end = self.offset();
            self.expect(&Tok::RBrace, "'}' after subquery")?;
            sub.raw_text = self.text[start..end].trim_end().to_owned();
            return Ok(GraphPattern::SubQuery(Box::new(sub)));
        }
        let mut acc = GraphPattern::Empty;
        let mut filters = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::RBrace => break,
                Tok::Eof => return self.error("unexpected end of input, expected '}'"),
                Tok::Dot => {
                    self.advance();
                }
                Tok::LBrace => {
                    let mut p = self.group_graph_pattern()?;
                    while self.eat_keyword("UNION") {
                        let rhs = self.group_graph_pattern()?;
                        p = GraphPattern::Union(Box::new(p), Box::new(rhs));
                    }
                    acc = join(acc, p);
                }
                Tok::Word(w) => {
                    let kw = w.to_ascii_uppercase();
                    match kw.as_str() {
                        "FILTER" => {
                            self.advance();
                            filters.push(self.constraint()?);
                        }
                        "OPTIONAL" => {
                            self.advance();
                            let p = self.group_graph_pattern()?;
                            acc = GraphPattern::Optional(Box::new(acc), Box::new(p));
                        }
                        "MINUS" => {
                            self.advance();
                            let p = self.group_graph_pattern()?;
                            acc = GraphPattern::Minus(Box::new(acc), Box::new(p));
                        }
                        "BIND" => {
                            self.advance();
                            self.expect(&Tok::LParen, "'('")?;
                            let expr = self.expression()?;
                            self.expect_keyword("AS")?;
                            let var = self.var()?;
                            self.expect(&Tok::RParen, "')'")?;
                            acc = GraphPattern::Bind {
                                expr,
                                var,
                                inner: Box::new(acc),
                            };
                        }
                        "VALUES" => {
                            self.advance();
                            let block = self.data_block()?;
                            acc = join(acc, GraphPattern::Values(block));
                        }
                        "GRAPH" => {
                            self.advance();
                            let target = self.var_or_iri()?;
                            let p = self.group_graph_pattern()?;
                            acc = join(acc, GraphPattern::Graph(target, Box::new(p)));
                        }
                        "SERVICE" => {
                            self.advance();
                            let silent = self.eat_keyword("SILENT");
                            let target = self.var_or_iri()?;
                            let p = self.group_graph_pattern()?;
                            acc = join(
                                acc,
                                GraphPattern::Service {
                                    target,
                                    silent,
                                    inner: Box::new(p),
                                },
                            );
                        }
                        _ => {
                            for t in self.triples_same_subject()? {
                                acc = join(acc, GraphPattern::Triple(t));
                            }
                        }
                    }
                }
                _ => {
                    for t in self.triples_same_subject()? {
                        acc = join(acc, GraphPattern::Triple(t));
                    }
                }
            }
        }
        self.expect(&Tok::RBrace, "'}'")?;
        for f in filters {
            acc = GraphPattern::Filter(Box::new(acc), FilterConstraint::new(f));
        }
        Ok(acc)
    }

    fn var_or_iri(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Var(v) => {
                self.advance();
                Ok(Term::Var(v))
            }
            _ => Ok(Term::Iri(self.iri()?)),
        }
    }

    fn data_block(&mut self) -> PResult<ValuesBlock> {
        let mut vars = Vec::new();
        let single = match self.peek().clone() {
            Tok::Var(v) => {
                self.advance();
                vars.push(v);
                true
            }
            Tok::LParen => {
                self.advance();
                while let Tok::Var(v) = self.peek().clone() {
                    self.advance();
                    vars.push(v);
                }
                self.expect(&Tok::RParen, "')'")?;
                false
            }
            _ => return self.error("expected variable list after VALUES"),
        };
        self.expect(&Tok::LBrace, "'{'")?;
        let mut rows = Vec::new();
        if single {
            while *self.peek() != Tok::RBrace {
                rows.push(vec![self.data_value()?]);
            }
        } else {
            while *self.peek() != Tok::RBrace {
                self.expect(&Tok::LParen, "'('")?;
                let mut row = Vec::new();
                while *self.peek() != Tok::RParen {
                    row.push(self.data_value()?);
                }
                self.advance();
                if row.len() != vars.len() {
                    return self.error("VALUES row length does not match variable list");
                }
                rows.push(row);
            }
        }
        self.advance();
        Ok(ValuesBlock { vars, rows })
    }

    fn data_value(&mut self) -> PResult<Option<Term>> {
        if self.eat_keyword("UNDEF") {
            return Ok(None);
        }
        match self.peek() {
            Tok::IriRef(_) | Tok::PName(..) => Ok(Some(Term::Iri(self.iri()?))),
            Tok::Eof => self.error("unexpected end of input in VALUES"),
            _ => Ok(Some(self.literal_term()?)),
        }
    }

    // ----- triples -------------------------------------------------------

    fn triples_same_subject(&mut self) -> PResult<Vec<TriplePattern>> {
        self.enter()?;
        let r = self.triples_same_subject_inner();
        self.leave();
        r
    }

    fn triples_same_subject_inner(&mut self) -> PResult<Vec<TriplePattern>> {
        let mut out = Vec::new();
        match self.peek() {
            Tok::LBracket if *self.peek_at(1) != Tok::RBracket => {
                let (subject, inner) = self.graph_node()?;
                out.extend(inner);
                if self.starts_verb() {
                    self.property_list(&subject, &mut out)?;
                }
            }
            Tok::LParen if *self.peek_at(1) != Tok::RParen => {
                let (subject, inner) = self.graph_node()?;
                out.extend(inner);
                if self.starts_verb() {
                    self.property_list(&subject, &mut out)?;
                }
            }
            _ => {
                let (subject, inner) = self.graph_node()?;
                out.extend(inner);
                if matches!(subject, Term::Literal { .. }) {
                    return self.error("literal in subject position");
                }
                if !self.starts_verb() {
                    return self.error(format!(
                        "expected predicate, found {}",
                        describe(self.peek())
                    ));
                }
                self.property_list(&subject, &mut out)?;
            }
        }
        Ok(out)
    }

    fn starts_verb(&self) -> bool {
        match self.peek() {
            Tok::Var(_) | Tok::IriRef(_) | Tok::PName(..) | Tok::Caret | Tok::Bang | Tok::LParen => {
                true
            }
            Tok::Word(w) => w == "a",
            _ => false,
        }
    }

    fn property_list(&mut self, subject: &Term, out: &mut Vec<TriplePattern>) -> PResult<()> {
        loop {
            let predicate = self.verb()?;
            loop {
                let (object, inner) = self.graph_node()?;
                out.push(TriplePattern::new(subject.clone(), predicate.clone(), object));
                out.extend(inner);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            if *self.peek() == Tok::Semi {
                while self.eat(&Tok::Semi) {}
                if self.starts_verb() {
                    continue;
                }
            }
            return Ok(());
        }
    }

    fn verb(&mut self) -> PResult<Predicate> {
        if let Tok::Var(v) = self.peek().clone() {
            self.advance();
            return Ok(Predicate::Term(Term::Var(v)));
        }
        let path = self.path()?;
        Ok(match path {
            PropertyPath::Link(iri) => Predicate::Term(Term::Iri(iri)),
            p => Predicate::Path(p),
        })
    }

    /// Subject/object node. Returns the node and any triples generated by
    /// blank-node property lists or collections.
    fn graph_node(&mut self) -> PResult<(Term, Vec<TriplePattern>)> {
        match self.peek().clone() {
            Tok::LBracket => {
                self.advance();
                let node = self.fresh_bnode();
                let mut triples = Vec::new();
                if !self.eat(&Tok::RBracket) {
                    self.enter()?;
                    self.property_list(&node, &mut triples)?;
                    self.leave();
                    self.expect(&Tok::RBracket, "']'")?;
                }
                Ok((node, triples))
            }
            Tok::LParen => {
                self.advance();
                if self.eat(&Tok::RParen) {
                    return Ok((Term::Iri(RDF_NIL.to_owned()), Vec::new()));
                }
                self.enter()?;
                let mut items = Vec::new();
                let mut triples = Vec::new();
                while *self.peek() != Tok::RParen {
                    if *self.peek() == Tok::Eof {
                        return self.error("unterminated collection");
                    }
                    let (item, inner) = self.graph_node()?;
                    items.push(item);
                    triples.extend(inner);
                }
                self.advance();
                self.leave();
                let cells: Vec<Term> = items.iter().map(|_| self.fresh_bnode()).collect();
                let mut list_triples = Vec::new();
                for (i, item) in items.into_iter().enumerate() {
                    let rest = cells
                        .get(i + 1)
                        .cloned()
                        .unwrap_or_else(|| Term::Iri(RDF_NIL.to_owned()));
                    list_triples.push(TriplePattern::new(
                        cells[i].clone(),
                        Predicate::Term(Term::Iri(RDF_FIRST.to_owned())),
                        item,
                    ));
                    list_triples.push(TriplePattern::new(
                        cells[i].clone(),
                        Predicate::Term(Term::Iri(RDF_REST.to_owned())),
                        rest,
                    ));
                }
                list_triples.extend(triples);
                Ok((cells[0].clone(), list_triples))
            }
            Tok::Var(v) => {
                self.advance();
                Ok((Term::Var(v), Vec::new()))
            }
            Tok::IriRef(_) | Tok::PName(..) => Ok((Term::Iri(self.iri()?), Vec::new())),
            Tok::BlankLabel(l) => {
                self.advance();
                Ok((Term::BlankNode(l), Vec::new()))
            }
            _ => Ok((self.literal_term()?, Vec::new())),
        }
    }

    /// String, numeric or boolean literal (numeric literals may carry a sign).
    fn literal_term(&mut self) -> PResult<Term> {
        let negative = match self.peek() {
            Tok::Minus => {
                self.advance();
                Some(true)
            }
            Tok::Plus => {
                self.advance();
                Some(false)
            }
            _ => None,
        };
        let tok = self.peek().clone();
        let numeric = |lex: &str, dt: &str| {
            let lexical = match negative {
                Some(true) => format!("-{lex}"),
                Some(false) => format!("+{lex}"),
                None => lex.to_owned(),
            };
            Term::Literal {
                lexical,
                datatype: Some(dt.to_owned()),
                lang: None,
            }
        };
        let term = match tok {
            Tok::Integer(s) => {
                self.advance();
                numeric(&s, XSD_INTEGER)
            }
            Tok::Decimal(s) => {
                self.advance();
                numeric(&s, XSD_DECIMAL)
            }
            Tok::Double(s) => {
                self.advance();
                numeric(&s, XSD_DOUBLE)
            }
            _ if negative.is_some() => return self.error("expected number after sign"),
            Tok::Str(s) => {
                self.advance();
                self.rdf_literal_tail(s)?
            }
            Tok::Word(w) if w.eq_ignore_ascii_case("true") || w.eq_ignore_ascii_case("false") => {
                self.advance();
                Term::Literal {
                    lexical: w.to_ascii_lowercase(),
                    datatype: Some(XSD_BOOLEAN.to_owned()),
                    lang: None,
                }
            }
            Tok::Eof => return self.error("unexpected end of input"),
            t => return self.error(format!("expected RDF term, found {}", describe(&t))),
        };
        Ok(term)
    }

    fn rdf_literal_tail(&mut self, lexical: String) -> PResult<Term> {
        match self.peek().clone() {
            Tok::LangTag(l) => {
                self.advance();
                Ok(Term::Literal {
                    lexical,
                    datatype: None,
                    lang: Some(l),
                })
            }
            Tok::DoubleCaret => {
                self.advance();
                let dt = self.iri()?;
                Ok(Term::Literal {
                    lexical,
                    datatype: Some(dt),
                    lang: None,
                })
            }
            _ => Ok(Term::Literal {
                lexical,
                datatype: None,
                lang: None,
            }),
        }
    }

    // ----- property paths ------------------------------------------------

    fn path(&mut self) -> PResult<PropertyPath> {
        self.enter()?;
        let mut p = self.path_seq()?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.path_seq()?;
            p = PropertyPath::Alt(Box::new(p), Box::new(rhs));
        }
        self.leave();
        Ok(p)
    }

    fn path_seq(&mut self) -> PResult<PropertyPath> {
        let mut p = self.path_elt_or_inverse()?;
        while self.eat(&Tok::Slash) {
            let rhs = self.path_elt_or_inverse()?;
            p = PropertyPath::Seq(Box::new(p), Box::new(rhs));
        }
        Ok(p)
    }

    fn path_elt_or_inverse(&mut self) -> PResult<PropertyPath> {
        if self.eat(&Tok::Caret) {
            let e = self.path_elt()?;
            Ok(PropertyPath::Inverse(Box::new(e)))
        } else {
            self.path_elt()
        }
    }

    fn path_elt(&mut self) -> PResult<PropertyPath> {
        let prim = self.path_primary()?;
        Ok(match self.peek() {
            Tok::Question => {
                self.advance();
                PropertyPath::Opt(Box::new(prim))
            }
            Tok::Star => {
                self.advance();
                PropertyPath::Star(Box::new(prim))
            }
            Tok::Plus => {
                self.advance();
                PropertyPath::Plus(Box::new(prim))
            }
            _ => prim,
        })
    }

    fn path_primary(&mut self) -> PResult<PropertyPath> {
        match self.peek().clone() {
            Tok::IriRef(_) | Tok::PName(..) => Ok(PropertyPath::Link(self.iri()?)),
            Tok::Word(w) if w == "a" => {
                self.advance();
                Ok(PropertyPath::Link(RDF_TYPE.to_owned()))
            }
            Tok::Bang => {
                self.advance();
                let mut items = Vec::new();
                if self.eat(&Tok::LParen) {
                    if *self.peek() != Tok::RParen {
                        items.push(self.path_one_in_set()?);
                        while self.eat(&Tok::Pipe) {
                            items.push(self.path_one_in_set()?);
                        }
                    }
                    self.expect(&Tok::RParen, "')'")?;
                } else {
                    items.push(self.path_one_in_set()?);
                }
                if items.is_empty() {
                    return self.error("empty negated property set");
                }
                Ok(PropertyPath::NegatedSet(items))
            }
            Tok::LParen => {
                self.advance();
                let p = self.path()?;
                self.expect(&Tok::RParen, "')'")?;
                Ok(p)
            }
            t => self.error(format!("expected property path, found {}", describe(&t))),
        }
    }

    fn path_one_in_set(&mut self) -> PResult<NegatedItem> {
        let inverse = self.eat(&Tok::Caret);
        let iri = match self.peek().clone() {
            Tok::Word(w) if w == "a" => {
                self.advance();
                RDF_TYPE.to_owned()
            }
            _ => self.iri()?,
        };
        Ok(NegatedItem { iri, inverse })
    }

    // ----- expressions ---------------------------------------------------

    fn starts_call(&self) -> bool {
        match self.peek() {
            Tok::IriRef(_) | Tok::PName(..) => *self.peek_at(1) == Tok::LParen,
            Tok::Word(w) => {
                let up = w.to_ascii_uppercase();
                BUILTINS.contains(&up.as_str())
                    || aggregate_kind(&up).is_some()
                    || up == "EXISTS"
                    || (up == "NOT" && self.is_keyword_at(1, "EXISTS"))
            }
            _ => false,
        }
    }

    /// FILTER / HAVING constraint: bracketed expression, built-in or function call.
    fn constraint(&mut self) -> PResult<Expression> {
        if self.eat(&Tok::LParen) {
            let e = self.expression()?;
            self.expect(&Tok::RParen, "')'")?;
            Ok(e)
        } else if self.starts_call() {
            self.primary()
        } else {
            self.error(format!("expected constraint, found {}", describe(self.peek())))
        }
    }

    fn expression(&mut self) -> PResult<Expression> {
        self.enter()?;
        let r = self.or_expr();
        self.leave();
        r
    }

    fn or_expr(&mut self) -> PResult<Expression> {
        let mut e = self.and_expr()?;
        while self.eat(&Tok::OrOr) {
            let rhs = self.and_expr()?;
            e = Expression::Or(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> PResult<Expression> {
        let mut e = self.relational()?;
        while self.eat(&Tok::AndAnd) {
            let rhs = self.relational()?;
            e = Expression::And(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn relational(&mut self) -> PResult<Expression> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Tok::Eq => Some(CompareOp::Eq),
            Tok::Ne => Some(CompareOp::Ne),
            Tok::Lt => Some(CompareOp::Lt),
            Tok::Le => Some(CompareOp::Le),
            Tok::Gt => Some(CompareOp::Gt),
            Tok::Ge => Some(CompareOp::Ge),
            _ => None,
        };
        if let Some(op) = op {
            self.advance();
            let rhs = self.additive()?;
            return Ok(Expression::Compare(op, Box::new(lhs), Box::new(rhs)));
        }
        if self.is_keyword("IN") || (self.is_keyword("NOT") && self.is_keyword_at(1, "IN")) {
            let negated = self.eat_keyword("NOT");
            self.advance();
            let list = self.expression_list()?;
            return Ok(Expression::In {
                expr: Box::new(lhs),
                list,
                negated,
            });
        }
        Ok(lhs)
    }

    fn expression_list(&mut self) -> PResult<Vec<Expression>> {
        self.expect(&Tok::LParen, "'('")?;
        let mut list = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(list);
        }
        loop {
            list.push(self.expression()?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(&Tok::RParen, "')'")?;
        Ok(list)
    }

    fn additive(&mut self) -> PResult<Expression> {
        let mut e = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(e),
            };
            self.advance();
            let rhs = self.multiplicative()?;
            e = Expression::Arith(op, Box::new(e), Box::new(rhs));
        }
    }

    fn multiplicative(&mut self) -> PResult<Expression> {
        let mut e = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => ArithOp::Mul,
                Tok::Slash => ArithOp::Div,
                _ => return Ok(e),
            };
            self.advance();
            let rhs = self.unary()?;
            e = Expression::Arith(op, Box::new(e), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> PResult<Expression> {
        match self.peek() {
            Tok::Bang => {
                self.advance();
                self.enter()?;
                let e = self.unary()?;
                self.leave();
                Ok(Expression::Not(Box::new(e)))
            }
            Tok::Minus => {
                self.advance();
                self.enter()?;
                let e = self.unary()?;
                self.leave();
                Ok(Expression::UnaryMinus(Box::new(e)))
            }
            Tok::Plus => {
                self.advance();
                self.enter()?;
                let e = self.unary()?;
                self.leave();
                Ok(Expression::UnaryPlus(Box::new(e)))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> PResult<Expression> {
        match self.peek().clone() {
            Tok::LParen => {
                self.advance();
                let e = self.expression()?;
                self.expect(&Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Var(v) => {
                self.advance();
                Ok(Expression::Var(v))
            }
            Tok::IriRef(_) | Tok::PName(..) => {
                let iri = self.iri()?;
                if *self.peek() == Tok::LParen {
                    self.advance();
                    let distinct = self.eat_keyword("DISTINCT");
                    let mut args = Vec::new();
                    if !self.eat(&Tok::RParen) {
                        loop {
                            args.push(self.expression()?);
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                        self.expect(&Tok::RParen, "')'")?;
                    }
                    Ok(Expression::Function {
                        iri,
                        args,
                        distinct,
                    })
                } else {
                    Ok(Expression::Constant(Term::Iri(iri)))
                }
            }
            Tok::Word(w) => {
                let up = w.to_ascii_uppercase();
                if up == "TRUE" || up == "FALSE" {
                    return Ok(Expression::Constant(self.literal_term()?));
                }
                if up == "EXISTS" {
                    self.advance();
                    let p = self.group_graph_pattern()?;
                    return Ok(Expression::Exists(Box::new(p)));
                }
                if up == "NOT" && self.is_keyword_at(1, "EXISTS") {
                    self.advance();
                    self.advance();
                    let p = self.group_graph_pattern()?;
                    return Ok(Expression::NotExists(Box::new(p)));
                }
                if let Some(kind) = aggregate_kind(&up) {
                    self.advance();
                    return self.aggregate(kind);
                }
                if BUILTINS.contains(&up.as_str()) {
                    self.advance();
                    let args = self.expression_list()?;
                    return Ok(Expression::BuiltIn { name: up, args });
                }
                self.error(format!("unknown function or keyword `{w}`"))
            }
            Tok::Str(_) | Tok::Integer(_) | Tok::Decimal(_) | Tok::Double(_) => {
                Ok(Expression::Constant(self.literal_term()?))
            }
            Tok::Eof => self.error("unexpected end of input in expression"),
            t => self.error(format!("unexpected {} in expression", describe(&t))),
        }
    }

    fn aggregate(&mut self, kind: AggregateKind) -> PResult<Expression> {
        self.expect(&Tok::LParen, "'('")?;
        let distinct = self.eat_keyword("DISTINCT");
        let arg = if kind == AggregateKind::Count && self.eat(&Tok::Star) {
            None
        } else {
            Some(Box::new(self.expression()?))
        };
        let mut separator = None;
        if kind == AggregateKind::GroupConcat && self.eat(&Tok::Semi) {
            self.expect_keyword("SEPARATOR")?;
            self.expect(&Tok::Eq, "'='")?;
            match self.advance() {
                Tok::Str(s) => separator = Some(s),
                _ => return self.error("expected separator string"),
            }
        }
        self.expect(&Tok::RParen, "')'")?;
        Ok(Expression::Aggregate {
            kind,
            distinct,
            arg,
            separator,
        })
    }
}

fn aggregate_kind(up: &str) -> Option<AggregateKind> {
    Some(match up {
        "COUNT" => AggregateKind::Count,
        "SUM" => AggregateKind::Sum,
        "MIN" => AggregateKind::Min,
        "MAX" => AggregateKind::Max,
        "AVG" => AggregateKind::Avg,
        "SAMPLE" => AggregateKind::Sample,
        "GROUP_CONCAT" => AggregateKind::GroupConcat,
        _ => return None,
    })
}

/// Conjunction that absorbs the empty pattern on the left.
fn join(acc: GraphPattern, p: GraphPattern) -> GraphPattern {
    match acc {
        GraphPattern::Empty => p,
        acc => GraphPattern::And(Box::new(acc), Box::new(p)),
    }
}

fn has_scheme(iri: &str) -> bool {
    let mut chars = iri.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    for c in chars {
        if c == ':' {
            return true;
        }
        if !(c.is_ascii_alphanumeric() || c == '+' || c == '-' || c == '.') {
            return false;
        }
    }
    false
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Eof => "end of input".to_owned(),
        Tok::Word(w) => format!("`{w}`"),
        Tok::Var(v) => format!("`?{v}`"),
        Tok::IriRef(i) => format!("`<{i}>`"),
        Tok::PName(p, l) => format!("`{p}:{l}`"),
        other => format!("{other:?}"),
    }
}

/// Well-known prefix table used for undeclared prefixes.
pub fn well_known_prefixes() -> BTreeMap<&'static str, &'static str> {
    WELL_KNOWN_PREFIXES.iter().copied().collect()
}
