//! Text formats: parsing with line/column diagnostics and canonical
//! serialization.
//!
//! ```text
//! rel R/2; rel S/1;                              % schema
//! R(a, b). S(a).                                 % database
//! q(x, y) :- R(x, z), S(z), x = y.               % query (one rule per disjunct)
//! R(x, y) -> exists z. T(x, z), T(z, y).         % dependency
//! ```
//!
//! Bundles (`.omq`, `.cqs`) hold `[schema]`, `[tgds]` and `[query]` sections.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DocKind {
    Schema,
    Database,
    Query,
    Tgds,
    Omq,
    Cqs,
}

impl DocKind {
    /// Guesses the kind from a file extension.
    pub fn from_extension(ext: &str) -> Option<DocKind> {
        Some(match ext {
            "schema" => DocKind::Schema,
            "db" => DocKind::Database,
            "cq" | "ucq" => DocKind::Query,
            "tgd" | "tgds" => DocKind::Tgds,
            "omq" => DocKind::Omq,
            "cqs" => DocKind::Cqs,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceDocument {
    pub kind: DocKind,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Semi,
    Slash,
    Pipe,
    Eq,
    If,
    Arrow,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '#' || c == '\''
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut adv = 1;
        let tok = match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => None,
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            ';' => Some(Tok::Semi),
            '/' => Some(Tok::Slash),
            '|' => Some(Tok::Pipe),
            '=' => Some(Tok::Eq),
            ':' if chars.get(i + 1) == Some(&'-') => {
                adv = 2;
                Some(Tok::If)
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                adv = 2;
                Some(Tok::Arrow)
            }
            c if is_ident_char(c) => {
                let start = i;
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                adv = j - start;
                Some(Tok::Ident(chars[start..j].iter().collect()))
            }
            other => {
                return Err(Error::Parse {
                    line: l0,
                    column: c0,
                    message: format!("unexpected character {other:?}"),
                })
            }
        };
        if let Some(tok) = tok {
            out.push(Token {
                tok,
                line: l0,
                col: c0,
            });
        }
        i += adv;
        col += adv;
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type Positioned<T> = (T, usize, usize);

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        let (line, column) = self.here();
        Err(Error::Parse {
            line,
            column,
            message: message.into(),
        })
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.next();
            Ok(())
        } else {
            self.err(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            t => self.err(format!("expected {what}, found {}", describe(&t))),
        }
    }

    fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    fn at_section(&self) -> bool {
        *self.peek() == Tok::LBracket
    }

    /// `R(t1, ..., tn)` with terms read by `term`.
    fn atom<T>(
        &mut self,
        mut term: impl FnMut(&mut Parser) -> Result<T>,
    ) -> Result<Positioned<(String, Vec<T>)>> {
        let (line, col) = self.here();
        let rel = self.ident("relation name")?;
        self.expect(Tok::LParen, "'('")?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(term(self)?);
                if *self.peek() == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "')'")?;
        Ok(((rel, args), line, col))
    }

    fn constant(&mut self) -> Result<String> {
        if *self.peek() == Tok::LParen {
            self.next();
            let l = self.constant()?;
            self.expect(Tok::Pipe, "'|'")?;
            let r = self.constant()?;
            self.expect(Tok::RParen, "')'")?;
            Ok(format!("({l}|{r})"))
        } else {
            self.ident("constant")
        }
    }

    fn variable(&mut self) -> Result<String> {
        self.ident("variable")
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::LBracket => "'['".into(),
        Tok::RBracket => "']'".into(),
        Tok::Comma => "','".into(),
        Tok::Dot => "'.'".into(),
        Tok::Semi => "';'".into(),
        Tok::Slash => "'/'".into(),
        Tok::Pipe => "'|'".into(),
        Tok::Eq => "'='".into(),
        Tok::If => "':-'".into(),
        Tok::Arrow => "'->'".into(),
        Tok::Eof => "end of input".into(),
    }
}

fn at(line: usize, column: usize, e: Error) -> Error {
    match e {
        Error::Parse { .. } => e,
        other => Error::Parse {
            line,
            column,
            message: other.to_string(),
        },
    }
}

/// Tracks relation arities while parsing: either a fixed schema (unknown
/// relations rejected) or one grown from usage.
struct SchemaCtx {
    schema: Schema,
    fixed: bool,
}

impl SchemaCtx {
    fn new(schema: Option<&Schema>) -> Self {
        match schema {
            Some(s) => SchemaCtx {
                schema: s.clone(),
                fixed: true,
            },
            None => SchemaCtx {
                schema: Schema::new(),
                fixed: false,
            },
        }
    }

    fn open(base: &Schema) -> Self {
        SchemaCtx {
            schema: base.clone(),
            fixed: false,
        }
    }

    fn check(&mut self, rel: &str, arity: usize, line: usize, col: usize) -> Result<()> {
        let name = RelName::new(rel);
        match self.schema.arity(&name) {
            Some(a) if a != arity => Err(at(
                line,
                col,
                Error::ArityMismatch {
                    relation: rel.into(),
                    expected: a,
                    found: arity,
                },
            )),
            Some(_) => Ok(()),
            None if self.fixed => Err(at(line, col, Error::UnknownRelation(rel.into()))),
            None => {
                self.schema.declare(name, arity).map_err(|e| at(line, col, e))
            }
        }
    }
}

fn parse_schema_items(p: &mut Parser) -> Result<Schema> {
    let mut s = Schema::new();
    while !p.at_eof() && !p.at_section() {
        let (line, col) = p.here();
        match p.ident("'rel'")?.as_str() {
            "rel" => {}
            other => {
                return Err(Error::Parse {
                    line,
                    column: col,
                    message: format!("expected 'rel', found '{other}'"),
                })
            }
        }
        let (line, col) = p.here();
        let name = p.ident("relation name")?;
        p.expect(Tok::Slash, "'/'")?;
        let (nl, nc) = p.here();
        let n = p.ident("arity")?;
        let arity: usize = n.parse().map_err(|_| Error::Parse {
            line: nl,
            column: nc,
            message: format!("invalid arity '{n}'"),
        })?;
        s.declare(RelName::from(name), arity)
            .map_err(|e| at(line, col, e))?;
        p.expect(Tok::Semi, "';'")?;
    }
    Ok(s)
}

fn parse_facts(p: &mut Parser, ctx: &mut SchemaCtx) -> Result<Vec<Fact>> {
    let mut facts = Vec::new();
    while !p.at_eof() && !p.at_section() {
        let ((rel, args), line, col) = p.atom(|p| p.constant())?;
        ctx.check(&rel, args.len(), line, col)?;
        p.expect(Tok::Dot, "'.'")?;
        facts.push(Fact::new(
            RelName::from(rel),
            args.into_iter().map(Const::from).collect(),
        ));
    }
    Ok(facts)
}

/// A body item in a rule: relational atom, equality or `true`.
enum BodyItem {
    Atom(RelAtom),
    Eq(Var, Var),
}

fn parse_body(p: &mut Parser, ctx: &mut SchemaCtx, stop: &Tok) -> Result<Vec<BodyItem>> {
    let mut items = Vec::new();
    if matches!(p.peek(), Tok::Ident(s) if s == "true") && p.peek_at(1) == stop {
        p.next();
        return Ok(items);
    }
    loop {
        if matches!(p.peek_at(1), Tok::Eq) {
            let a = p.variable()?;
            p.next();
            let b = p.variable()?;
            items.push(BodyItem::Eq(Var::from(a), Var::from(b)));
        } else {
            let ((rel, args), line, col) = p.atom(|p| p.variable())?;
            ctx.check(&rel, args.len(), line, col)?;
            items.push(BodyItem::Atom(RelAtom::new(
                RelName::from(rel),
                args.into_iter().map(Var::from).collect(),
            )));
        }
        if *p.peek() == Tok::Comma {
            p.next();
        } else {
            break;
        }
    }
    Ok(items)
}

struct RawRule {
    head: String,
    answer: Vec<Var>,
    atoms: Vec<RelAtom>,
    eqs: Vec<(Var, Var)>,
    line: usize,
    col: usize,
}

fn parse_rules(p: &mut Parser, ctx: &mut SchemaCtx) -> Result<Vec<RawRule>> {
    let mut rules = Vec::new();
    while !p.at_eof() && !p.at_section() {
        let ((head, answer), line, col) = p.atom(|p| p.variable())?;
        p.expect(Tok::If, "':-'")?;
        let body = parse_body(p, ctx, &Tok::Dot)?;
        p.expect(Tok::Dot, "'.'")?;
        let mut atoms = Vec::new();
        let mut eqs = Vec::new();
        for b in body {
            match b {
                BodyItem::Atom(a) => atoms.push(a),
                BodyItem::Eq(a, b) => eqs.push((a, b)),
            }
        }
        rules.push(RawRule {
            head,
            answer: answer.into_iter().map(Var::from).collect(),
            atoms,
            eqs,
            line,
            col,
        });
    }
    Ok(rules)
}

fn build_query(rules: Vec<RawRule>, schema: &Schema, end: (usize, usize)) -> Result<UnionQuery> {
    let Some(first) = rules.first() else {
        return Err(Error::Parse {
            line: end.0,
            column: end.1,
            message: "expected at least one query rule".into(),
        });
    };
    let (name, answer) = (first.head.clone(), first.answer.clone());
    let mut ds = Vec::new();
    for r in rules {
        if r.head != name || r.answer != answer {
            return Err(Error::Parse {
                line: r.line,
                column: r.col,
                message: "all rules of a union must share the head".into(),
            });
        }
        let q = ConjunctiveQuery::new(schema.clone(), r.answer, r.atoms, r.eqs)
            .map_err(|e| at(r.line, r.col, e))?;
        ds.push(q);
    }
    UnionQuery::new(ds).map_err(|e| at(end.0, end.1, e))
}

fn parse_tgd_items(p: &mut Parser, ctx: &mut SchemaCtx) -> Result<Vec<Tgd>> {
    let mut tgds = Vec::new();
    while !p.at_eof() && !p.at_section() {
        let (line, col) = p.here();
        let body = parse_body(p, ctx, &Tok::Arrow)?;
        p.expect(Tok::Arrow, "'->'")?;
        let mut exist = Vec::new();
        if matches!(p.peek(), Tok::Ident(s) if s == "exists") && !matches!(p.peek_at(1), Tok::LParen) {
            p.next();
            loop {
                exist.push(Var::from(p.variable()?));
                if *p.peek() == Tok::Comma {
                    p.next();
                } else {
                    break;
                }
            }
            p.expect(Tok::Dot, "'.'")?;
        }
        let (hl, hc) = p.here();
        let head = parse_body(p, ctx, &Tok::Dot)?;
        p.expect(Tok::Dot, "'.'")?;
        let mut b = Vec::new();
        for item in body {
            match item {
                BodyItem::Atom(a) => b.push(a),
                BodyItem::Eq(..) => {
                    return Err(Error::Parse {
                        line,
                        column: col,
                        message: "equality atoms are not allowed in dependencies".into(),
                    })
                }
            }
        }
        let mut h = Vec::new();
        for item in head {
            match item {
                BodyItem::Atom(a) => h.push(a),
                BodyItem::Eq(..) => {
                    return Err(Error::Parse {
                        line: hl,
                        column: hc,
                        message: "equality atoms are not allowed in dependencies".into(),
                    })
                }
            }
        }
        tgds.push(Tgd::new(b, h, exist).map_err(|e| at(line, col, e))?);
    }
    Ok(tgds)
}

fn finish(p: &Parser) -> Result<()> {
    if p.at_eof() {
        Ok(())
    } else {
        p.err(format!("unexpected {}", describe(p.peek())))
    }
}

pub fn parse_schema(text: &str) -> Result<Schema> {
    let mut p = Parser::new(text)?;
    let s = parse_schema_items(&mut p)?;
    finish(&p)?;
    Ok(s)
}

/// Parses facts; with `schema` given, relations must be declared there.
pub fn parse_database(text: &str, schema: Option<&Schema>) -> Result<Database> {
    let mut p = Parser::new(text)?;
    let mut ctx = SchemaCtx::new(schema);
    let facts = parse_facts(&mut p, &mut ctx)?;
    finish(&p)?;
    Database::from_facts(ctx.schema, facts)
}

pub fn parse_query(text: &str, schema: Option<&Schema>) -> Result<UnionQuery> {
    let mut p = Parser::new(text)?;
    let mut ctx = SchemaCtx::new(schema);
    let rules = parse_rules(&mut p, &mut ctx)?;
    finish(&p)?;
    let end = p.here();
    build_query(rules, &ctx.schema, end)
}

/// Parses a query that must have exactly one rule.
pub fn parse_cq(text: &str, schema: Option<&Schema>) -> Result<ConjunctiveQuery> {
    let u = parse_query(text, schema)?;
    if u.disjuncts().len() != 1 {
        return Err(Error::Invalid(format!(
            "expected a single conjunctive query, found {} rules",
            u.disjuncts().len()
        )));
    }
    Ok(u.disjuncts()[0].clone())
}

pub fn parse_tgds(text: &str, schema: Option<&Schema>) -> Result<Ontology> {
    let mut p = Parser::new(text)?;
    let mut ctx = SchemaCtx::new(schema);
    let tgds = parse_tgd_items(&mut p, &mut ctx)?;
    finish(&p)?;
    Ontology::new(tgds)
}

struct Bundle {
    schema: Schema,
    tgds: Vec<Tgd>,
    query: UnionQuery,
}

fn parse_bundle(text: &str, closed: bool) -> Result<Bundle> {
    let mut p = Parser::new(text)?;
    let mut schema = None;
    let mut tgds = None;
    let mut rules = None;
    let mut ctx: Option<SchemaCtx> = None;
    while !p.at_eof() {
        let (line, col) = p.here();
        p.expect(Tok::LBracket, "section header")?;
        let name = p.ident("section name")?;
        p.expect(Tok::RBracket, "']'")?;
        let dup = |what: &str| Error::Parse {
            line,
            column: col,
            message: format!("duplicate section [{what}]"),
        };
        match name.as_str() {
            "schema" => {
                if schema.is_some() || ctx.is_some() {
                    if schema.is_some() {
                        return Err(dup("schema"));
                    }
                    return Err(Error::Parse {
                        line,
                        column: col,
                        message: "[schema] must come first".into(),
                    });
                }
                schema = Some(parse_schema_items(&mut p)?);
            }
            "tgds" | "query" => {
                let c = ctx.get_or_insert_with(|| {
                    let s = schema.clone().unwrap_or_default();
                    if closed {
                        SchemaCtx::new(Some(&s))
                    } else {
                        SchemaCtx::open(&s)
                    }
                });
                if name == "tgds" {
                    if tgds.is_some() {
                        return Err(dup("tgds"));
                    }
                    tgds = Some(parse_tgd_items(&mut p, c)?);
                } else {
                    if rules.is_some() {
                        return Err(dup("query"));
                    }
                    rules = Some((parse_rules(&mut p, c)?, p.here()));
                }
            }
            other => {
                return Err(Error::Parse {
                    line,
                    column: col,
                    message: format!("unknown section [{other}]"),
                })
            }
        }
    }
    let end = p.here();
    let full = ctx.map(|c| c.schema).unwrap_or_default();
    let (rules, qend) = rules.ok_or(Error::Parse {
        line: end.0,
        column: end.1,
        message: "missing [query] section".into(),
    })?;
    let query = build_query(rules, &full, qend)?;
    Ok(Bundle {
        schema: schema.unwrap_or_default(),
        tgds: tgds.unwrap_or_default(),
        query,
    })
}

/// An OMQ bundle; `[schema]` is the data schema, and the ontology and query
/// may use further symbols.
pub fn parse_omq(text: &str) -> Result<Omq> {
    let b = parse_bundle(text, false)?;
    Omq::new(Ontology::new(b.tgds)?, b.schema, b.query)
}

/// A CQS bundle; every symbol must be declared in `[schema]`.
pub fn parse_cqs(text: &str) -> Result<Cqs> {
    let b = parse_bundle(text, true)?;
    Cqs::new(Ontology::new(b.tgds)?, b.schema, b.query)
}

/// Parses raw bytes, rejecting invalid UTF-8 with a positioned error.
pub fn parse_bytes(kind: DocKind, bytes: &[u8]) -> Result<ModelObject> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(&SourceDocument {
            kind,
            text: text.to_string(),
        }),
        Err(e) => {
            let prefix = &bytes[..e.valid_up_to()];
            let line = 1 + prefix.iter().filter(|&&b| b == b'\n').count();
            let column = 1 + prefix.iter().rev().take_while(|&&b| b != b'\n').count();
            Err(Error::Parse {
                line,
                column,
                message: "invalid UTF-8".into(),
            })
        }
    }
}

pub fn parse(doc: &SourceDocument) -> Result<ModelObject> {
    let t = doc.text.as_str();
    Ok(match doc.kind {
        DocKind::Schema => ModelObject::Schema(parse_schema(t)?),
        DocKind::Database => ModelObject::Database(parse_database(t, None)?),
        DocKind::Query => ModelObject::Query(parse_query(t, None)?),
        DocKind::Tgds => ModelObject::Ontology(parse_tgds(t, None)?),
        DocKind::Omq => ModelObject::Omq(parse_omq(t)?),
        DocKind::Cqs => ModelObject::Cqs(parse_cqs(t)?),
    })
}

pub fn serialize(obj: &ModelObject) -> SourceDocument {
    let (kind, text) = match obj {
        ModelObject::Schema(s) => (DocKind::Schema, serialize_schema(s)),
        ModelObject::Database(d) => (DocKind::Database, serialize_database(d)),
        ModelObject::Query(q) => (DocKind::Query, serialize_ucq(q)),
        ModelObject::Ontology(o) => (DocKind::Tgds, serialize_ontology(o)),
        ModelObject::Omq(q) => (
            DocKind::Omq,
            serialize_bundle(&q.data_schema, &q.ontology, &q.query),
        ),
        ModelObject::Cqs(s) => (
            DocKind::Cqs,
            serialize_bundle(&s.schema, &s.constraints, &s.query),
        ),
    };
    SourceDocument { kind, text }
}

pub fn serialize_schema(s: &Schema) -> String {
    let mut out = String::new();
    for (r, a) in s.relations() {
        let _ = writeln!(out, "rel {r}/{a};");
    }
    out
}

pub fn serialize_database(d: &Database) -> String {
    let mut out = String::new();
    for f in d.facts() {
        let _ = writeln!(out, "{f:?}.");
    }
    out
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn serialize_cq(q: &ConjunctiveQuery) -> String {
    let mut body: Vec<String> = q.atoms().iter().map(|a| format!("{a:?}")).collect();
    body.extend(q.equalities().iter().map(|(a, b)| format!("{a} = {b}")));
    if body.is_empty() {
        body.push("true".into());
    }
    format!("q({}) :- {}.", join(q.answer_vars()), body.join(", "))
}

pub fn serialize_ucq(q: &UnionQuery) -> String {
    let mut out = String::new();
    for d in q.disjuncts() {
        out.push_str(&serialize_cq(d));
        out.push('\n');
    }
    out
}

pub fn serialize_tgd(t: &Tgd) -> String {
    let body = if t.body().is_empty() {
        "true".to_string()
    } else {
        t.body()
            .iter()
            .map(|a| format!("{a:?}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let head = t
        .head()
        .iter()
        .map(|a| format!("{a:?}"))
        .collect::<Vec<_>>()
        .join(", ");
    if t.is_full() {
        format!("{body} -> {head}.")
    } else {
        format!("{body} -> exists {}. {head}.", join(t.exist_vars()))
    }
}

pub fn serialize_ontology(o: &Ontology) -> String {
    let mut out = String::new();
    for t in o.tgds() {
        out.push_str(&serialize_tgd(t));
        out.push('\n');
    }
    out
}

fn serialize_bundle(schema: &Schema, o: &Ontology, q: &UnionQuery) -> String {
    format!(
        "[schema]\n{}[tgds]\n{}[query]\n{}",
        serialize_schema(schema),
        serialize_ontology(o),
        serialize_ucq(q)
    )
}

pub fn serialize_omq(q: &Omq) -> String {
    serialize_bundle(&q.data_schema, &q.ontology, &q.query)
}

pub fn serialize_cqs(s: &Cqs) -> String {
    serialize_bundle(&s.schema, &s.constraints, &s.query)
}

/// Splits a product constant `(a|b)` into its components.
pub fn split_pair(c: &Const) -> Option<(Const, Const)> {
    let s = c.as_str();
    let inner = s.strip_prefix('(')?.strip_suffix(')')?;
    let mut depth = 0i32;
    for (i, ch) in inner.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '|' if depth == 0 => {
                return Some((Const::new(&inner[..i]), Const::new(&inner[i + 1..])))
            }
            _ => {}
        }
    }
    None
}

/// Variables in first-appearance order of the canonical serialization:
/// answer variables, then body variables left to right.
pub fn appearance_order(q: &ConjunctiveQuery) -> Vec<Var> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let body = q.atoms().iter().flat_map(|a| a.args.iter());
    for v in q.answer_vars().iter().chain(body) {
        if seen.insert(v.clone()) {
            out.push(v.clone());
        }
    }
    out
}
