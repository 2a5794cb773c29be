//! Parser for the restricted SELECT dialect.
//!
//! Supported: `PREFIX`, `SELECT [DISTINCT]`, projections `?v`, `?v as ?w`,
//! `str(?v) as ?w`, `count(?v) as ?w` (bare or parenthesized), a single basic
//! graph pattern with `;` and `,` abbreviations and the `a` keyword,
//! `ORDER BY` and `LIMIT`. Everything else is rejected.

use std::fmt;

use super::ntriples::has_scheme;
use super::term::{Term, RDF_TYPE, XSD_INTEGER};

const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";

const UNSUPPORTED: &[&str] = &[
    "OPTIONAL", "FILTER", "UNION", "GROUP", "HAVING", "MINUS", "BIND", "VALUES", "SERVICE", "GRAPH",
    "OFFSET", "CONSTRUCT", "ASK", "DESCRIBE", "INSERT", "DELETE", "FROM", "NAMED", "REDUCED", "BASE",
    "LOAD", "CLEAR", "DROP", "CREATE", "EXISTS", "NOT", "SUM", "AVG", "MIN", "MAX", "SAMPLE",
    "GROUP_CONCAT", "WITH", "USING",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("parse error at offset {position}: expected {expected}")]
    Parse { position: usize, expected: String },
    #[error("unknown prefix '{0}:'")]
    UnknownPrefix(String),
    #[error("unsupported SPARQL feature: {0}")]
    UnsupportedFeature(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Var(String),
    Str(String),
    Count(String),
}

impl Expr {
    pub fn var(&self) -> &str {
        match self {
            Expr::Var(v) | Expr::Str(v) | Expr::Count(v) => v,
        }
    }

    pub fn is_aggregate(&self) -> bool {
        matches!(self, Expr::Count(_))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(v) => write!(f, "?{v}"),
            Expr::Str(v) => write!(f, "str(?{v})"),
            Expr::Count(v) => write!(f, "count(?{v})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projection {
    pub expr: Expr,
    pub alias: Option<String>,
}

impl Projection {
    /// Column name in the result table.
    pub fn output_name(&self) -> &str {
        self.alias.as_deref().unwrap_or_else(|| self.expr.var())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatternTerm {
    Var(String),
    Term(Term),
}

impl PatternTerm {
    pub fn as_var(&self) -> Option<&str> {
        match self {
            PatternTerm::Var(v) => Some(v),
            PatternTerm::Term(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn positions(&self) -> [&PatternTerm; 3] {
        [&self.subject, &self.predicate, &self.object]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderKey {
    pub expr: Expr,
    pub descending: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    /// Declared prefixes in declaration order.
    pub prefixes: Vec<(String, String)>,
    pub distinct: bool,
    pub projection: Vec<Projection>,
    pub patterns: Vec<TriplePattern>,
    pub order_by: Vec<OrderKey>,
    pub limit: Option<usize>,
}

impl Query {
    pub fn is_aggregate(&self) -> bool {
        self.projection.iter().any(|p| p.expr.is_aggregate())
    }

    pub fn output_vars(&self) -> Vec<String> {
        self.projection.iter().map(|p| p.output_name().to_owned()).collect()
    }

    /// Variables mentioned in the basic graph pattern, in first-seen order.
    pub fn pattern_vars(&self) -> Vec<&str> {
        let mut seen = Vec::new();
        for pattern in &self.patterns {
            for v in pattern.positions().into_iter().filter_map(PatternTerm::as_var) {
                if !seen.contains(&v) {
                    seen.push(v);
                }
            }
        }
        seen
    }
}

pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    let tokens = lex(text)?;
    if let Some(word) = tokens.iter().find_map(|t| match &t.kind {
        Tok::Word(w) if UNSUPPORTED.contains(&w.to_ascii_uppercase().as_str()) => Some(w.to_ascii_uppercase()),
        _ => None,
    }) {
        return Err(QueryError::UnsupportedFeature(word));
    }
    Parser {
        tokens,
        pos: 0,
        end: text.len(),
        prefixes: Vec::new(),
    }
    .query()
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Iri(String),
    PName(String, String),
    Var(String),
    Str(String),
    LangTag(String),
    DoubleCaret,
    Integer(String),
    Decimal(String),
    Word(String),
    Punct(char),
    Placeholder(String),
    Other(char),
}

#[derive(Debug, Clone)]
struct Token {
    kind: Tok,
    pos: usize,
}

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

fn lex(text: &str) -> Result<Vec<Token>, QueryError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let at = |i: usize| chars.get(i).map(|&(_, c)| c);
    let offset = |i: usize| chars.get(i).map_or(text.len(), |&(p, _)| p);
    let mut tokens = Vec::new();
    let mut i = 0;
    while let Some(c) = at(i) {
        let pos = offset(i);
        match c {
            c if c.is_whitespace() => i += 1,
            '#' => {
                while at(i).is_some_and(|c| c != '\n') {
                    i += 1;
                }
            }
            '<' => {
                let mut j = i + 1;
                let mut value = String::new();
                let mut ok = false;
                while let Some(c) = at(j) {
                    if c == '>' {
                        ok = true;
                        break;
                    }
                    if c <= ' ' || "<\"{}|^`\\".contains(c) {
                        break;
                    }
                    value.push(c);
                    j += 1;
                }
                if ok {
                    tokens.push(Token { kind: Tok::Iri(value), pos });
                    i = j + 1;
                } else {
                    tokens.push(Token { kind: Tok::Other('<'), pos });
                    i += 1;
                }
            }
            '?' | '$' => {
                let mut j = i + 1;
                let mut name = String::new();
                while let Some(c) = at(j).filter(|&c| c.is_alphanumeric() || c == '_') {
                    name.push(c);
                    j += 1;
                }
                if name.is_empty() {
                    return Err(QueryError::Parse { position: pos, expected: "variable name".into() });
                }
                tokens.push(Token { kind: Tok::Var(name), pos });
                i = j;
            }
            '"' | '\'' => {
                let quote = c;
                let mut j = i + 1;
                let mut value = String::new();
                loop {
                    match at(j) {
                        None => {
                            return Err(QueryError::Parse { position: pos, expected: "closing quote".into() })
                        }
                        Some(c) if c == quote => break,
                        Some('\\') => {
                            let esc = match at(j + 1) {
                                Some('t') => '\t',
                                Some('n') => '\n',
                                Some('r') => '\r',
                                Some('b') => '\u{8}',
                                Some('f') => '\u{c}',
                                Some('"') => '"',
                                Some('\'') => '\'',
                                Some('\\') => '\\',
                                _ => {
                                    return Err(QueryError::Parse {
                                        position: offset(j),
                                        expected: "valid string escape".into(),
                                    })
                                }
                            };
                            value.push(esc);
                            j += 2;
                        }
                        Some('\n' | '\r') => {
                            return Err(QueryError::Parse { position: offset(j), expected: "closing quote".into() })
                        }
                        Some(c) => {
                            value.push(c);
                            j += 1;
                        }
                    }
                }
                tokens.push(Token { kind: Tok::Str(value), pos });
                i = j + 1;
                if at(i) == Some('@') {
                    let mut j = i + 1;
                    let mut tag = String::new();
                    while let Some(c) = at(j).filter(|&c| c.is_ascii_alphanumeric() || c == '-') {
                        tag.push(c);
                        j += 1;
                    }
                    if tag.is_empty() {
                        return Err(QueryError::Parse { position: offset(i), expected: "language tag".into() });
                    }
                    tokens.push(Token { kind: Tok::LangTag(tag), pos: offset(i) });
                    i = j;
                }
            }
            '^' if at(i + 1) == Some('^') => {
                tokens.push(Token { kind: Tok::DoubleCaret, pos });
                i += 2;
            }
            '@' => {
                let mut j = i + 1;
                let mut name = String::new();
                while let Some(c) = at(j).filter(|&c| is_name_char(c)) {
                    name.push(c);
                    j += 1;
                }
                tokens.push(Token { kind: Tok::Placeholder(name), pos });
                i = j;
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                let mut lexical = String::new();
                while let Some(c) = at(j).filter(char::is_ascii_digit) {
                    lexical.push(c);
                    j += 1;
                }
                if at(j) == Some('.') && at(j + 1).is_some_and(|c| c.is_ascii_digit()) {
                    lexical.push('.');
                    j += 1;
                    while let Some(c) = at(j).filter(char::is_ascii_digit) {
                        lexical.push(c);
                        j += 1;
                    }
                    tokens.push(Token { kind: Tok::Decimal(lexical), pos });
                } else {
                    tokens.push(Token { kind: Tok::Integer(lexical), pos });
                }
                i = j;
            }
            c if is_name_start(c) || c == ':' => {
                let mut j = i;
                let mut word = String::new();
                while let Some(c) = at(j).filter(|&c| is_name_char(c) || c == '.') {
                    word.push(c);
                    j += 1;
                }
                while word.ends_with('.') {
                    word.pop();
                    j -= 1;
                }
                if at(j) == Some(':') {
                    let mut k = j + 1;
                    let mut local = String::new();
                    while let Some(c) = at(k).filter(|&c| is_name_char(c) || c == '.') {
                        local.push(c);
                        k += 1;
                    }
                    while local.ends_with('.') {
                        local.pop();
                        k -= 1;
                    }
                    tokens.push(Token { kind: Tok::PName(word, local), pos });
                    i = k;
                } else {
                    tokens.push(Token { kind: Tok::Word(word), pos });
                    i = j;
                }
            }
            '{' | '}' | '(' | ')' | '.' | ';' | ',' | '*' => {
                tokens.push(Token { kind: Tok::Punct(c), pos });
                i += 1;
            }
            other => {
                tokens.push(Token { kind: Tok::Other(other), pos });
                i += 1;
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
    prefixes: Vec<(String, String)>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |t| t.pos)
    }

    fn fail<T>(&self, expected: impl Into<String>) -> Result<T, QueryError> {
        Err(QueryError::Parse {
            position: self.offset(),
            expected: expected.into(),
        })
    }

    fn next(&mut self) -> Option<Tok> {
        let tok = self.tokens.get(self.pos).map(|t| t.kind.clone());
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn at_keyword(&self, keyword: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(keyword))
    }

    fn eat_keyword(&mut self, keyword: &str) -> bool {
        let hit = self.at_keyword(keyword);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect_keyword(&mut self, keyword: &str) -> Result<(), QueryError> {
        if self.eat_keyword(keyword) {
            Ok(())
        } else {
            self.fail(keyword)
        }
    }

    fn eat_punct(&mut self, c: char) -> bool {
        let hit = self.peek() == Some(&Tok::Punct(c));
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect_punct(&mut self, c: char) -> Result<(), QueryError> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            self.fail(format!("'{c}'"))
        }
    }

    fn var(&mut self) -> Result<String, QueryError> {
        match self.peek() {
            Some(Tok::Var(v)) => {
                let v = v.clone();
                self.pos += 1;
                Ok(v)
            }
            _ => self.fail("variable"),
        }
    }

    fn query(mut self) -> Result<Query, QueryError> {
        while self.at_keyword("PREFIX") {
            self.pos += 1;
            let prefix = match self.next() {
                Some(Tok::PName(prefix, local)) if local.is_empty() => prefix,
                _ => {
                    self.pos -= 1;
                    return self.fail("prefix name ending in ':'");
                }
            };
            let iri = match self.next() {
                Some(Tok::Iri(iri)) => iri,
                _ => {
                    self.pos -= 1;
                    return self.fail("IRI");
                }
            };
            self.prefixes.retain(|(p, _)| p != &prefix);
            self.prefixes.push((prefix, iri));
        }
        self.expect_keyword("SELECT")?;
        let distinct = self.eat_keyword("DISTINCT");
        if self.peek() == Some(&Tok::Punct('*')) {
            return Err(QueryError::UnsupportedFeature("SELECT *".into()));
        }
        let mut projection = Vec::new();
        while !self.at_keyword("WHERE") && self.peek() != Some(&Tok::Punct('{')) {
            let proj = self.projection()?;
            if projection.iter().any(|p: &Projection| p.output_name() == proj.output_name()) {
                return self.fail(format!("a projection other than duplicate ?{}", proj.output_name()));
            }
            projection.push(proj);
        }
        if projection.is_empty() {
            return self.fail("projection");
        }
        self.eat_keyword("WHERE");
        self.expect_punct('{')?;
        let patterns = self.pattern_list()?;
        self.expect_punct('}')?;
        let mut order_by = Vec::new();
        if self.eat_keyword("ORDER") {
            self.expect_keyword("BY")?;
            while let Some(key) = self.order_key()? {
                order_by.push(key);
            }
            if order_by.is_empty() {
                return self.fail("order condition");
            }
        }
        let mut limit = None;
        if self.eat_keyword("LIMIT") {
            match self.next() {
                Some(Tok::Integer(n)) => {
                    limit = Some(n.parse().map_err(|_| QueryError::Parse {
                        position: self.tokens[self.pos - 1].pos,
                        expected: "integer limit".into(),
                    })?)
                }
                _ => {
                    self.pos -= 1;
                    return self.fail("integer limit");
                }
            }
        }
        if self.peek().is_some() {
            return self.fail("end of query");
        }
        Ok(Query {
            prefixes: self.prefixes,
            distinct,
            projection,
            patterns,
            order_by,
            limit,
        })
    }

    fn projection(&mut self) -> Result<Projection, QueryError> {
        if self.eat_punct('(') {
            let expr = self.expr(true)?;
            self.expect_keyword("AS")?;
            let alias = self.var()?;
            self.expect_punct(')')?;
            return Ok(Projection { expr, alias: Some(alias) });
        }
        let expr = self.expr(true)?;
        let alias = if self.eat_keyword("AS") {
            Some(self.var()?)
        } else if matches!(expr, Expr::Var(_)) {
            None
        } else {
            return self.fail("'as' alias after expression");
        };
        Ok(Projection { expr, alias })
    }

    fn expr(&mut self, allow_count: bool) -> Result<Expr, QueryError> {
        if let Some(Tok::Var(_)) = self.peek() {
            return Ok(Expr::Var(self.var()?));
        }
        let is_count = self.at_keyword("COUNT");
        if self.eat_keyword("STR") || (allow_count && self.eat_keyword("COUNT")) {
            self.expect_punct('(')?;
            if self.at_keyword("DISTINCT") {
                return Err(QueryError::UnsupportedFeature("COUNT(DISTINCT)".into()));
            }
            let v = self.var()?;
            self.expect_punct(')')?;
            return Ok(if is_count { Expr::Count(v) } else { Expr::Str(v) });
        }
        self.fail(if allow_count { "variable, str(...) or count(...)" } else { "variable or str(...)" })
    }

    fn order_key(&mut self) -> Result<Option<OrderKey>, QueryError> {
        let descending = if self.eat_keyword("DESC") {
            true
        } else if self.eat_keyword("ASC") {
            false
        } else {
            return match self.peek() {
                Some(Tok::Var(_)) => Ok(Some(OrderKey { expr: self.expr(false)?, descending: false })),
                Some(Tok::Word(w)) if w.eq_ignore_ascii_case("STR") => {
                    Ok(Some(OrderKey { expr: self.expr(false)?, descending: false }))
                }
                _ => Ok(None),
            };
        };
        self.expect_punct('(')?;
        let expr = self.expr(false)?;
        self.expect_punct(')')?;
        Ok(Some(OrderKey { expr, descending }))
    }

    fn pattern_list(&mut self) -> Result<Vec<TriplePattern>, QueryError> {
        let mut patterns = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Punct('}')) => break,
                Some(Tok::Punct('{')) => return Err(QueryError::UnsupportedFeature("nested group pattern".into())),
                Some(Tok::Word(w)) if w.eq_ignore_ascii_case("SELECT") => {
                    return Err(QueryError::UnsupportedFeature("subquery".into()))
                }
                _ => {}
            }
            self.triples_same_subject(&mut patterns)?;
            if !self.eat_punct('.') {
                break;
            }
        }
        Ok(patterns)
    }

    fn triples_same_subject(&mut self, out: &mut Vec<TriplePattern>) -> Result<(), QueryError> {
        let subject = self.node(false)?;
        loop {
            let predicate = if matches!(self.peek(), Some(Tok::Word(w)) if w == "a") {
                self.pos += 1;
                PatternTerm::Term(Term::iri(RDF_TYPE))
            } else {
                match self.node(false)? {
                    PatternTerm::Term(Term::Literal { .. }) => unreachable!(),
                    p => p,
                }
            };
            loop {
                let object = self.node(true)?;
                out.push(TriplePattern {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                if !self.eat_punct(',') {
                    break;
                }
            }
            if !self.eat_punct(';') {
                return Ok(());
            }
            while self.eat_punct(';') {}
            if matches!(self.peek(), Some(Tok::Punct('.' | '}'))) {
                return Ok(());
            }
        }
    }

    fn node(&mut self, allow_literal: bool) -> Result<PatternTerm, QueryError> {
        let start = self.pos;
        let term = match self.next() {
            Some(Tok::Var(v)) => return Ok(PatternTerm::Var(v)),
            Some(Tok::Iri(iri)) => {
                if !has_scheme(&iri) || iri.is_empty() {
                    self.pos = start;
                    return self.fail("absolute IRI");
                }
                Term::Iri(iri)
            }
            Some(Tok::PName(prefix, local)) => Term::Iri(self.expand(&prefix, &local)?),
            Some(Tok::Str(lexical)) if allow_literal => match self.peek() {
                Some(Tok::LangTag(tag)) => {
                    let tag = tag.clone();
                    self.pos += 1;
                    Term::lang_string(lexical, tag)
                }
                Some(Tok::DoubleCaret) => {
                    self.pos += 1;
                    let dt = match self.next() {
                        Some(Tok::Iri(iri)) => iri,
                        Some(Tok::PName(prefix, local)) => self.expand(&prefix, &local)?,
                        _ => {
                            self.pos -= 1;
                            return self.fail("datatype IRI");
                        }
                    };
                    Term::typed(lexical, dt)
                }
                _ => Term::literal(lexical),
            },
            Some(Tok::Integer(n)) if allow_literal => Term::typed(n, XSD_INTEGER),
            Some(Tok::Decimal(n)) if allow_literal => Term::typed(n, XSD_DECIMAL),
            _ => {
                self.pos = start;
                return self.fail(if allow_literal { "variable, IRI or literal" } else { "variable or IRI" });
            }
        };
        Ok(PatternTerm::Term(term))
    }

    fn expand(&self, prefix: &str, local: &str) -> Result<String, QueryError> {
        self.prefixes
            .iter()
            .rev()
            .find(|(p, _)| p == prefix)
            .map(|(_, base)| format!("{base}{local}"))
            .ok_or_else(|| QueryError::UnknownPrefix(prefix.to_owned()))
    }
}
