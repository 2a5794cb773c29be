//! N-Triples reader and writer (W3C N-Triples without blank nodes).

use std::fmt::Write as _;

use super::store::{StoreError, TripleSet};
use super::term::Term;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum NTriplesError {
    #[error("line {line}, column {column}: {reason}")]
    Syntax {
        line: usize,
        column: usize,
        reason: String,
    },
    #[error("line {line}: blank nodes are not supported")]
    Unsupported { line: usize },
    #[error("line {line}: {source}")]
    Store { line: usize, source: StoreError },
}

/// Parses an N-Triples document. Duplicate lines collapse into one triple.
pub fn parse_ntriples(text: &str) -> Result<TripleSet, NTriplesError> {
    let mut store = TripleSet::new();
    for (index, line) in text.lines().enumerate() {
        let line_no = index + 1;
        let Some((s, p, o)) = parse_line(line, line_no)? else {
            continue;
        };
        store
            .insert(s, p, o)
            .map_err(|source| NTriplesError::Store { line: line_no, source })?;
    }
    Ok(store)
}

/// Writes the store as N-Triples, one triple per line in index order.
pub fn write_ntriples(store: &TripleSet) -> String {
    let mut out = String::new();
    for (s, p, o) in store.iter() {
        let _ = writeln!(out, "{s} {p} {o} .");
    }
    out
}

/// Parses one line; `Ok(None)` for blank and comment lines.
pub fn parse_line(line: &str, line_no: usize) -> Result<Option<(Term, Term, Term)>, NTriplesError> {
    let mut cur = Cursor {
        chars: line.char_indices().collect(),
        pos: 0,
        line: line_no,
    };
    cur.skip_ws();
    if cur.at_end() || cur.peek() == Some('#') {
        return Ok(None);
    }
    let s = cur.subject_or_predicate("subject")?;
    cur.skip_ws();
    let p = cur.subject_or_predicate("predicate")?;
    cur.skip_ws();
    let o = cur.object()?;
    cur.skip_ws();
    if cur.peek() != Some('.') {
        return Err(cur.error("expected '.' after object"));
    }
    cur.pos += 1;
    cur.skip_ws();
    if !cur.at_end() && cur.peek() != Some('#') {
        return Err(cur.error("unexpected content after '.'"));
    }
    Ok(Some((s, p, o)))
}

struct Cursor {
    chars: Vec<(usize, char)>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.pos += 1;
        }
    }

    fn error(&self, reason: impl Into<String>) -> NTriplesError {
        NTriplesError::Syntax {
            line: self.line,
            column: self.pos + 1,
            reason: reason.into(),
        }
    }

    fn subject_or_predicate(&mut self, what: &str) -> Result<Term, NTriplesError> {
        match self.peek() {
            Some('<') => self.iri(),
            Some('_') => Err(NTriplesError::Unsupported { line: self.line }),
            _ => Err(self.error(format!("expected IRI as {what}"))),
        }
    }

    fn object(&mut self) -> Result<Term, NTriplesError> {
        match self.peek() {
            Some('<') => self.iri(),
            Some('"') => self.literal(),
            Some('_') => Err(NTriplesError::Unsupported { line: self.line }),
            _ => Err(self.error("expected IRI or literal as object")),
        }
    }

    fn iri(&mut self) -> Result<Term, NTriplesError> {
        let start = self.pos;
        self.bump();
        let mut value = String::new();
        loop {
            match self.bump() {
                None => {
                    self.pos = start;
                    return Err(self.error("unterminated IRI"));
                }
                Some('>') => break,
                Some('\\') => value.push(self.unicode_escape()?),
                Some(c) if c <= ' ' || "<\"{}|^`".contains(c) => {
                    self.pos -= 1;
                    return Err(self.error(format!("invalid character {c:?} in IRI")));
                }
                Some(c) => value.push(c),
            }
        }
        if !has_scheme(&value) {
            self.pos = start;
            return Err(self.error(format!("IRI <{value}> is not absolute")));
        }
        Ok(Term::Iri(value))
    }

    fn unicode_escape(&mut self) -> Result<char, NTriplesError> {
        let width = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.error("only \\u and \\U escapes are allowed in IRIs")),
        };
        self.hex(width)
    }

    fn hex(&mut self, width: usize) -> Result<char, NTriplesError> {
        let mut code = 0u32;
        for _ in 0..width {
            let digit = self
                .bump()
                .and_then(|c| c.to_digit(16))
                .ok_or_else(|| self.error("invalid hex escape"))?;
            code = code * 16 + digit;
        }
        char::from_u32(code).ok_or_else(|| self.error("escape is not a valid code point"))
    }

    fn literal(&mut self) -> Result<Term, NTriplesError> {
        let start = self.pos;
        self.bump();
        let mut lexical = String::new();
        loop {
            match self.bump() {
                None => {
                    self.pos = start;
                    return Err(self.error("unterminated literal"));
                }
                Some('"') => break,
                Some('\\') => {
                    let c = match self.bump() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.hex(4)?,
                        Some('U') => self.hex(8)?,
                        _ => return Err(self.error("invalid escape in literal")),
                    };
                    lexical.push(c);
                }
                Some(c) => lexical.push(c),
            }
        }
        match self.peek() {
            Some('@') => {
                self.bump();
                let tag = self.lang_tag()?;
                Ok(Term::lang_string(lexical, tag))
            }
            Some('^') => {
                self.bump();
                if self.bump() != Some('^') {
                    return Err(self.error("expected '^^' before datatype"));
                }
                if self.peek() != Some('<') {
                    return Err(self.error("expected datatype IRI"));
                }
                let Term::Iri(dt) = self.iri()? else { unreachable!() };
                Ok(Term::typed(lexical, dt))
            }
            _ => Ok(Term::literal(lexical)),
        }
    }

    fn lang_tag(&mut self) -> Result<String, NTriplesError> {
        let mut tag = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '-' {
                tag.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        let valid = !tag.is_empty()
            && tag.split('-').enumerate().all(|(i, part)| {
                !part.is_empty() && (i > 0 || part.chars().all(|c| c.is_ascii_alphabetic()))
            });
        if valid {
            Ok(tag)
        } else {
            Err(self.error("invalid language tag"))
        }
    }
}

/// True when the string starts with an RFC 3987 scheme followed by ':'.
pub fn has_scheme(iri: &str) -> bool {
    let Some((scheme, _)) = iri.split_once(':') else {
        return false;
    };
    let mut chars = scheme.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || "+-.".contains(c))
}
