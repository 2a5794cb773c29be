use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::triple_store::{has_scheme, parse_query, Query};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    Iri,
    String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamDecl {
    pub name: String,
    pub kind: ParamKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryTemplate {
    pub id: String,
    pub sparql: String,
    pub params: Vec<ParamDecl>,
    pub produces: Vec<String>,
}

impl QueryTemplate {
    pub fn param(&self, name: &str) -> Option<&ParamDecl> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Template parsed with every placeholder replaced by a harmless dummy.
    pub fn parse_with_dummies(&self) -> Result<Query, EngineError> {
        let dummies = self
            .params
            .iter()
            .map(|p| {
                let raw = match p.kind {
                    ParamKind::Iri => "http://example.org/placeholder",
                    ParamKind::String => "placeholder",
                };
                (p.name.clone(), raw.to_owned())
            })
            .collect();
        let text = instantiate(self, &dummies)?;
        parse_query(&text).map_err(|e| EngineError::Catalogue(format!("template '{}': {e}", self.id)))
    }

    /// Every invariant violation as a readable message.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let used: BTreeSet<String> = placeholders(&self.sparql).into_iter().map(|(_, _, n)| n).collect();
        let declared: BTreeSet<String> = self.params.iter().map(|p| p.name.clone()).collect();
        if declared.len() != self.params.len() {
            out.push(format!("template '{}' declares a parameter twice", self.id));
        }
        for name in used.difference(&declared) {
            out.push(format!("template '{}' uses undeclared @{name}", self.id));
        }
        for name in declared.difference(&used) {
            out.push(format!("template '{}' never uses @{name}", self.id));
        }
        if !out.is_empty() {
            return out;
        }
        match self.parse_with_dummies() {
            Ok(query) => {
                let outputs = query.output_vars();
                for var in &self.produces {
                    if !outputs.contains(var) {
                        out.push(format!("template '{}' produces ?{var} but does not project it", self.id));
                    }
                }
            }
            Err(e) => out.push(e.to_string()),
        }
        out
    }
}

/// Escapes a raw binding into a single SPARQL term.
pub fn escape_binding(kind: ParamKind, raw: &str) -> Result<String, EngineError> {
    match kind {
        ParamKind::String => {
            let mut out = String::with_capacity(raw.len() + 2);
            out.push('"');
            for c in raw.chars() {
                match c {
                    '\\' => out.push_str("\\\\"),
                    '"' => out.push_str("\\\""),
                    '\n' => out.push_str("\\n"),
                    '\r' => out.push_str("\\r"),
                    '\t' => out.push_str("\\t"),
                    c => out.push(c),
                }
            }
            out.push('"');
            Ok(out)
        }
        ParamKind::Iri => {
            let bad = |c: char| c.is_control() || c == ' ' || "<>\"{}|^`\\".contains(c);
            if raw.is_empty() || !has_scheme(raw) || raw.chars().any(bad) {
                return Err(EngineError::InvalidIri(raw.to_owned()));
            }
            Ok(format!("<{raw}>"))
        }
    }
}

/// Substitutes every `@name` placeholder with its escaped binding.
pub fn instantiate(template: &QueryTemplate, bindings: &BTreeMap<String, String>) -> Result<String, EngineError> {
    for p in &template.params {
        if !bindings.contains_key(&p.name) {
            return Err(EngineError::MissingParam(p.name.clone()));
        }
    }
    let mut out = String::with_capacity(template.sparql.len());
    let mut last = 0;
    for (start, end, name) in placeholders(&template.sparql) {
        let decl = template.param(&name).ok_or_else(|| EngineError::MissingParam(name.clone()))?;
        out.push_str(&template.sparql[last..start]);
        out.push_str(&escape_binding(decl.kind, &bindings[&name])?);
        last = end;
    }
    out.push_str(&template.sparql[last..]);
    Ok(out)
}

/// Byte spans and names of `@name` placeholders outside strings, IRIs,
/// comments and language tags.
pub fn placeholders(sparql: &str) -> Vec<(usize, usize, String)> {
    let bytes = sparql.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut after_string = false;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                after_string = false;
            }
            b'"' | b'\'' => {
                i += 1;
                while i < bytes.len() && bytes[i] != c && bytes[i] != b'\n' {
                    i += if bytes[i] == b'\\' { 2 } else { 1 };
                }
                i += 1;
                after_string = true;
                continue;
            }
            b'<' => {
                let close = bytes[i + 1..]
                    .iter()
                    .position(|&b| b == b'>' || b <= b' ' || b"<\"{}|^`\\".contains(&b));
                match close {
                    Some(n) if bytes[i + 1 + n] == b'>' => i += n + 2,
                    _ => i += 1,
                }
                after_string = false;
                continue;
            }
            b'@' => {
                let start = i;
                i += 1;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'-') {
                    i += 1;
                }
                if !after_string && i > start + 1 {
                    out.push((start, i, sparql[start + 1..i].to_owned()));
                }
                after_string = false;
                continue;
            }
            _ => after_string = false,
        }
        i += 1;
    }
    out
}
