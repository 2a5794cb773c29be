use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::term::Term;

/// Tabular query solutions. `rows[i][j]` is the binding of `vars[j]`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResultTable {
    pub vars: Vec<String>,
    pub rows: Vec<Vec<Option<Term>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed SPARQL results: {0}")]
pub struct MalformedResults(pub String);

impl ResultTable {
    pub fn new(vars: Vec<String>) -> Self {
        Self { vars, rows: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, var: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == var)
    }

    pub fn get(&self, row: usize, var: &str) -> Option<&Term> {
        let column = self.column(var)?;
        self.rows.get(row)?.get(column)?.as_ref()
    }

    /// Bound values of one column, in row order.
    pub fn values<'a>(&'a self, var: &str) -> impl Iterator<Item = &'a Term> + 'a {
        let column = self.column(var);
        self.rows
            .iter()
            .filter_map(move |row| column.and_then(|c| row[c].as_ref()))
    }

    /// SPARQL 1.1 Query Results JSON. Object keys are emitted in sorted order,
    /// so equal tables serialize to identical bytes.
    pub fn to_json(&self) -> String {
        let doc = ResultsDoc {
            head: Head { vars: self.vars.clone() },
            results: Bindings {
                bindings: self
                    .rows
                    .iter()
                    .map(|row| {
                        self.vars
                            .iter()
                            .zip(row)
                            .filter_map(|(var, term)| Some((var.clone(), JsonTerm::from(term.as_ref()?))))
                            .collect()
                    })
                    .collect(),
            },
        };
        serde_json::to_string(&doc).expect("results serialize")
    }

    /// Tab-separated rendering with N-Triples terms; unbound cells are empty.
    pub fn to_tsv(&self) -> String {
        let mut out = self.vars.iter().map(|v| format!("?{v}")).collect::<Vec<_>>().join("\t");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|t| t.as_ref().map(Term::to_string).unwrap_or_default()).collect();
            out.push_str(&cells.join("\t"));
            out.push('\n');
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct ResultsDoc {
    head: Head,
    results: Bindings,
}

#[derive(Serialize, Deserialize)]
struct Head {
    vars: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct Bindings {
    bindings: Vec<BTreeMap<String, JsonTerm>>,
}

#[derive(Serialize, Deserialize)]
struct JsonTerm {
    #[serde(rename = "type")]
    kind: String,
    value: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    datatype: Option<String>,
    #[serde(rename = "xml:lang", skip_serializing_if = "Option::is_none")]
    lang: Option<String>,
}

impl From<&Term> for JsonTerm {
    fn from(term: &Term) -> Self {
        match term {
            Term::Iri(v) => JsonTerm { kind: "uri".into(), value: v.clone(), datatype: None, lang: None },
            Term::Literal { lexical, datatype, lang } => JsonTerm {
                kind: "literal".into(),
                value: lexical.clone(),
                datatype: datatype.clone(),
                lang: lang.clone(),
            },
        }
    }
}

/// Parses a SPARQL results JSON document into a table.
pub fn parse_results_json(doc: &str) -> Result<ResultTable, MalformedResults> {
    let parsed: ResultsDoc = serde_json::from_str(doc).map_err(|e| MalformedResults(e.to_string()))?;
    let vars = parsed.head.vars;
    let mut rows = Vec::with_capacity(parsed.results.bindings.len());
    for binding in parsed.results.bindings {
        let mut row = vec![None; vars.len()];
        for (var, value) in binding {
            let column = vars
                .iter()
                .position(|v| *v == var)
                .ok_or_else(|| MalformedResults(format!("binding for undeclared variable {var}")))?;
            row[column] = Some(match value.kind.as_str() {
                "uri" => Term::Iri(value.value),
                "literal" | "typed-literal" => match (value.datatype, value.lang) {
                    (_, Some(lang)) => Term::lang_string(value.value, lang),
                    (Some(dt), None) => Term::typed(value.value, dt),
                    (None, None) => Term::literal(value.value),
                },
                other => return Err(MalformedResults(format!("unsupported term type '{other}'"))),
            });
        }
        rows.push(row);
    }
    Ok(ResultTable { vars, rows })
}
