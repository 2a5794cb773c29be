use std::fmt;

pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

const NUMERIC_DATATYPES: &[&str] = &[
    "http://www.w3.org/2001/XMLSchema#integer",
    "http://www.w3.org/2001/XMLSchema#decimal",
    "http://www.w3.org/2001/XMLSchema#double",
    "http://www.w3.org/2001/XMLSchema#float",
    "http://www.w3.org/2001/XMLSchema#int",
    "http://www.w3.org/2001/XMLSchema#long",
    "http://www.w3.org/2001/XMLSchema#short",
    "http://www.w3.org/2001/XMLSchema#nonNegativeInteger",
    "http://www.w3.org/2001/XMLSchema#positiveInteger",
];

/// An RDF node: an IRI or a literal. Blank nodes are not supported.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    Literal {
        lexical: String,
        /// Never `xsd:string`; simple literals carry `None`.
        datatype: Option<String>,
        lang: Option<String>,
    },
}

impl Term {
    pub fn iri(value: impl Into<String>) -> Self {
        Term::Iri(value.into())
    }

    pub fn literal(lexical: impl Into<String>) -> Self {
        Term::Literal {
            lexical: lexical.into(),
            datatype: None,
            lang: None,
        }
    }

    /// Builds a typed literal. `xsd:string` collapses to a simple literal.
    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        let datatype = datatype.into();
        Term::Literal {
            lexical: lexical.into(),
            datatype: (datatype != XSD_STRING).then_some(datatype),
            lang: None,
        }
    }

    pub fn lang_string(lexical: impl Into<String>, lang: impl Into<String>) -> Self {
        Term::Literal {
            lexical: lexical.into(),
            datatype: None,
            lang: Some(lang.into().to_ascii_lowercase()),
        }
    }

    pub fn integer(value: u64) -> Self {
        Term::typed(value.to_string(), XSD_INTEGER)
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    /// IRI string or literal lexical form.
    pub fn lexical(&self) -> &str {
        match self {
            Term::Iri(v) => v,
            Term::Literal { lexical, .. } => lexical,
        }
    }

    /// Numeric value of a literal with an XSD numeric datatype.
    pub fn numeric_value(&self) -> Option<f64> {
        match self {
            Term::Literal {
                lexical,
                datatype: Some(dt),
                ..
            } if NUMERIC_DATATYPES.contains(&dt.as_str()) => lexical.trim().parse().ok(),
            _ => None,
        }
    }
}

/// N-Triples serialization of the term.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(v) => write!(f, "<{v}>"),
            Term::Literal {
                lexical,
                datatype,
                lang,
            } => {
                f.write_str("\"")?;
                for c in lexical.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\r' => f.write_str("\\r")?,
                        '\t' => f.write_str("\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")?;
                if let Some(lang) = lang {
                    write!(f, "@{lang}")
                } else if let Some(dt) = datatype {
                    write!(f, "^^<{dt}>")
                } else {
                    Ok(())
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xsd_string_collapses_to_simple_literal() {
        assert_eq!(Term::typed("a", XSD_STRING), Term::literal("a"));
    }

    #[test]
    fn display_escapes_literal() {
        let t = Term::literal("say \"hi\"\n");
        assert_eq!(t.to_string(), r#""say \"hi\"\n""#);
        assert_eq!(Term::integer(3).to_string(), format!("\"3\"^^<{XSD_INTEGER}>"));
    }

    #[test]
    fn numeric_only_for_numeric_datatypes() {
        assert_eq!(Term::integer(12).numeric_value(), Some(12.0));
        assert_eq!(Term::literal("12").numeric_value(), None);
    }
}
