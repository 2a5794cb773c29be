//! In-memory RDF store, N-Triples I/O and the restricted SPARQL dialect.

mod endpoint;
mod eval;
mod ntriples;
mod query;
mod results;
mod store;
mod term;

pub use endpoint::{serve, serve_on, sparql_router, EndpointHandle, ServeError, RESULTS_CONTENT_TYPE};
pub use eval::{compare_terms, evaluate, EvalError};
pub use ntriples::{has_scheme, parse_line, parse_ntriples, write_ntriples, NTriplesError};
pub use query::{parse_query, Expr, OrderKey, PatternTerm, Projection, Query, QueryError, TriplePattern};
pub use results::{parse_results_json, MalformedResults, ResultTable};
pub use store::{StoreError, TermId, TripleSet};
pub use term::{Term, RDF_TYPE, XSD_INTEGER, XSD_STRING};
