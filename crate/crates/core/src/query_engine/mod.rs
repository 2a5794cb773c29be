//! Template catalogue, injection-safe instantiation and budgeted
//! multi-layer plan execution.

mod execute;
mod plan;
mod template;

pub use execute::{common_genes, execute_plan, top_k, Backend, Budget, ExecError, IntentResult, QueryExecutor};
pub use plan::{
    Catalogue, LayerInput, PlanLayer, PlanSpec, Postprocess, QueryPlan, DISEASE_SLOT_TYPE, GENE_SLOT_TYPE,
};
pub use template::{escape_binding, instantiate, placeholders, ParamDecl, ParamKind, QueryTemplate};

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("query catalogue: {0}")]
    Catalogue(String),
    #[error("unknown template '{0}'")]
    UnknownTemplate(String),
    #[error("no plan for intent '{0}'")]
    UnknownIntent(String),
    #[error("slot '{0}' was not supplied and the session has no focus for it")]
    MissingSlot(String),
    #[error("template parameter @{0} is not bound")]
    MissingParam(String),
    #[error("'{0}' is not a valid absolute IRI")]
    InvalidIri(String),
    #[error("budget limits must be positive")]
    InvalidBudget,
    #[error("plan needs {needed} layers but the budget allows {allowed}")]
    LayerBudgetExceeded { needed: usize, allowed: usize },
    #[error("time budget exhausted after {elapsed_ms} ms")]
    TimeBudgetExceeded { elapsed_ms: u64 },
    #[error("layer {layer} returned no rows for the next layer to use")]
    EmptyLayerResult { layer: usize },
    #[error("layer {layer} failed: {source}")]
    Layer { layer: usize, source: ExecError },
}

impl EngineError {
    /// Stable identifier used in diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::Catalogue(_) => "Catalogue",
            EngineError::UnknownTemplate(_) => "UnknownTemplate",
            EngineError::UnknownIntent(_) => "UnknownIntent",
            EngineError::MissingSlot(_) => "MissingSlot",
            EngineError::MissingParam(_) => "MissingParam",
            EngineError::InvalidIri(_) => "InvalidIri",
            EngineError::InvalidBudget => "InvalidBudget",
            EngineError::LayerBudgetExceeded { .. } => "LayerBudgetExceeded",
            EngineError::TimeBudgetExceeded { .. } => "TimeBudgetExceeded",
            EngineError::EmptyLayerResult { .. } => "EmptyLayerResult",
            EngineError::Layer { source, .. } => source.code(),
        }
    }
}

pub const DISEASE_CLASS: &str = "http://ncicb.nci.nih.gov/xml/owl/EVS/Thesaurus.owl#C7057";
pub const DCTERMS_TITLE: &str = "http://purl.org/dc/terms/title";

/// Disease titles shared by more than one disease node. Lookups key on the
/// title, so a usable graph must return an empty list.
pub fn duplicate_disease_titles(store: &crate::triple_store::TripleSet) -> Vec<String> {
    use crate::triple_store::{Term, RDF_TYPE};
    let mut owners: std::collections::BTreeMap<String, usize> = std::collections::BTreeMap::new();
    for disease in store.subjects(&Term::iri(RDF_TYPE), &Term::iri(DISEASE_CLASS)) {
        for title in store.objects(disease, &Term::iri(DCTERMS_TITLE)) {
            *owners.entry(title.lexical().to_owned()).or_default() += 1;
        }
    }
    owners.into_iter().filter(|(_, n)| *n > 1).map(|(t, _)| t).collect()
}
