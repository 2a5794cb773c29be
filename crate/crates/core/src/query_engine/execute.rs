use std::collections::{BTreeMap, BTreeSet};
use std::future::Future;
use std::sync::Arc;
use std::time::{Duration, Instant};

use super::plan::{Catalogue, LayerInput, Postprocess, QueryPlan};
use super::template::{instantiate, ParamKind};
use super::EngineError;
use crate::sparql_client::{ClientError, SparqlClient};
use crate::triple_store::{evaluate, parse_query, EvalError, QueryError, ResultTable, Term, TripleSet};

#[derive(Debug, thiserror::Error)]
pub enum ExecError {
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl ExecError {
    pub fn code(&self) -> &'static str {
        match self {
            ExecError::Client(e) => e.code(),
            ExecError::Query(_) => "QueryError",
            ExecError::Eval(_) => "EvalError",
        }
    }
}

/// Anything that can answer a SPARQL query with a result table.
pub trait QueryExecutor: Sync {
    fn run(&self, query: &str) -> impl Future<Output = Result<ResultTable, ExecError>> + Send;
}

impl QueryExecutor for TripleSet {
    async fn run(&self, query: &str) -> Result<ResultTable, ExecError> {
        Ok(evaluate(self, &parse_query(query)?)?)
    }
}

impl QueryExecutor for SparqlClient {
    async fn run(&self, query: &str) -> Result<ResultTable, ExecError> {
        Ok(self.execute(query).await?)
    }
}

/// Where queries go: an in-process store or a remote endpoint.
#[derive(Debug, Clone)]
pub enum Backend {
    Local(Arc<TripleSet>),
    Remote(SparqlClient),
}

impl Backend {
    pub fn describe(&self) -> String {
        match self {
            Backend::Local(store) => format!("in-process ({} triples)", store.len()),
            Backend::Remote(client) => client.config().url.clone(),
        }
    }
}

impl QueryExecutor for Backend {
    async fn run(&self, query: &str) -> Result<ResultTable, ExecError> {
        match self {
            Backend::Local(store) => store.run(query).await,
            Backend::Remote(client) => client.run(query).await,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_layers: usize,
    pub total_timeout_ms: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self { max_layers: 4, total_timeout_ms: 8000 }
    }
}

impl Budget {
    pub fn new(max_layers: usize, total_timeout_ms: u64) -> Result<Self, EngineError> {
        if max_layers == 0 || total_timeout_ms == 0 {
            return Err(EngineError::InvalidBudget);
        }
        Ok(Self { max_layers, total_timeout_ms })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntentResult {
    pub plan_id: String,
    pub table: ResultTable,
    pub truncated: bool,
    pub layers_executed: usize,
    /// Raw table of every executed layer, before postprocessing.
    pub layer_tables: Vec<ResultTable>,
}

/// Runs the plan's layers in order. The layer budget is checked before any
/// query is sent; each layer gets whatever remains of the time budget.
pub async fn execute_plan<E: QueryExecutor + ?Sized>(
    catalogue: &Catalogue,
    plan: &QueryPlan,
    executor: &E,
    budget: Budget,
) -> Result<IntentResult, EngineError> {
    if plan.layers.len() > budget.max_layers {
        return Err(EngineError::LayerBudgetExceeded { needed: plan.layers.len(), allowed: budget.max_layers });
    }
    if plan.layers.is_empty() {
        return Err(EngineError::Catalogue(format!("plan '{}' has no layers", plan.id)));
    }
    let started = Instant::now();
    let total = Duration::from_millis(budget.total_timeout_ms);
    let mut tables: Vec<ResultTable> = Vec::with_capacity(plan.layers.len());

    for (i, layer) in plan.layers.iter().enumerate() {
        let template = catalogue.template(&layer.template)?;
        let mut bindings = BTreeMap::new();
        for (param, input) in &layer.inputs {
            let kind = template.param(param).map_or(ParamKind::String, |p| p.kind);
            let value = match input {
                LayerInput::Slot { slot } => {
                    plan.slot_values.get(slot).cloned().ok_or_else(|| EngineError::MissingSlot(slot.clone()))?
                }
                LayerInput::PriorLayerVar { layer: src, var } => {
                    let term = tables
                        .get(*src)
                        .filter(|t| !t.is_empty())
                        .and_then(|t| t.get(0, var))
                        .ok_or(EngineError::EmptyLayerResult { layer: *src })?;
                    match (kind, term) {
                        (ParamKind::Iri, Term::Iri(iri)) => iri.clone(),
                        (_, term) => term.lexical().to_owned(),
                    }
                }
            };
            bindings.insert(param.clone(), value);
        }
        let query = instantiate(template, &bindings)?;

        let remaining = total.saturating_sub(started.elapsed());
        if remaining.is_zero() {
            return Err(EngineError::TimeBudgetExceeded { elapsed_ms: started.elapsed().as_millis() as u64 });
        }
        tracing::debug!(plan = %plan.id, layer = i, template = %template.id, "executing layer");
        let table = match tokio::time::timeout(remaining, executor.run(&query)).await {
            Ok(Ok(table)) => table,
            Ok(Err(source)) => return Err(EngineError::Layer { layer: i, source }),
            Err(_) => {
                return Err(EngineError::TimeBudgetExceeded { elapsed_ms: started.elapsed().as_millis() as u64 })
            }
        };
        tables.push(table);
    }

    let last = tables.last().cloned().expect("at least one layer");
    let (table, truncated) = match plan.postprocess {
        None => (last, false),
        Some(Postprocess::TopK { k }) => top_k(last, k),
        Some(Postprocess::CommonGenes { min_diseases }) => (common_genes(&last, min_diseases), false),
    };
    Ok(IntentResult {
        plan_id: plan.id.clone(),
        table,
        truncated,
        layers_executed: tables.len(),
        layer_tables: tables,
    })
}

pub fn top_k(mut table: ResultTable, k: usize) -> (ResultTable, bool) {
    let truncated = table.rows.len() > k;
    table.rows.truncate(k);
    (table, truncated)
}

/// Groups GDA rows by gene and keeps genes linked to at least
/// `min_diseases` distinct diseases. Output columns: gene, geneSymbol,
/// diseases; ordered by disease count descending, then symbol.
pub fn common_genes(table: &ResultTable, min_diseases: usize) -> ResultTable {
    let mut groups: BTreeMap<&Term, (Option<&Term>, BTreeSet<&Term>)> = BTreeMap::new();
    for row in 0..table.len() {
        let (Some(gene), Some(disease)) = (table.get(row, "gene"), table.get(row, "disease")) else {
            continue;
        };
        let entry = groups.entry(gene).or_default();
        entry.0 = entry.0.or(table.get(row, "geneSymbol"));
        entry.1.insert(disease);
    }
    let mut kept: Vec<_> = groups
        .into_iter()
        .filter(|(_, (_, diseases))| diseases.len() >= min_diseases)
        .map(|(gene, (symbol, diseases))| (gene.clone(), symbol.cloned(), diseases.len()))
        .collect();
    kept.sort_by(|a, b| {
        b.2.cmp(&a.2)
            .then_with(|| a.1.as_ref().map(Term::lexical).cmp(&b.1.as_ref().map(Term::lexical)))
            .then_with(|| a.0.cmp(&b.0))
    });
    let mut out = ResultTable::new(vec!["gene".into(), "geneSymbol".into(), "diseases".into()]);
    out.rows = kept
        .into_iter()
        .map(|(gene, symbol, n)| vec![Some(gene), symbol, Some(Term::integer(n as u64))])
        .collect();
    out
}
