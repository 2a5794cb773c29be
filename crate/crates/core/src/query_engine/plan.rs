use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::template::QueryTemplate;
use super::EngineError;
use crate::interaction_model::InteractionModel;
use crate::skill_service::SessionState;

pub const DISEASE_SLOT_TYPE: &str = "DISEASE";
pub const GENE_SLOT_TYPE: &str = "GENE";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LayerInput {
    Slot { slot: String },
    PriorLayerVar { layer: usize, var: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanLayer {
    pub template: String,
    pub inputs: BTreeMap<String, LayerInput>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub enum Postprocess {
    #[serde(rename_all = "camelCase")]
    CommonGenes { min_diseases: usize },
    TopK { k: usize },
}

/// Plan as declared in the catalogue, before slot values are known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSpec {
    pub id: String,
    pub layers: Vec<PlanLayer>,
    pub postprocess: Option<Postprocess>,
}

impl PlanSpec {
    /// Slots referenced by any layer, in name order.
    pub fn required_slots(&self) -> BTreeSet<&str> {
        self.layers
            .iter()
            .flat_map(|l| l.inputs.values())
            .filter_map(|i| match i {
                LayerInput::Slot { slot } => Some(slot.as_str()),
                LayerInput::PriorLayerVar { .. } => None,
            })
            .collect()
    }
}

/// Plan bound to concrete slot values, ready for execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryPlan {
    pub id: String,
    pub intent: String,
    pub layers: Vec<PlanLayer>,
    pub postprocess: Option<Postprocess>,
    /// slot name -> canonical value
    pub slot_values: BTreeMap<String, String>,
    /// Slots supplied by the session focus rather than the utterance.
    pub session_filled: Vec<String>,
}

/// Templates and plans loaded from the query directory.
#[derive(Debug, Clone, Default)]
pub struct Catalogue {
    pub templates: BTreeMap<String, QueryTemplate>,
    pub plans: BTreeMap<String, PlanSpec>,
}

impl Catalogue {
    pub fn from_json(templates: &str, plans: &str) -> Result<Self, EngineError> {
        let templates: Vec<QueryTemplate> =
            serde_json::from_str(templates).map_err(|e| EngineError::Catalogue(format!("templates: {e}")))?;
        let plans: Vec<PlanSpec> =
            serde_json::from_str(plans).map_err(|e| EngineError::Catalogue(format!("plans: {e}")))?;
        let mut cat = Catalogue::default();
        for t in templates {
            if cat.templates.contains_key(&t.id) {
                return Err(EngineError::Catalogue(format!("template '{}' declared twice", t.id)));
            }
            cat.templates.insert(t.id.clone(), t);
        }
        for p in plans {
            if cat.plans.contains_key(&p.id) {
                return Err(EngineError::Catalogue(format!("plan '{}' declared twice", p.id)));
            }
            cat.plans.insert(p.id.clone(), p);
        }
        Ok(cat)
    }

    /// Reads `templates.json` and `plans.json` from `dir`.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self, EngineError> {
        let dir = dir.as_ref();
        let read = |name: &str| {
            let path = dir.join(name);
            std::fs::read_to_string(&path).map_err(|e| EngineError::Catalogue(format!("{}: {e}", path.display())))
        };
        Self::from_json(&read("templates.json")?, &read("plans.json")?)
    }

    pub fn template(&self, id: &str) -> Result<&QueryTemplate, EngineError> {
        self.templates.get(id).ok_or_else(|| EngineError::UnknownTemplate(id.to_owned()))
    }

    /// Every template and plan invariant violation, plus intents whose plan
    /// is missing or whose slots do not cover the plan.
    pub fn problems(&self, model: Option<&InteractionModel>) -> Vec<String> {
        let mut out: Vec<String> = self.templates.values().flat_map(QueryTemplate::problems).collect();
        for plan in self.plans.values() {
            if plan.layers.is_empty() {
                out.push(format!("plan '{}' has no layers", plan.id));
            }
            for (i, layer) in plan.layers.iter().enumerate() {
                let Some(template) = self.templates.get(&layer.template) else {
                    out.push(format!("plan '{}' layer {i} uses unknown template '{}'", plan.id, layer.template));
                    continue;
                };
                for p in &template.params {
                    if !layer.inputs.contains_key(&p.name) {
                        out.push(format!("plan '{}' layer {i} does not bind @{}", plan.id, p.name));
                    }
                }
                for (name, input) in &layer.inputs {
                    if template.param(name).is_none() {
                        out.push(format!("plan '{}' layer {i} binds unknown @{name}", plan.id));
                    }
                    if let LayerInput::PriorLayerVar { layer: src, var } = input {
                        if *src >= i {
                            out.push(format!("plan '{}' layer {i} references layer {src}", plan.id));
                        } else if let Some(t) = self.templates.get(&plan.layers[*src].template) {
                            if !t.produces.contains(var) {
                                out.push(format!("plan '{}' layer {i} reads ?{var} not produced by layer {src}", plan.id));
                            }
                        }
                    }
                }
            }
        }
        if let Some(model) = model {
            for intent in model.intents.iter().filter(|i| !i.is_builtin()) {
                let Some(plan) = self.plans.get(&intent.plan) else {
                    out.push(format!("intent '{}' names unknown plan '{}'", intent.name, intent.plan));
                    continue;
                };
                for slot in plan.required_slots() {
                    if intent.slot_type(slot).is_none() {
                        out.push(format!("plan '{}' needs slot '{slot}' not declared by '{}'", plan.id, intent.name));
                    }
                }
            }
        }
        out
    }

    /// Binds the intent's plan to slot values, filling missing disease or
    /// gene slots from the session focus.
    pub fn plan_for_intent(
        &self,
        model: &InteractionModel,
        intent: &str,
        slots: &BTreeMap<String, String>,
        session: &SessionState,
    ) -> Result<QueryPlan, EngineError> {
        let def = model
            .intent(intent)
            .filter(|d| !d.is_builtin())
            .ok_or_else(|| EngineError::UnknownIntent(intent.to_owned()))?;
        let spec = self
            .plans
            .get(&def.plan)
            .ok_or_else(|| EngineError::UnknownIntent(intent.to_owned()))?;
        let mut slot_values = BTreeMap::new();
        let mut session_filled = Vec::new();
        for slot in spec.required_slots() {
            if let Some(v) = slots.get(slot) {
                slot_values.insert(slot.to_owned(), v.clone());
                continue;
            }
            let focus = match def.slot_type(slot) {
                Some(DISEASE_SLOT_TYPE) => session.focus_disease.as_ref(),
                Some(GENE_SLOT_TYPE) => session.focus_gene.as_ref(),
                _ => None,
            };
            match focus {
                Some((_, value)) => {
                    slot_values.insert(slot.to_owned(), value.clone());
                    session_filled.push(slot.to_owned());
                }
                None => return Err(EngineError::MissingSlot(slot.to_owned())),
            }
        }
        Ok(QueryPlan {
            id: spec.id.clone(),
            intent: intent.to_owned(),
            layers: spec.layers.clone(),
            postprocess: spec.postprocess,
            slot_values,
            session_filled,
        })
    }
}
