use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::Serialize;
use serde_json::value::RawValue;

use super::envelope::{
    ErrorInfo, IntentPayload, OutputSpeech, Reprompt, RepromptSpeech, RequestBody, ResponseBody, SkillRequest,
    SkillResponse, SlotPayload, ENVELOPE_VERSION,
};
use super::render::{render_ssml, render_text, DEFAULT_SPOKEN_LIMIT};
use super::session::SessionState;
use crate::interaction_model::{
    compile, CompiledMatcher, InteractionModel, ModelError, CANCEL_INTENT, HELP_INTENT, STOP_INTENT,
};
use crate::nlu_matcher::{match_utterance, normalize, resolve_slot, SlotResolution};
use crate::query_engine::{
    execute_plan, Backend, Budget, Catalogue, EngineError, DISEASE_SLOT_TYPE, GENE_SLOT_TYPE,
};

pub const FALLBACK_INTENT: &str = "AMAZON.FallbackIntent";
pub const REPROMPT: &str = "What else would you like to know?";

#[derive(Debug, Clone, Copy)]
pub struct SkillConfig {
    pub budget: Budget,
    pub spoken_limit: usize,
}

impl Default for SkillConfig {
    fn default() -> Self {
        Self { budget: Budget::default(), spoken_limit: DEFAULT_SPOKEN_LIMIT }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SkillError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("query catalogue is inconsistent: {}", .0.join("; "))]
    Catalogue(Vec<String>),
}

/// Result of one conversational turn, envelopes included verbatim.
#[derive(Debug, Serialize)]
pub struct ConverseResult {
    pub answer: String,
    pub ssml: String,
    pub intent: Option<String>,
    pub slots: BTreeMap<String, SlotResolution>,
    pub request: Box<RawValue>,
    pub response: Box<RawValue>,
}

type SessionSlot = Arc<tokio::sync::Mutex<SessionState>>;

/// The skill backend: shared immutable model, matcher and catalogue plus a
/// per-session state store.
pub struct Skill {
    model: InteractionModel,
    matcher: CompiledMatcher,
    catalogue: Catalogue,
    backend: Backend,
    config: SkillConfig,
    sessions: Mutex<HashMap<String, SessionSlot>>,
    request_seq: AtomicU64,
}

struct Answer {
    text: String,
    end: bool,
    error: Option<ErrorInfo>,
}

impl Answer {
    fn say(text: impl Into<String>) -> Self {
        Self { text: text.into(), end: false, error: None }
    }

    fn apology(text: impl Into<String>, code: &str, message: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            end: false,
            error: Some(ErrorInfo { code: code.to_owned(), message: message.into() }),
        }
    }
}

impl Skill {
    pub fn new(
        model: InteractionModel,
        catalogue: Catalogue,
        backend: Backend,
        config: SkillConfig,
    ) -> Result<Self, SkillError> {
        let matcher = compile(&model)?;
        let problems = catalogue.problems(Some(&model));
        if !problems.is_empty() {
            return Err(SkillError::Catalogue(problems));
        }
        Ok(Self {
            model,
            matcher,
            catalogue,
            backend,
            config,
            sessions: Mutex::new(HashMap::new()),
            request_seq: AtomicU64::new(0),
        })
    }

    pub fn model(&self) -> &InteractionModel {
        &self.model
    }

    pub fn matcher(&self) -> &CompiledMatcher {
        &self.matcher
    }

    pub fn catalogue(&self) -> &Catalogue {
        &self.catalogue
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn greeting(&self) -> String {
        format!(
            "Welcome to {}. You can ask me about diseases, the genes associated with them and the evidence behind those associations. What would you like to know?",
            self.model.invocation_name
        )
    }

    pub fn help_text(&self) -> String {
        "You can ask me what a disease is, what genes are associated with a disease, which diseases are associated with a gene, \
         which diseases are associated with a protein class, which genes are associated with several diseases, \
         how many publications support a gene and disease association, what evidence links a gene to a disease, \
         or what the top gene-disease associations are."
            .to_owned()
    }

    /// Webhook entry point. Never fails: errors become apologies with an
    /// `error` diagnostic.
    pub async fn handle_request(&self, req: &SkillRequest) -> SkillResponse {
        let mut state = SessionState::from_attributes(&req.session.attributes);
        let answer = match &req.request {
            RequestBody::LaunchRequest { .. } => Answer::say(self.greeting()),
            RequestBody::SessionEndedRequest { .. } => Answer { text: String::new(), end: true, error: None },
            RequestBody::Unsupported => Answer::apology(
                "Sorry, I can't handle that kind of request.",
                "UnsupportedRequest",
                "request type is not supported",
            ),
            RequestBody::IntentRequest { intent, .. } => self.answer_intent(intent, &mut state).await,
        };
        state.turn_count += 1;
        let reprompt = (!answer.end).then(|| Reprompt {
            output_speech: RepromptSpeech { kind: "PlainText".into(), text: REPROMPT.into() },
        });
        SkillResponse {
            version: ENVELOPE_VERSION.to_owned(),
            session_attributes: state.attributes_json(),
            response: ResponseBody {
                output_speech: OutputSpeech { kind: "SSML".into(), ssml: render_ssml(&answer.text), text: answer.text },
                reprompt,
                should_end_session: answer.end,
            },
            error: answer.error,
        }
    }

    async fn answer_intent(&self, intent: &IntentPayload, state: &mut SessionState) -> Answer {
        match intent.name.as_str() {
            STOP_INTENT | CANCEL_INTENT => return Answer { text: "Goodbye.".into(), end: true, error: None },
            HELP_INTENT => return Answer::say(self.help_text()),
            FALLBACK_INTENT => {
                return Answer::say("Sorry, I didn't understand that. Say help to hear what I can answer.")
            }
            _ => {}
        }
        let Some(def) = self.model.intent(&intent.name) else {
            return Answer::apology(
                "Sorry, I can't answer that yet.",
                "UnknownIntent",
                format!("intent '{}' is not in the model", intent.name),
            );
        };

        let mut slot_values = BTreeMap::new();
        for (name, payload) in &intent.slots {
            let Some(raw) = payload.value.as_deref().filter(|v| !v.trim().is_empty()) else {
                continue;
            };
            let Some(slot_type) = def.slot_type(name) else {
                continue;
            };
            let resolution = match self.matcher.index(slot_type) {
                Some(index) => resolve_slot(index, raw),
                None => continue,
            };
            let (Some(id), Some(value)) = (resolution.entity_id, resolution.canonical_value) else {
                return Answer::apology(
                    format!("Sorry, I don't know the {name} {raw}."),
                    "UnresolvedSlot",
                    format!("no {slot_type} entry matches '{raw}'"),
                );
            };
            match slot_type {
                DISEASE_SLOT_TYPE => state.focus_disease = Some((id, value.clone())),
                GENE_SLOT_TYPE => state.focus_gene = Some((id, value.clone())),
                _ => {}
            }
            slot_values.insert(name.clone(), value);
        }

        let plan = match self.catalogue.plan_for_intent(&self.model, &intent.name, &slot_values, state) {
            Ok(plan) => plan,
            Err(e) => return apology_for(&e),
        };
        match execute_plan(&self.catalogue, &plan, &self.backend, self.config.budget).await {
            Ok(result) => Answer::say(render_text(&result, &plan, self.config.spoken_limit)),
            Err(e) => {
                tracing::warn!(plan = %plan.id, error = %e, "plan failed");
                apology_for(&e)
            }
        }
    }

    fn session(&self, session_id: &str) -> SessionSlot {
        let mut sessions = self.sessions.lock().expect("session map poisoned");
        sessions.entry(session_id.to_owned()).or_default().clone()
    }

    /// Runs NLU on `text`, handles the resulting intent request against the
    /// stored session and returns both envelopes. Turns on one session are
    /// serialized.
    pub async fn converse(&self, session_id: &str, text: &str) -> ConverseResult {
        let slot = self.session(session_id);
        let mut state = slot.lock().await;

        let matched = match_utterance(&self.matcher, &normalize(text));
        let (intent_name, slots) = match &matched {
            Some(m) => (m.intent.clone(), m.slots.clone()),
            None => (FALLBACK_INTENT.to_owned(), BTreeMap::new()),
        };
        let payload = IntentPayload {
            name: intent_name,
            slots: slots
                .iter()
                .map(|(name, r)| {
                    (name.clone(), SlotPayload { name: Some(name.clone()), value: Some(r.raw_span.clone()) })
                })
                .collect(),
        };
        let seq = self.request_seq.fetch_add(1, Ordering::Relaxed);
        let request = SkillRequest::intent(
            session_id,
            state.attributes_json(),
            state.turn_count == 0,
            format!("kgvb.request.{seq}"),
            payload,
        );
        let response = self.handle_request(&request).await;
        *state = SessionState::from_attributes(&response.session_attributes);

        let request_json = serde_json::to_string(&request).expect("request serializes");
        ConverseResult {
            answer: response.text().to_owned(),
            ssml: response.ssml().to_owned(),
            intent: matched.map(|m| m.intent),
            slots,
            request: RawValue::from_string(request_json).expect("valid JSON"),
            response: RawValue::from_string(response.to_json()).expect("valid JSON"),
        }
    }

    /// Current state of a session, if it has been used.
    pub async fn session_state(&self, session_id: &str) -> Option<SessionState> {
        let slot = self.sessions.lock().expect("session map poisoned").get(session_id).cloned()?;
        let state = slot.lock().await.clone();
        Some(state)
    }
}

fn apology_for(e: &EngineError) -> Answer {
    let text = match e {
        EngineError::MissingSlot(slot) => format!("Sorry, I need to know which {slot} you mean."),
        EngineError::UnknownIntent(_) => "Sorry, I can't answer that yet.".to_owned(),
        EngineError::LayerBudgetExceeded { .. } => {
            "Sorry, answering that needs more query steps than I'm allowed to run.".to_owned()
        }
        EngineError::TimeBudgetExceeded { .. } => "Sorry, the knowledge graph took too long to answer.".to_owned(),
        EngineError::EmptyLayerResult { .. } => "Sorry, I couldn't find enough information to answer that.".to_owned(),
        _ => "Sorry, something went wrong while querying the knowledge graph.".to_owned(),
    };
    Answer::apology(text, e.code(), e.to_string())
}
