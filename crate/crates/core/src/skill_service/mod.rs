//! Alexa-compatible webhook, conversational route, printers and SSML.

mod envelope;
mod http;
mod render;
mod session;
mod skill;

pub use envelope::{
    decode_request, EnvelopeError, ErrorInfo, IntentPayload, OutputSpeech, Reprompt, RepromptSpeech, RequestBody,
    RequestMeta, ResponseBody, SessionInfo, SkillRequest, SkillResponse, SlotPayload, ENVELOPE_VERSION,
};
#[cfg(feature = "console")]
pub use http::{serve_skill_with_console, with_console};
pub use http::{serve_skill, skill_router};
pub use render::{render_ssml, render_text, spoken_list, DEFAULT_SPOKEN_LIMIT};
pub use session::SessionState;
pub use skill::{ConverseResult, Skill, SkillConfig, SkillError, FALLBACK_INTENT, REPROMPT};
