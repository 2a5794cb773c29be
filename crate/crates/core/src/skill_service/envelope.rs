use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const ENVELOPE_VERSION: &str = "1.0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillRequest {
    pub version: String,
    pub session: SessionInfo,
    pub request: RequestBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionInfo {
    pub new: bool,
    pub session_id: String,
    #[serde(default)]
    pub attributes: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum RequestBody {
    LaunchRequest {
        #[serde(flatten)]
        meta: RequestMeta,
    },
    IntentRequest {
        #[serde(flatten)]
        meta: RequestMeta,
        intent: IntentPayload,
    },
    SessionEndedRequest {
        #[serde(flatten)]
        meta: RequestMeta,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reason: Option<String>,
    },
    /// Any request type this skill does not handle.
    #[serde(other)]
    Unsupported,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RequestMeta {
    #[serde(default)]
    pub request_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentPayload {
    pub name: String,
    #[serde(default)]
    pub slots: BTreeMap<String, SlotPayload>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotPayload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
}

impl SkillRequest {
    pub fn intent(session_id: &str, attributes: BTreeMap<String, Value>, new: bool, request_id: String, intent: IntentPayload) -> Self {
        Self {
            version: ENVELOPE_VERSION.to_owned(),
            session: SessionInfo { new, session_id: session_id.to_owned(), attributes },
            request: RequestBody::IntentRequest { meta: RequestMeta { request_id, timestamp: None }, intent },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnvelopeError {
    #[error("malformed envelope: {0}")]
    Malformed(String),
    #[error("unsupported envelope version '{0}'")]
    Version(String),
    #[error("intent request has an empty intent name")]
    EmptyIntentName,
}

/// Decodes and checks a webhook request body.
pub fn decode_request(body: &str) -> Result<SkillRequest, EnvelopeError> {
    let req: SkillRequest = serde_json::from_str(body).map_err(|e| EnvelopeError::Malformed(e.to_string()))?;
    if req.version != ENVELOPE_VERSION {
        return Err(EnvelopeError::Version(req.version));
    }
    if let RequestBody::IntentRequest { intent, .. } = &req.request {
        if intent.name.trim().is_empty() {
            return Err(EnvelopeError::EmptyIntentName);
        }
    }
    Ok(req)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SkillResponse {
    pub version: String,
    pub session_attributes: BTreeMap<String, Value>,
    pub response: ResponseBody,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResponseBody {
    pub output_speech: OutputSpeech,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reprompt: Option<Reprompt>,
    pub should_end_session: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpeech {
    #[serde(rename = "type")]
    pub kind: String,
    pub text: String,
    pub ssml: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Reprompt {
    pub output_speech: RepromptSpeech,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepromptSpeech {
    #[serde(rename = "type")]
    pub kind: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub code: String,
    pub message: String,
}

impl SkillResponse {
    pub fn text(&self) -> &str {
        &self.response.output_speech.text
    }

    pub fn ssml(&self) -> &str {
        &self.response.output_speech.ssml
    }

    /// The exact bytes the webhook sends for this response.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("response serializes")
    }
}
