use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Conversation focus carried between turns in the session attributes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionState {
    /// (entity id, canonical title)
    pub focus_disease: Option<(String, String)>,
    /// (entity id, symbol)
    pub focus_gene: Option<(String, String)>,
    pub turn_count: u64,
}

const DISEASE_ID: &str = "focusDiseaseId";
const DISEASE_TITLE: &str = "focusDiseaseTitle";
const GENE_ID: &str = "focusGeneId";
const GENE_SYMBOL: &str = "focusGeneSymbol";
const TURN_COUNT: &str = "turnCount";

impl SessionState {
    /// Encodes the state as string-valued session attributes.
    pub fn to_attributes(&self) -> BTreeMap<String, String> {
        let mut attrs = BTreeMap::new();
        if let Some((id, title)) = &self.focus_disease {
            attrs.insert(DISEASE_ID.to_owned(), id.clone());
            attrs.insert(DISEASE_TITLE.to_owned(), title.clone());
        }
        if let Some((id, symbol)) = &self.focus_gene {
            attrs.insert(GENE_ID.to_owned(), id.clone());
            attrs.insert(GENE_SYMBOL.to_owned(), symbol.clone());
        }
        attrs.insert(TURN_COUNT.to_owned(), self.turn_count.to_string());
        attrs
    }

    /// Decodes attributes leniently: unknown keys are ignored and a focus
    /// needs both its id and title to be present.
    pub fn from_attributes(attrs: &BTreeMap<String, serde_json::Value>) -> Self {
        let text = |key: &str| attrs.get(key).and_then(|v| v.as_str()).map(str::to_owned);
        let pair = |a: &str, b: &str| Some((text(a)?, text(b)?));
        let turn_count = match attrs.get(TURN_COUNT) {
            Some(serde_json::Value::String(s)) => s.parse().unwrap_or(0),
            Some(serde_json::Value::Number(n)) => n.as_u64().unwrap_or(0),
            _ => 0,
        };
        Self {
            focus_disease: pair(DISEASE_ID, DISEASE_TITLE),
            focus_gene: pair(GENE_ID, GENE_SYMBOL),
            turn_count,
        }
    }

    pub fn attributes_json(&self) -> BTreeMap<String, serde_json::Value> {
        self.to_attributes().into_iter().map(|(k, v)| (k, serde_json::Value::String(v))).collect()
    }
}
