//! Interaction model: intents, sample utterances, slot types and the
//! compiled matcher built from them.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::nlu_matcher::normalize;

pub const STOP_INTENT: &str = "AMAZON.StopIntent";
pub const CANCEL_INTENT: &str = "AMAZON.CancelIntent";
pub const HELP_INTENT: &str = "AMAZON.HelpIntent";

/// Built-in intents and their fixed sample utterance.
pub const BUILTIN_INTENTS: [(&str, &str); 3] = [(STOP_INTENT, "stop"), (CANCEL_INTENT, "cancel"), (HELP_INTENT, "help")];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlotEntry {
    pub id: String,
    pub value: String,
    pub synonyms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlotType {
    pub name: String,
    pub entries: Vec<SlotEntry>,
    /// Gazetteer file still to be merged into `entries` (relative to the model file).
    #[serde(skip)]
    pub values_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Token {
    Literal(String),
    SlotRef(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UtterancePattern {
    pub tokens: Vec<Token>,
}

impl UtterancePattern {
    pub fn literal_count(&self) -> usize {
        self.tokens.iter().filter(|t| matches!(t, Token::Literal(_))).count()
    }

    pub fn slot_refs(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().filter_map(|t| match t {
            Token::SlotRef(s) => Some(s.as_str()),
            Token::Literal(_) => None,
        })
    }
}

impl fmt::Display for UtterancePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match t {
                Token::Literal(w) => f.write_str(w)?,
                Token::SlotRef(s) => write!(f, "{{{s}}}")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlotDef {
    pub name: String,
    pub slot_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntentDef {
    pub name: String,
    pub slots: Vec<SlotDef>,
    pub samples: Vec<UtterancePattern>,
    /// Query plan triggered by the intent; empty for built-ins.
    pub plan: String,
}

impl IntentDef {
    pub fn slot_type(&self, slot: &str) -> Option<&str> {
        self.slots.iter().find(|s| s.name == slot).map(|s| s.slot_type.as_str())
    }

    pub fn is_builtin(&self) -> bool {
        is_builtin(&self.name)
    }
}

pub fn is_builtin(intent: &str) -> bool {
    BUILTIN_INTENTS.iter().any(|(name, _)| *name == intent)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InteractionModel {
    pub invocation_name: String,
    pub intents: Vec<IntentDef>,
    pub slot_types: Vec<SlotType>,
}

impl InteractionModel {
    pub fn intent(&self, name: &str) -> Option<&IntentDef> {
        self.intents.iter().find(|i| i.name == name)
    }

    pub fn slot_type(&self, name: &str) -> Option<&SlotType> {
        self.slot_types.iter().find(|s| s.name == name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    MalformedJson { line: usize, column: usize, message: String },
    #[error("unknown field '{0}'")]
    UnknownField(String),
    #[error("field '{path}' must be {expected}")]
    InvalidField { path: String, expected: &'static str },
    #[error("bad placeholder in utterance '{utterance}': {reason}")]
    BadPlaceholder { utterance: String, reason: String },
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("slot file {path} declares type '{found}', expected '{expected}'")]
    SlotFileMismatch { path: String, expected: String, found: String },
    #[error("model has {} violation(s); first: {}", .0.len(), .0[0])]
    CompileOnInvalidModel(Vec<Violation>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ViolationCode {
    EmptyInvocationName,
    InvocationNameNotLowercase,
    InvalidIdentifier,
    DuplicateIntentName,
    DuplicateSlotTypeName,
    DuplicateSlotName,
    UnknownSlotType,
    UndeclaredSlot,
    AdjacentSlots,
    EmptyUtterance,
    EmptyLiteral,
    EmptyCanonicalValue,
    DuplicateEntityId,
    EmptySynonym,
    DuplicateSurfaceForm,
    BuiltinRedefined,
    BuiltinWithSlots,
    MissingPlan,
    UnloadedValuesFile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at {}: {}", self.code, self.path, self.message)
    }
}

// ---------------------------------------------------------------------------
// Parsing

/// Parses the model JSON. Built-in intents are appended after the declared
/// intents. Slot types that name a `valuesFile` keep it pending; use
/// [`load_model`] to resolve those from disk.
pub fn parse_model(doc: &str) -> Result<InteractionModel, ModelError> {
    let root: Value = serde_json::from_str(doc).map_err(|e| ModelError::MalformedJson {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let obj = object(&root, "$")?;
    check_fields(obj, "$", &["invocationName", "intents", "slotTypes"])?;
    let invocation_name = string(required(obj, "$", "invocationName")?, "$.invocationName")?.to_owned();

    let mut intents = Vec::new();
    for (i, item) in array(required(obj, "$", "intents")?, "$.intents")?.iter().enumerate() {
        let path = format!("$.intents[{i}]");
        let o = object(item, &path)?;
        check_fields(o, &path, &["name", "slots", "samples", "plan"])?;
        let name = string(required(o, &path, "name")?, &format!("{path}.name"))?.to_owned();
        let mut slots = Vec::new();
        if let Some(v) = o.get("slots") {
            for (j, s) in array(v, &format!("{path}.slots"))?.iter().enumerate() {
                let sp = format!("{path}.slots[{j}]");
                let so = object(s, &sp)?;
                check_fields(so, &sp, &["name", "type"])?;
                slots.push(SlotDef {
                    name: string(required(so, &sp, "name")?, &format!("{sp}.name"))?.to_owned(),
                    slot_type: string(required(so, &sp, "type")?, &format!("{sp}.type"))?.to_owned(),
                });
            }
        }
        let mut samples = Vec::new();
        for (j, s) in array(required(o, &path, "samples")?, &format!("{path}.samples"))?.iter().enumerate() {
            samples.push(parse_utterance(string(s, &format!("{path}.samples[{j}]"))?)?);
        }
        let plan = match o.get("plan") {
            Some(v) => string(v, &format!("{path}.plan"))?.to_owned(),
            None => String::new(),
        };
        intents.push(IntentDef { name, slots, samples, plan });
    }
    for (name, sample) in BUILTIN_INTENTS {
        intents.push(IntentDef {
            name: name.to_owned(),
            slots: Vec::new(),
            samples: vec![parse_utterance(sample)?],
            plan: String::new(),
        });
    }

    let mut slot_types = Vec::new();
    if let Some(v) = obj.get("slotTypes") {
        for (i, item) in array(v, "$.slotTypes")?.iter().enumerate() {
            let path = format!("$.slotTypes[{i}]");
            let o = object(item, &path)?;
            check_fields(o, &path, &["name", "values", "valuesFile"])?;
            let name = string(required(o, &path, "name")?, &format!("{path}.name"))?.to_owned();
            let entries = match o.get("values") {
                Some(v) => parse_entries(v, &format!("{path}.values"))?,
                None => Vec::new(),
            };
            let values_file = match o.get("valuesFile") {
                Some(v) => Some(string(v, &format!("{path}.valuesFile"))?.to_owned()),
                None => None,
            };
            slot_types.push(SlotType { name, entries, values_file });
        }
    }
    Ok(InteractionModel { invocation_name, intents, slot_types })
}

/// Parses a standalone gazetteer document `{"name": str, "values": [...]}`.
pub fn parse_slot_type(doc: &str) -> Result<SlotType, ModelError> {
    let root: Value = serde_json::from_str(doc).map_err(|e| ModelError::MalformedJson {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let o = object(&root, "$")?;
    check_fields(o, "$", &["name", "values"])?;
    Ok(SlotType {
        name: string(required(o, "$", "name")?, "$.name")?.to_owned(),
        entries: parse_entries(required(o, "$", "values")?, "$.values")?,
        values_file: None,
    })
}

/// Reads a model file and merges every referenced gazetteer file.
pub fn load_model(path: impl AsRef<Path>) -> Result<InteractionModel, ModelError> {
    let path = path.as_ref();
    let text = read(path)?;
    let mut model = parse_model(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    for slot_type in &mut model.slot_types {
        if let Some(file) = slot_type.values_file.take() {
            let file_path = base.join(&file);
            let loaded = parse_slot_type(&read(&file_path)?)?;
            if loaded.name != slot_type.name {
                return Err(ModelError::SlotFileMismatch {
                    path: file_path.display().to_string(),
                    expected: slot_type.name.clone(),
                    found: loaded.name,
                });
            }
            slot_type.entries.extend(loaded.entries);
        }
    }
    Ok(model)
}

fn read(path: &Path) -> Result<String, ModelError> {
    std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_entries(v: &Value, path: &str) -> Result<Vec<SlotEntry>, ModelError> {
    let mut entries = Vec::new();
    for (i, item) in array(v, path)?.iter().enumerate() {
        let ep = format!("{path}[{i}]");
        let o = object(item, &ep)?;
        check_fields(o, &ep, &["id", "value", "synonyms"])?;
        let mut synonyms = Vec::new();
        if let Some(s) = o.get("synonyms") {
            for (j, syn) in array(s, &format!("{ep}.synonyms"))?.iter().enumerate() {
                synonyms.push(string(syn, &format!("{ep}.synonyms[{j}]"))?.to_owned());
            }
        }
        entries.push(SlotEntry {
            id: string(required(o, &ep, "id")?, &format!("{ep}.id"))?.to_owned(),
            value: string(required(o, &ep, "value")?, &format!("{ep}.value"))?.to_owned(),
            synonyms,
        });
    }
    Ok(entries)
}

/// Tokenizes a sample utterance; `{name}` spans become slot references.
pub fn parse_utterance(sample: &str) -> Result<UtterancePattern, ModelError> {
    let bad = |reason: &str| ModelError::BadPlaceholder {
        utterance: sample.to_owned(),
        reason: reason.to_owned(),
    };
    let mut tokens = Vec::new();
    let mut rest = sample;
    while !rest.is_empty() {
        let open = rest.find('{');
        let close = rest.find('}');
        match (open, close) {
            (None, None) => {
                push_literals(&mut tokens, rest);
                break;
            }
            (Some(o), Some(c)) if o < c => {
                push_literals(&mut tokens, &rest[..o]);
                let name = rest[o + 1..c].trim();
                if name.contains('{') {
                    return Err(bad("nested '{'"));
                }
                if name.is_empty() {
                    return Err(bad("empty slot name"));
                }
                if !is_identifier(name) {
                    return Err(bad("slot name is not an identifier"));
                }
                if matches!(tokens.last(), Some(Token::SlotRef(_))) {
                    return Err(bad("adjacent slots have no literal boundary"));
                }
                tokens.push(Token::SlotRef(name.to_owned()));
                rest = &rest[c + 1..];
            }
            _ => return Err(bad("unbalanced braces")),
        }
    }
    if tokens.is_empty() {
        return Err(bad("utterance has no tokens"));
    }
    Ok(UtterancePattern { tokens })
}

fn push_literals(tokens: &mut Vec<Token>, text: &str) {
    tokens.extend(normalize(text).tokens.into_iter().map(Token::Literal));
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, ModelError> {
    v.as_object().ok_or(ModelError::InvalidField { path: path.to_owned(), expected: "an object" })
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, ModelError> {
    v.as_array().ok_or(ModelError::InvalidField { path: path.to_owned(), expected: "an array" })
}

fn string<'a>(v: &'a Value, path: &str) -> Result<&'a str, ModelError> {
    v.as_str().ok_or(ModelError::InvalidField { path: path.to_owned(), expected: "a string" })
}

fn required<'a>(o: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a Value, ModelError> {
    o.get(key).ok_or(ModelError::InvalidField {
        path: format!("{path}.{key}"),
        expected: "present",
    })
}

fn check_fields(o: &Map<String, Value>, path: &str, allowed: &[&str]) -> Result<(), ModelError> {
    match o.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(ModelError::UnknownField(format!("{path}.{k}"))),
        None => Ok(()),
    }
}

// ---------------------------------------------------------------------------
// Validation

/// Checks every model invariant. An empty list means the model compiles.
pub fn validate(model: &InteractionModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |code, path: String, message: String| out.push(Violation { code, path, message });

    if model.invocation_name.trim().is_empty() {
        push(ViolationCode::EmptyInvocationName, "$.invocationName".into(), "invocation name is empty".into());
    } else if model.invocation_name != model.invocation_name.to_lowercase() {
        push(
            ViolationCode::InvocationNameNotLowercase,
            "$.invocationName".into(),
            format!("'{}' must be lowercase", model.invocation_name),
        );
    }

    let mut type_names = HashSet::new();
    for (i, st) in model.slot_types.iter().enumerate() {
        let path = format!("$.slotTypes[{i}]");
        if !is_identifier(&st.name) {
            push(ViolationCode::InvalidIdentifier, format!("{path}.name"), format!("'{}' is not an identifier", st.name));
        }
        if !type_names.insert(st.name.as_str()) {
            push(ViolationCode::DuplicateSlotTypeName, format!("{path}.name"), format!("slot type '{}' declared twice", st.name));
        }
        if let Some(file) = &st.values_file {
            push(ViolationCode::UnloadedValuesFile, format!("{path}.valuesFile"), format!("'{file}' was not loaded"));
        }
        let mut ids = HashSet::new();
        let mut canonical_forms = HashSet::new();
        for (j, e) in st.entries.iter().enumerate() {
            let ep = format!("{path}.values[{j}]");
            let form = normalize(&e.value).joined();
            if form.is_empty() {
                push(ViolationCode::EmptyCanonicalValue, format!("{ep}.value"), "canonical value is empty".into());
            } else if !canonical_forms.insert(form.clone()) {
                push(
                    ViolationCode::DuplicateSurfaceForm,
                    format!("{ep}.value"),
                    format!("'{}' normalizes to the same form as another entry", e.value),
                );
            }
            if e.id.is_empty() || !ids.insert(e.id.as_str()) {
                push(ViolationCode::DuplicateEntityId, format!("{ep}.id"), format!("entity id '{}' is empty or repeated", e.id));
            }
            for (k, syn) in e.synonyms.iter().enumerate() {
                if normalize(syn).tokens.is_empty() {
                    push(ViolationCode::EmptySynonym, format!("{ep}.synonyms[{k}]"), "synonym is empty".into());
                }
            }
        }
    }

    let mut intent_names = HashSet::new();
    for (i, intent) in model.intents.iter().enumerate() {
        let path = format!("$.intents[{i}]");
        if !is_identifier(&intent.name) {
            push(ViolationCode::InvalidIdentifier, format!("{path}.name"), format!("'{}' is not an identifier", intent.name));
        }
        if !intent_names.insert(intent.name.as_str()) {
            push(ViolationCode::DuplicateIntentName, format!("{path}.name"), format!("intent '{}' declared twice", intent.name));
        }
        if let Some((_, sample)) = BUILTIN_INTENTS.iter().find(|(n, _)| *n == intent.name) {
            let fixed = parse_utterance(sample).expect("builtin sample");
            if !intent.plan.is_empty() || intent.samples != [fixed] {
                push(
                    ViolationCode::BuiltinRedefined,
                    path.clone(),
                    format!("built-in intent '{}' cannot be redefined", intent.name),
                );
            }
            if !intent.slots.is_empty() {
                push(ViolationCode::BuiltinWithSlots, format!("{path}.slots"), "built-in intents take no slots".into());
            }
        } else if intent.plan.is_empty() {
            push(ViolationCode::MissingPlan, format!("{path}.plan"), format!("intent '{}' has no plan", intent.name));
        }
        let mut slot_names = HashSet::new();
        for (j, slot) in intent.slots.iter().enumerate() {
            let sp = format!("{path}.slots[{j}]");
            if !is_identifier(&slot.name) {
                push(ViolationCode::InvalidIdentifier, format!("{sp}.name"), format!("'{}' is not an identifier", slot.name));
            }
            if !slot_names.insert(slot.name.as_str()) {
                push(ViolationCode::DuplicateSlotName, format!("{sp}.name"), format!("slot '{}' declared twice", slot.name));
            }
            if model.slot_type(&slot.slot_type).is_none() {
                push(ViolationCode::UnknownSlotType, format!("{sp}.type"), format!("slot type '{}' is not declared", slot.slot_type));
            }
        }
        for (j, sample) in intent.samples.iter().enumerate() {
            let sp = format!("{path}.samples[{j}]");
            if sample.tokens.is_empty() {
                push(ViolationCode::EmptyUtterance, sp.clone(), "utterance has no tokens".into());
            }
            for pair in sample.tokens.windows(2) {
                if matches!(pair, [Token::SlotRef(_), Token::SlotRef(_)]) {
                    push(ViolationCode::AdjacentSlots, sp.clone(), format!("'{sample}' has adjacent slots"));
                }
            }
            for token in &sample.tokens {
                match token {
                    Token::SlotRef(name) if intent.slot_type(name).is_none() => push(
                        ViolationCode::UndeclaredSlot,
                        sp.clone(),
                        format!("'{{{name}}}' is not declared by intent '{}'", intent.name),
                    ),
                    Token::Literal(w) if w.is_empty() => {
                        push(ViolationCode::EmptyLiteral, sp.clone(), "empty literal token".into())
                    }
                    _ => {}
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Compilation

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FormKind {
    Canonical,
    Synonym,
}

/// One indexed surface form of a gazetteer entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexedForm {
    pub entity_id: String,
    pub canonical_value: String,
    pub kind: FormKind,
}

/// Normalized surface form lookup for one slot type.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SlotIndex {
    pub canonical: BTreeMap<String, IndexedForm>,
    /// A synonym shared by several entries keeps every owner.
    pub synonyms: BTreeMap<String, Vec<IndexedForm>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompiledPattern {
    pub intent: String,
    pub pattern: UtterancePattern,
    pub literal_count: usize,
    /// slot name -> slot type name for the slots this pattern references.
    pub slot_types: BTreeMap<String, String>,
}

/// Immutable matcher produced by [`compile`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompiledMatcher {
    pub patterns: Vec<CompiledPattern>,
    pub slot_index: BTreeMap<String, SlotIndex>,
}

impl CompiledMatcher {
    pub fn index(&self, slot_type: &str) -> Option<&SlotIndex> {
        self.slot_index.get(slot_type)
    }
}

pub fn compile(model: &InteractionModel) -> Result<CompiledMatcher, ModelError> {
    let violations = validate(model);
    if !violations.is_empty() {
        return Err(ModelError::CompileOnInvalidModel(violations));
    }
    let mut patterns = Vec::new();
    for intent in &model.intents {
        for sample in &intent.samples {
            let slot_types = sample
                .slot_refs()
                .map(|s| (s.to_owned(), intent.slot_type(s).expect("validated").to_owned()))
                .collect();
            patterns.push(CompiledPattern {
                intent: intent.name.clone(),
                pattern: sample.clone(),
                literal_count: sample.literal_count(),
                slot_types,
            });
        }
    }
    let mut slot_index = BTreeMap::new();
    for st in &model.slot_types {
        let mut index = SlotIndex::default();
        for e in &st.entries {
            index.canonical.insert(
                normalize(&e.value).joined(),
                IndexedForm { entity_id: e.id.clone(), canonical_value: e.value.clone(), kind: FormKind::Canonical },
            );
        }
        for e in &st.entries {
            let forms: BTreeSet<String> = e.synonyms.iter().map(|s| normalize(s).joined()).collect();
            for form in forms {
                index.synonyms.entry(form).or_default().push(IndexedForm {
                    entity_id: e.id.clone(),
                    canonical_value: e.value.clone(),
                    kind: FormKind::Synonym,
                });
            }
        }
        slot_index.insert(st.name.clone(), index);
    }
    Ok(CompiledMatcher { patterns, slot_index })
}
