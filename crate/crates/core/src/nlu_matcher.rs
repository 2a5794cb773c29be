//! Utterance normalization, pattern alignment and slot resolution.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::interaction_model::{CompiledMatcher, FormKind, IndexedForm, SlotIndex, Token};

/// Normalized utterance: lowercase words without punctuation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TokenSeq {
    pub tokens: Vec<String>,
}

impl TokenSeq {
    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}')
}

/// Lowercases, maps everything but letters, digits and apostrophes to a
/// space, drops apostrophes and splits on whitespace.
pub fn normalize(text: &str) -> TokenSeq {
    let cleaned: String = text
        .to_lowercase()
        .chars()
        .filter(|c| !is_apostrophe(*c))
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    TokenSeq { tokens: cleaned.split_whitespace().map(str::to_owned).collect() }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MatchKind {
    Exact,
    Synonym,
    Fuzzy { distance: usize },
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SlotResolution {
    pub raw_span: String,
    pub entity_id: Option<String>,
    pub canonical_value: Option<String>,
    pub match_kind: MatchKind,
}

impl SlotResolution {
    pub fn is_resolved(&self) -> bool {
        self.entity_id.is_some()
    }

    fn unresolved(raw_span: &str) -> Self {
        Self {
            raw_span: raw_span.to_owned(),
            entity_id: None,
            canonical_value: None,
            match_kind: MatchKind::Unresolved,
        }
    }

    fn from_form(raw_span: &str, form: &IndexedForm, match_kind: MatchKind) -> Self {
        Self {
            raw_span: raw_span.to_owned(),
            entity_id: Some(form.entity_id.clone()),
            canonical_value: Some(form.canonical_value.clone()),
            match_kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchResult {
    pub intent: String,
    pub slots: BTreeMap<String, SlotResolution>,
    pub literal_count: usize,
    pub pattern_index: usize,
}

/// Fuzzy edit-distance budget for a span of `len` characters.
pub fn fuzzy_threshold(len: usize) -> usize {
    (len / 8).max(1)
}

/// Resolves a raw span against one slot type: exact canonical form, then
/// synonym, then a unique fuzzy minimizer within [`fuzzy_threshold`].
pub fn resolve_slot(index: &SlotIndex, raw_span: &str) -> SlotResolution {
    let key = normalize(raw_span).joined();
    if key.is_empty() {
        return SlotResolution::unresolved(raw_span);
    }
    if let Some(form) = index.canonical.get(&key) {
        return SlotResolution::from_form(raw_span, form, MatchKind::Exact);
    }
    if let Some(owners) = index.synonyms.get(&key) {
        return match owners.as_slice() {
            [form] => SlotResolution::from_form(raw_span, form, MatchKind::Synonym),
            _ => SlotResolution::unresolved(raw_span),
        };
    }

    let limit = fuzzy_threshold(key.chars().count());
    let mut best: Option<(usize, &IndexedForm)> = None;
    let mut ambiguous = false;
    let forms = index
        .canonical
        .iter()
        .chain(index.synonyms.iter().flat_map(|(k, fs)| fs.iter().map(move |f| (k, f))));
    for (form_key, form) in forms {
        let d = strsim::levenshtein(&key, form_key);
        if d > limit {
            continue;
        }
        match best {
            Some((bd, bf)) if d == bd => {
                if bf.entity_id != form.entity_id {
                    ambiguous = true;
                }
            }
            Some((bd, _)) if d > bd => {}
            _ => {
                best = Some((d, form));
                ambiguous = false;
            }
        }
    }
    match best {
        Some((distance, form)) if !ambiguous => {
            let kind = match (distance, form.kind) {
                (0, FormKind::Synonym) => MatchKind::Synonym,
                (0, FormKind::Canonical) => MatchKind::Exact,
                _ => MatchKind::Fuzzy { distance },
            };
            SlotResolution::from_form(raw_span, form, kind)
        }
        _ => SlotResolution::unresolved(raw_span),
    }
}

/// Aligns a pattern against the whole token sequence. Slot spans are tried
/// shortest first, backtracking when the remainder fails to align.
pub fn align(pattern: &[Token], tokens: &[String]) -> Option<Vec<(String, usize, usize)>> {
    let mut spans = Vec::new();
    align_from(pattern, tokens, 0, &mut spans).then_some(spans)
}

fn align_from(pattern: &[Token], tokens: &[String], at: usize, spans: &mut Vec<(String, usize, usize)>) -> bool {
    let Some((head, rest)) = pattern.split_first() else {
        return at == tokens.len();
    };
    match head {
        Token::Literal(w) => tokens.get(at) == Some(w) && align_from(rest, tokens, at + 1, spans),
        Token::SlotRef(name) => {
            let next_literal = match rest.first() {
                Some(Token::Literal(w)) => Some(w),
                _ => None,
            };
            for end in at + 1..=tokens.len() {
                if rest.is_empty() && end != tokens.len() {
                    continue;
                }
                if let Some(w) = next_literal {
                    if tokens.get(end) != Some(w) {
                        continue;
                    }
                }
                spans.push((name.clone(), at, end));
                if align_from(rest, tokens, end, spans) {
                    return true;
                }
                spans.pop();
            }
            false
        }
    }
}

/// Slot name with its token range.
type Spans = Vec<(String, usize, usize)>;

/// Picks the aligning pattern with the most literal tokens, breaking ties by
/// declaration order, and resolves its slot spans.
pub fn match_utterance(matcher: &CompiledMatcher, utterance: &TokenSeq) -> Option<MatchResult> {
    let mut best: Option<(usize, Spans)> = None;
    for (i, p) in matcher.patterns.iter().enumerate() {
        if let Some((bi, _)) = &best {
            if matcher.patterns[*bi].literal_count >= p.literal_count {
                continue;
            }
        }
        if let Some(spans) = align(&p.pattern.tokens, &utterance.tokens) {
            best = Some((i, spans));
        }
    }
    let (pattern_index, spans) = best?;
    let pattern = &matcher.patterns[pattern_index];
    let slots = spans
        .into_iter()
        .map(|(name, start, end)| {
            let raw = utterance.tokens[start..end].join(" ");
            let resolution = match pattern.slot_types.get(&name).and_then(|t| matcher.index(t)) {
                Some(index) => resolve_slot(index, &raw),
                None => SlotResolution::unresolved(&raw),
            };
            (name, resolution)
        })
        .collect();
    Some(MatchResult {
        intent: pattern.intent.clone(),
        slots,
        literal_count: pattern.literal_count,
        pattern_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction_model::{compile, parse_model};

    fn matcher() -> CompiledMatcher {
        let doc = r#"{
            "invocationName": "language team",
            "intents": [
                {"name": "DefinitionIntent", "slots": [{"name": "disease", "type": "DISEASE"}],
                 "samples": ["what is {disease}", "tell me about {disease}"], "plan": "definition"},
                {"name": "CausationIntent", "slots": [{"name": "disease", "type": "DISEASE"}],
                 "samples": ["what genes cause {disease}", "what genes cause it", "what {disease} genes cause"], "plan": "genes_for_disease"},
                {"name": "EvidenceIntent", "slots": [{"name": "gene", "type": "GENE"}, {"name": "disease", "type": "DISEASE"}],
                 "samples": ["evidence for {gene} and {disease}"], "plan": "evidence"}
            ],
            "slotTypes": [
                {"name": "DISEASE", "values": [
                    {"id": "umls:C0004096", "value": "Asthma", "synonyms": ["bronchial asthma"]},
                    {"id": "umls:C0006142", "value": "Breast Carcinoma", "synonyms": ["breast cancer"]},
                    {"id": "umls:C0002395", "value": "Alzheimer's Disease"},
                    {"id": "x:1", "value": "Lung Cancer A"},
                    {"id": "x:2", "value": "Lung Cancer B"}
                ]},
                {"name": "GENE", "values": [
                    {"id": "ncbigene:7124", "value": "TNF"},
                    {"id": "ncbigene:3586", "value": "IL10", "synonyms": ["and"]}
                ]}
            ]
        }"#;
        compile(&parse_model(doc).unwrap()).unwrap()
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize("  What's   ASTHMA?? ").tokens, ["whats", "asthma"]);
        assert_eq!(normalize("Alzheimer\u{2019}s-Disease").joined(), "alzheimers disease");
        assert_eq!(normalize("!!!").tokens, Vec::<String>::new());
        assert_eq!(normalize("IL-13, TP53").tokens, ["il", "13", "tp53"]);
    }

    #[test]
    fn exact_synonym_fuzzy() {
        let m = matcher();
        let idx = m.index("DISEASE").unwrap();
        assert_eq!(resolve_slot(idx, "asthma").match_kind, MatchKind::Exact);
        let r = resolve_slot(idx, "Breast Cancer");
        assert_eq!((r.match_kind, r.entity_id.as_deref()), (MatchKind::Synonym, Some("umls:C0006142")));
        let r = resolve_slot(idx, "asthmaa");
        assert_eq!((r.match_kind, r.entity_id.as_deref()), (MatchKind::Fuzzy { distance: 1 }, Some("umls:C0004096")));
        assert_eq!(resolve_slot(idx, "alzheimers disease").match_kind, MatchKind::Exact);
        assert_eq!(resolve_slot(idx, "diabetes").match_kind, MatchKind::Unresolved);
    }

    #[test]
    fn ambiguous_fuzzy_is_unresolved() {
        let m = matcher();
        let idx = m.index("DISEASE").unwrap();
        assert_eq!(resolve_slot(idx, "lung cancer c").match_kind, MatchKind::Unresolved);
        assert_eq!(resolve_slot(idx, "lung cancer b").entity_id.as_deref(), Some("x:2"));
    }

    #[test]
    fn fuzzy_threshold_floor() {
        assert_eq!(fuzzy_threshold(3), 1);
        assert_eq!(fuzzy_threshold(16), 2);
        assert_eq!(fuzzy_threshold(23), 2);
        assert_eq!(fuzzy_threshold(24), 3);
    }

    #[test]
    fn most_literals_wins() {
        let m = matcher();
        let r = match_utterance(&m, &normalize("What genes cause asthma?")).unwrap();
        assert_eq!(r.intent, "CausationIntent");
        assert_eq!(r.slots["disease"].entity_id.as_deref(), Some("umls:C0004096"));
        // "what is {disease}" would also align; the causation sample has more literals
        let r = match_utterance(&m, &normalize("what genes cause it")).unwrap();
        assert_eq!((r.intent.as_str(), r.slots.len()), ("CausationIntent", 0));
        assert_eq!(r.literal_count, 4);
    }

    #[test]
    fn backtracking_over_literal_inside_slot() {
        let m = matcher();
        // first "and" is the gene synonym, so the gene span must extend past it
        let r = match_utterance(&m, &normalize("evidence for tnf and asthma")).unwrap();
        assert_eq!(r.slots["gene"].raw_span, "tnf");
        assert_eq!(r.slots["disease"].raw_span, "asthma");
        let r = match_utterance(&m, &normalize("evidence for and and breast cancer")).unwrap();
        assert_eq!(r.slots["gene"].raw_span, "and");
        assert_eq!(r.slots["disease"].entity_id.as_deref(), Some("umls:C0006142"));
    }

    #[test]
    fn builtins_and_no_match() {
        let m = matcher();
        assert_eq!(match_utterance(&m, &normalize("Stop!")).unwrap().intent, "AMAZON.StopIntent");
        assert_eq!(match_utterance(&m, &normalize("help")).unwrap().intent, "AMAZON.HelpIntent");
        assert!(match_utterance(&m, &normalize("play some music")).is_none());
        assert!(match_utterance(&m, &normalize("")).is_none());
        // unresolved spans still match
        let r = match_utterance(&m, &normalize("what is gibberish")).unwrap();
        assert_eq!(r.slots["disease"].match_kind, MatchKind::Unresolved);
    }
}
