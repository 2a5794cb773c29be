use std::collections::BTreeSet;

use crate::query_engine::{IntentResult, QueryPlan};
use crate::triple_store::ResultTable;

pub const DEFAULT_SPOKEN_LIMIT: usize = 5;

/// Joins items as spoken English, capping the list at `limit` names
/// followed by "and N more".
pub fn spoken_list(items: &[String], limit: usize) -> String {
    let limit = limit.max(1);
    if items.len() > limit {
        let shown = items[..limit].join(", ");
        return format!("{shown} and {} more", items.len() - limit);
    }
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

fn column(table: &ResultTable, var: &str) -> Vec<String> {
    let mut seen = BTreeSet::new();
    table
        .values(var)
        .map(|t| t.lexical().to_owned())
        .filter(|v| seen.insert(v.clone()))
        .collect()
}

fn cell(table: &ResultTable, row: usize, var: &str) -> String {
    table.get(row, var).map(|t| t.lexical().to_owned()).unwrap_or_default()
}

fn pubmed_id(paper: &str) -> &str {
    paper.rsplit(['/', ':']).next().unwrap_or(paper)
}

fn plural(n: usize, one: &str, many: &str) -> String {
    if n == 1 {
        format!("1 {one}")
    } else {
        format!("{n} {many}")
    }
}

/// Turns a plan result into the sentence read back to the user.
pub fn render_text(result: &IntentResult, plan: &QueryPlan, spoken_limit: usize) -> String {
    let t = &result.table;
    let slot = |name: &str| plan.slot_values.get(name).cloned().unwrap_or_default();
    let disease = slot("disease");
    let gene = slot("gene");
    match plan.id.as_str() {
        "definition" => {
            if t.is_empty() {
                return format!("I couldn't find a definition for {disease}.");
            }
            format!(
                "{disease} has Disease Ontology ID {} and UMLS identifier {}. {}",
                cell(t, 0, "doid"),
                cell(t, 0, "cui"),
                cell(t, 0, "description")
            )
        }
        "genes_for_disease" => {
            let genes = column(t, "geneSymbol");
            if genes.is_empty() {
                return format!("I found no genes associated with {disease}.");
            }
            format!("The genes associated with {disease} are {}.", spoken_list(&genes, spoken_limit))
        }
        "diseases_for_gene" => {
            let diseases = column(t, "diseaseName");
            if diseases.is_empty() {
                return format!("I found no diseases associated with {gene}.");
            }
            format!("{gene} is associated with {}.", spoken_list(&diseases, spoken_limit))
        }
        "diseases_for_protein_class" => {
            let class = slot("proteinClass");
            let diseases = column(t, "diseaseName");
            if diseases.is_empty() {
                return format!("I found no diseases associated with the protein class {class}.");
            }
            format!(
                "Diseases associated with {class} genes are {}.",
                spoken_list(&diseases, spoken_limit)
            )
        }
        "common_genes" => {
            if t.is_empty() {
                return "I found no genes shared by several diseases.".to_owned();
            }
            let items: Vec<String> = (0..t.len())
                .map(|r| format!("{} with {} diseases", cell(t, r, "geneSymbol"), cell(t, r, "diseases")))
                .collect();
            format!("Genes associated with several diseases are {}.", spoken_list(&items, spoken_limit))
        }
        "publication_count" => {
            let n: usize = t.get(0, "publications").and_then(|v| v.lexical().parse().ok()).unwrap_or(0);
            if n == 0 {
                return format!("I found no publications supporting the association between {gene} and {disease}.");
            }
            let verb = if n == 1 { "is" } else { "are" };
            format!(
                "There {verb} {} supporting the association between {gene} and {disease}.",
                plural(n, "publication", "publications")
            )
        }
        "evidence" => {
            if t.is_empty() {
                return format!("I found no evidence linking {gene} to {disease}.");
            }
            let papers = column(t, "paper").len();
            format!(
                "One excerpt supporting {gene} and {disease}, from PubMed {}: \"{}\" I found {} in total.",
                pubmed_id(&cell(t, 0, "paper")),
                cell(t, 0, "sentence"),
                plural(papers, "supporting article", "supporting articles")
            )
        }
        "disease_evidence" => {
            if t.is_empty() {
                return format!("I found no evidence about {disease}.");
            }
            format!(
                "The strongest evidence about {disease} involves {}, from PubMed {}: \"{}\"",
                cell(t, 0, "geneSymbol"),
                pubmed_id(&cell(t, 0, "paper")),
                cell(t, 0, "sentence")
            )
        }
        "top_associations" => {
            if t.is_empty() {
                return "I found no gene-disease associations.".to_owned();
            }
            let items: Vec<String> = (0..t.len())
                .map(|r| {
                    let n: usize = cell(t, r, "publications").parse().unwrap_or(0);
                    format!(
                        "{} and {} with {}",
                        cell(t, r, "geneSymbol"),
                        cell(t, r, "dName"),
                        plural(n, "publication", "publications")
                    )
                })
                .collect();
            let mut text = format!(
                "The top gene-disease associations by publication count are {}.",
                spoken_list(&items, spoken_limit)
            );
            if result.truncated {
                text.push_str(&format!(" I kept the top {}.", t.len()));
            }
            text
        }
        "related_diseases" => {
            let via = result
                .layer_tables
                .get(1)
                .map(|l| cell(l, 0, "geneSymbol"))
                .unwrap_or_default();
            let diseases: Vec<String> = column(t, "diseaseName").into_iter().filter(|d| *d != disease).collect();
            if diseases.is_empty() {
                return format!("I found no diseases related to {disease}.");
            }
            format!(
                "Through its top gene {via}, {disease} is related to {}.",
                spoken_list(&diseases, spoken_limit)
            )
        }
        other => {
            let rows = plural(t.len(), "result", "results");
            format!("The {other} query returned {rows}.")
        }
    }
}

fn is_gene_symbol(word: &str) -> bool {
    let mut chars = word.chars();
    word.len() >= 2
        && chars.next().is_some_and(|c| c.is_ascii_uppercase())
        && chars.all(|c| c.is_ascii_uppercase() || c.is_ascii_digit())
}

fn escape_xml(text: &str, out: &mut String) {
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if is_xml_char(c) => out.push(c),
            _ => {}
        }
    }
}

fn is_xml_char(c: char) -> bool {
    matches!(c, '\t' | '\n' | '\r' | '\u{20}'..='\u{D7FF}' | '\u{E000}'..='\u{FFFD}' | '\u{10000}'..)
}

/// Wraps escaped text in `<speak>`; symbol-like words are spelled out.
pub fn render_ssml(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 16);
    out.push_str("<speak>");
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        let alnum = c.is_alphanumeric();
        let end = rest.find(|ch: char| ch.is_alphanumeric() != alnum).unwrap_or(rest.len());
        let (run, tail) = rest.split_at(end);
        if alnum && is_gene_symbol(run) {
            out.push_str("<say-as interpret-as=\"spell-out\">");
            out.push_str(run);
            out.push_str("</say-as>");
        } else {
            escape_xml(run, &mut out);
        }
        rest = tail;
    }
    out.push_str("</speak>");
    out
}
