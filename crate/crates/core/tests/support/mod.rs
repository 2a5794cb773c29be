#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::Arc;

use kgvb_core::interaction_model::{load_model, InteractionModel};
use kgvb_core::query_engine::Catalogue;
use kgvb_core::triple_store::{parse_ntriples, TripleSet};

pub const SIO: &str = "http://semanticscience.org/resource/";
pub const DCT: &str = "http://purl.org/dc/terms/";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const NCIT_DISEASE: &str = "http://ncicb.nci.nih.gov/xml/owl/EVS/Thesaurus.owl#C7057";
pub const NCIT_GENE: &str = "http://ncicb.nci.nih.gov/xml/owl/EVS/Thesaurus.owl#C16612";

pub fn workspace() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixture_text() -> String {
    std::fs::read_to_string(workspace().join("fixtures/disgenet-mini.nt")).unwrap()
}

pub fn fixture() -> Arc<TripleSet> {
    Arc::new(parse_ntriples(&fixture_text()).unwrap())
}

pub fn model() -> InteractionModel {
    load_model(workspace().join("models/disease-skill.json")).unwrap()
}

pub fn catalogue() -> Catalogue {
    Catalogue::load(workspace().join("queries")).unwrap()
}

pub mod graphs;
pub mod xml;

/// Line-level view of the fixture, built by splitting the text rather than
/// through the store, so it can serve as an independent oracle.
pub struct Raw {
    pub triples: Vec<(String, String, String)>,
}

impl Raw {
    pub fn load() -> Self {
        let triples = fixture_text()
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .map(|l| {
                let l = l.trim().strip_suffix(" .").unwrap();
                let (s, rest) = l.split_once(' ').unwrap();
                let (p, o) = rest.split_once(' ').unwrap();
                (unwrap_iri(s), unwrap_iri(p), o.to_owned())
            })
            .collect();
        Self { triples }
    }

    pub fn objects(&self, s: &str, p: &str) -> Vec<String> {
        self.triples.iter().filter(|t| t.0 == s && t.1 == p).map(|t| t.2.clone()).collect()
    }

    pub fn subjects(&self, p: &str, o: &str) -> Vec<String> {
        self.triples.iter().filter(|t| t.1 == p && t.2 == o).map(|t| t.0.clone()).collect()
    }

    pub fn literal(&self, s: &str, p: &str) -> Option<String> {
        self.objects(s, p).first().map(|o| literal_value(o))
    }

    pub fn typed(&self, class: &str) -> BTreeSet<String> {
        self.subjects(RDF_TYPE, &format!("<{class}>")).into_iter().collect()
    }

    pub fn disease_by_title(&self, title: &str) -> String {
        let wanted = format!("\"{title}\"");
        self.typed(NCIT_DISEASE)
            .into_iter()
            .find(|d| self.objects(d, &format!("{DCT}title")).contains(&wanted))
            .unwrap()
    }

    pub fn gene_symbol(&self, gene: &str) -> Option<String> {
        let sym = self.objects(gene, &format!("{SIO}SIO_000205")).into_iter().next()?;
        self.literal(&unwrap_iri(&sym), &format!("{DCT}title"))
    }

    /// (gda, gene, disease) for every association linking a typed gene to a typed disease.
    pub fn associations(&self) -> Vec<(String, String, String)> {
        let genes = self.typed(NCIT_GENE);
        let diseases = self.typed(NCIT_DISEASE);
        let mut by_gda: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (s, p, o) in &self.triples {
            if *p == format!("{SIO}SIO_000628") {
                by_gda.entry(s.clone()).or_default().push(unwrap_iri(o));
            }
        }
        let mut out = Vec::new();
        for (gda, links) in by_gda {
            for g in links.iter().filter(|l| genes.contains(*l)) {
                for d in links.iter().filter(|l| diseases.contains(*l)) {
                    out.push((gda.clone(), g.clone(), d.clone()));
                }
            }
        }
        out
    }

    pub fn papers(&self, gda: &str) -> Vec<String> {
        self.objects(gda, &format!("{SIO}SIO_000772")).iter().map(|o| unwrap_iri(o)).collect()
    }
}

pub fn unwrap_iri(t: &str) -> String {
    t.trim_start_matches('<').trim_end_matches('>').to_owned()
}

pub fn literal_value(t: &str) -> String {
    let end = t.rfind('"').unwrap();
    t[1..end].to_owned()
}
