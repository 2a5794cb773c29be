#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use kgvb_core::triple_store::{Term, TripleSet};

const SIO: &str = "http://semanticscience.org/resource/";
const DCT: &str = "http://purl.org/dc/terms/";
const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
const NCIT: &str = "http://ncicb.nci.nih.gov/xml/owl/EVS/Thesaurus.owl#";
const SKOS_MATCH: &str = "http://www.w3.org/2004/02/skos/core#exactMatch";
const DGN: &str = "http://rdf.disgenet.org/vocab/";
const DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";

pub const MAX_TRIPLES: usize = 300;

/// Values present in a generated graph, used to bind template parameters.
#[derive(Debug, Default, Clone)]
pub struct Pools {
    pub titles: Vec<String>,
    pub symbols: Vec<String>,
    pub cuis: Vec<String>,
    pub classes: Vec<String>,
    pub genes: Vec<String>,
}

/// Small graph in the fixture's vocabulary with deliberate irregularities:
/// missing types, shared titles, equal-valued scores with different lexical
/// forms and unrelated noise triples.
pub fn random_graph(rng: &mut StdRng) -> (TripleSet, Pools) {
    let mut triples: Vec<(Term, Term, Term)> = Vec::new();
    let mut pools = Pools::default();
    fn iri(s: &str) -> Term {
        Term::iri(s)
    }
    let mut add = |s: Term, p: &str, o: Term| triples.push((s, iri(p), o));

    let title_pool = ["Asthma", "Alpha Disease", "Beta Syndrome", "Gamma", "Delta Carcinoma", "Asthma"];
    let symbol_pool = ["TP53", "BRCA1", "IL4", "TNF", "X1", "APOE"];
    let class_pool = ["kinase", "receptor", "enzyme"];
    let sentence_pool = ["A was linked to B.", "Evidence from a cohort.", "Case report.", "Meta-analysis result."];
    let score_pool = ["0.1", "0.5", "0.50", "1", "0.35"];

    let nd = rng.gen_range(1..=6);
    let ng = rng.gen_range(1..=8);
    let nc = rng.gen_range(1..=3);
    let diseases: Vec<Term> = (0..nd).map(|i| iri(&format!("http://linkedlifedata.com/resource/umls/id/C{i:04}"))).collect();
    let genes: Vec<Term> = (0..ng).map(|i| iri(&format!("http://identifiers.org/ncbigene/{i}"))).collect();
    let classes: Vec<Term> = (0..nc).map(|i| iri(&format!("http://rdf.disgenet.org/resource/protein-class/{i}"))).collect();

    for (i, d) in diseases.iter().enumerate() {
        if rng.gen_bool(0.9) {
            add(d.clone(), RDF_TYPE, iri(&format!("{NCIT}C7057")));
        }
        let title = *title_pool.choose(rng).unwrap();
        add(d.clone(), &format!("{DCT}title"), Term::literal(title));
        pools.titles.push(title.to_owned());
        let cui = format!("umls:C{i:04}");
        add(d.clone(), &format!("{DCT}identifier"), Term::literal(cui.clone()));
        pools.cuis.push(cui);
        if rng.gen_bool(0.8) {
            add(d.clone(), &format!("{DCT}description"), Term::literal(format!("Description {i}")));
        }
        if rng.gen_bool(0.8) {
            let node = iri(&format!("http://purl.obolibrary.org/obo/DOID_{i}"));
            add(d.clone(), SKOS_MATCH, node.clone());
            add(node, &format!("{DCT}identifier"), Term::literal(format!("DOID:{i}")));
        }
    }
    for (i, c) in classes.iter().enumerate() {
        add(c.clone(), RDF_TYPE, iri(&format!("{DGN}ProteinClass")));
        add(c.clone(), &format!("{DCT}title"), Term::literal(class_pool[i]));
        pools.classes.push(class_pool[i].to_owned());
    }
    for (i, g) in genes.iter().enumerate() {
        if rng.gen_bool(0.9) {
            add(g.clone(), RDF_TYPE, iri(&format!("{NCIT}C16612")));
        }
        let sym_iri = iri(&format!("http://identifiers.org/hgnc.symbol/S{i}"));
        add(g.clone(), &format!("{SIO}SIO_000205"), sym_iri.clone());
        let symbol = *symbol_pool.choose(rng).unwrap();
        add(sym_iri, &format!("{DCT}title"), Term::literal(symbol));
        pools.symbols.push(symbol.to_owned());
        if let (true, Some(c)) = (rng.gen_bool(0.7), classes.choose(rng)) {
            add(g.clone(), &format!("{DGN}proteinClass"), c.clone());
        }
        if let Term::Iri(s) = g {
            pools.genes.push(s.clone());
        }
    }
    for i in 0..rng.gen_range(0..=25) {
        let gda = iri(&format!("http://rdf.disgenet.org/resource/gda/DGN{i:05}"));
        let kind = if rng.gen_bool(0.5) { "SIO_001120" } else { "SIO_001121" };
        add(gda.clone(), RDF_TYPE, iri(&format!("{SIO}{kind}")));
        add(gda.clone(), &format!("{SIO}SIO_000628"), genes.choose(rng).unwrap().clone());
        if rng.gen_bool(0.15) {
            add(gda.clone(), &format!("{SIO}SIO_000628"), genes.choose(rng).unwrap().clone());
        }
        add(gda.clone(), &format!("{SIO}SIO_000628"), diseases.choose(rng).unwrap().clone());
        for _ in 0..rng.gen_range(0..=3) {
            let paper = iri(&format!("http://identifiers.org/pubmed/{}", rng.gen_range(1..=6)));
            add(gda.clone(), &format!("{SIO}SIO_000772"), paper);
        }
        add(gda.clone(), &format!("{DCT}description"), Term::literal(*sentence_pool.choose(rng).unwrap()));
        add(gda.clone(), &format!("{SIO}SIO_000300"), Term::typed(*score_pool.choose(rng).unwrap(), DECIMAL));
    }
    for _ in 0..rng.gen_range(0..=10) {
        let s = iri(&format!("http://example.org/n{}", rng.gen_range(0..5)));
        let p = iri(&format!("http://example.org/p{}", rng.gen_range(0..3)));
        let o = if rng.gen_bool(0.5) {
            Term::literal(format!("v{}", rng.gen_range(0..4)))
        } else {
            Term::integer(rng.gen_range(0..4))
        };
        triples.push((s, p, o));
    }

    triples.shuffle(rng);
    let mut store = TripleSet::new();
    for (s, p, o) in triples {
        if store.len() >= MAX_TRIPLES {
            break;
        }
        store.insert(s, p, o).unwrap();
    }
    (store, pools)
}
