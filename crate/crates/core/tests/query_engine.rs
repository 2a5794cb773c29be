mod support;

use std::collections::{BTreeMap, BTreeSet};

use kgvb_core::query_engine::{
    common_genes, execute_plan, instantiate, Budget, EngineError, LayerInput, ParamKind, PlanLayer, QueryPlan,
};
use kgvb_core::skill_service::SessionState;
use kgvb_core::triple_store::{evaluate, parse_query, PatternTerm, Term, TripleSet};
use support::*;

fn slots(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| ((*k).to_owned(), (*v).to_owned())).collect()
}

fn plan(intent: &str, pairs: &[(&str, &str)]) -> QueryPlan {
    catalogue()
        .plan_for_intent(&model(), intent, &slots(pairs), &SessionState::default())
        .unwrap()
}

async fn run(plan: &QueryPlan) -> kgvb_core::query_engine::IntentResult {
    let store = fixture();
    execute_plan(&catalogue(), plan, store.as_ref(), Budget::default()).await.unwrap()
}

#[test]
fn shipped_catalogue_is_consistent() {
    assert_eq!(catalogue().problems(Some(&model())), Vec::<String>::new());
}

#[tokio::test]
async fn definition_returns_both_identifiers() {
    let raw = Raw::load();
    let asthma = raw.disease_by_title("Asthma");
    let cui = raw.literal(&asthma, &format!("{DCT}identifier")).unwrap();
    let doid_node = unwrap_iri(&raw.objects(&asthma, "http://www.w3.org/2004/02/skos/core#exactMatch")[0]);
    let doid = raw.literal(&doid_node, &format!("{DCT}identifier")).unwrap();

    let result = run(&plan("DefinitionIntent", &[("disease", "Asthma")])).await;
    assert_eq!(result.layers_executed, 1);
    assert_eq!(result.table.len(), 1);
    assert_eq!(result.table.get(0, "cui").unwrap().lexical(), cui);
    assert_eq!(result.table.get(0, "doid").unwrap().lexical(), doid);
    assert_eq!((cui.as_str(), doid.as_str()), ("umls:C0004096", "DOID:2841"));
}

#[tokio::test]
async fn genes_for_disease_matches_oracle() {
    let raw = Raw::load();
    let asthma = raw.disease_by_title("Asthma");
    let expected: BTreeSet<String> = raw
        .associations()
        .into_iter()
        .filter(|(_, _, d)| *d == asthma)
        .filter_map(|(_, g, _)| raw.gene_symbol(&g))
        .collect();
    let result = run(&plan("CausationIntent", &[("disease", "Asthma")])).await;
    let got: BTreeSet<String> = result.table.values("geneSymbol").map(|t| t.lexical().to_owned()).collect();
    assert_eq!(got, expected);
    assert_eq!(got, ["ADRB2", "IL13", "IL4", "TNF"].map(String::from).into_iter().collect());
}

#[tokio::test]
async fn evidence_rows_match_oracle() {
    let raw = Raw::load();
    let disease = raw.disease_by_title("Breast Carcinoma");
    let mut expected = BTreeSet::new();
    for (gda, g, d) in raw.associations() {
        if d == disease && raw.gene_symbol(&g).as_deref() == Some("TP53") {
            let sentence = raw.literal(&gda, &format!("{DCT}description")).unwrap();
            for paper in raw.papers(&gda) {
                expected.insert((paper, sentence.clone()));
            }
        }
    }
    assert!(!expected.is_empty());
    let result = run(&plan("EvidenceIntent", &[("gene", "TP53"), ("disease", "Breast Carcinoma")])).await;
    let got: BTreeSet<(String, String)> = (0..result.table.len())
        .map(|r| {
            let paper = result.table.get(r, "paper").unwrap();
            assert!(matches!(paper, Term::Iri(i) if i.starts_with("http://identifiers.org/pubmed/")));
            (paper.lexical().to_owned(), result.table.get(r, "sentence").unwrap().lexical().to_owned())
        })
        .collect();
    assert_eq!(got, expected);
}

#[tokio::test]
async fn publication_count_matches_oracle() {
    let raw = Raw::load();
    let disease = raw.disease_by_title("Breast Carcinoma");
    let expected: usize = raw
        .associations()
        .into_iter()
        .filter(|(_, g, d)| *d == disease && raw.gene_symbol(g).as_deref() == Some("TP53"))
        .map(|(gda, _, _)| raw.papers(&gda).len())
        .sum();
    let result = run(&plan("PublicationCountIntent", &[("gene", "TP53"), ("disease", "Breast Carcinoma")])).await;
    assert_eq!(result.table.get(0, "publications"), Some(&Term::integer(expected as u64)));
}

#[tokio::test]
async fn top_associations_are_truncated_to_twenty() {
    let raw = Raw::load();
    let result = run(&plan("TopAssociationsIntent", &[])).await;
    assert_eq!(result.table.len(), 20);
    assert!(result.truncated);
    let pairs: BTreeSet<(String, String)> = raw
        .associations()
        .into_iter()
        .map(|(_, g, d)| (raw.gene_symbol(&g).unwrap(), raw.literal(&d, &format!("{DCT}title")).unwrap()))
        .collect();
    assert!(pairs.len() > 20);
}

#[tokio::test]
async fn common_genes_equals_brute_force() {
    let raw = Raw::load();
    let mut by_gene: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (_, g, d) in raw.associations() {
        by_gene.entry(g).or_default().insert(d);
    }
    let expected: BTreeMap<String, usize> =
        by_gene.into_iter().filter(|(_, ds)| ds.len() >= 2).map(|(g, ds)| (g, ds.len())).collect();
    assert!(!expected.is_empty());

    let result = run(&plan("CommonGenesIntent", &[])).await;
    let got: BTreeMap<String, usize> = (0..result.table.len())
        .map(|r| {
            let gene = result.table.get(r, "gene").unwrap().lexical().to_owned();
            (gene, result.table.get(r, "diseases").unwrap().lexical().parse().unwrap())
        })
        .collect();
    assert_eq!(got, expected);
    let counts: Vec<usize> = got.values().copied().collect();
    assert!(counts.iter().all(|&n| n >= 2));
}

#[test]
fn common_genes_threshold_one_keeps_every_gene() {
    let store = fixture();
    let text = catalogue().templates["common_genes"].sparql.clone();
    let table = evaluate(&store, &parse_query(&text).unwrap()).unwrap();
    let genes: BTreeSet<_> = table.values("gene").cloned().collect();
    assert_eq!(common_genes(&table, 1).len(), genes.len());
}

#[tokio::test]
async fn two_layer_plan_equals_merged_query() {
    let result = run(&plan("DiseaseEvidenceIntent", &[("disease", "Asthma")])).await;
    assert_eq!(result.layers_executed, 2);
    let merged = r#"
        PREFIX sio: <http://semanticscience.org/resource/>
        PREFIX ncit: <http://ncicb.nci.nih.gov/xml/owl/EVS/Thesaurus.owl#>
        PREFIX dcterms: <http://purl.org/dc/terms/>
        PREFIX skos: <http://www.w3.org/2004/02/skos/core#>
        SELECT DISTINCT ?gene ?geneSymbol ?score ?paper ?sentence WHERE {
          ?d a ncit:C7057 ; dcterms:title "Asthma" ; dcterms:identifier ?cui ;
             dcterms:description ?desc ; skos:exactMatch ?doidNode .
          ?doidNode dcterms:identifier ?doid .
          ?disease a ncit:C7057 ; dcterms:identifier ?cui .
          ?gda sio:SIO_000628 ?disease, ?gene ; sio:SIO_000300 ?score ;
               sio:SIO_000772 ?paper ; dcterms:description ?sentence .
          ?gene a ncit:C16612 ; sio:SIO_000205 ?symbolUri .
          ?symbolUri dcterms:title ?geneSymbol .
        }
        ORDER BY DESC(?score) ?geneSymbol ?paper"#;
    let expected = evaluate(&fixture(), &parse_query(merged).unwrap()).unwrap();
    assert!(!expected.is_empty());
    assert_eq!(result.table, expected);
}

#[tokio::test]
async fn three_layer_plan_respects_layer_budget() {
    let p = plan("RelatedDiseasesIntent", &[("disease", "Asthma")]);
    assert_eq!(p.layers.len(), 3);
    let store = fixture();
    let tight = Budget::new(2, 8000).unwrap();
    match execute_plan(&catalogue(), &p, store.as_ref(), tight).await {
        Err(EngineError::LayerBudgetExceeded { needed: 3, allowed: 2 }) => {}
        other => panic!("{other:?}"),
    }
    let ok = execute_plan(&catalogue(), &p, store.as_ref(), Budget::default()).await.unwrap();
    assert_eq!(ok.layers_executed, 3);
    assert!(!ok.table.is_empty());
}

#[tokio::test]
async fn empty_prior_layer_is_reported() {
    let mut p = plan("DiseaseEvidenceIntent", &[("disease", "Asthma")]);
    p.slot_values.insert("disease".into(), "No Such Disease".into());
    let store = fixture();
    match execute_plan(&catalogue(), &p, store.as_ref(), Budget::default()).await {
        Err(EngineError::EmptyLayerResult { layer: 0 }) => {}
        other => panic!("{other:?}"),
    }
}

#[tokio::test]
async fn layer_errors_carry_their_index() {
    let mut p = plan("DefinitionIntent", &[("disease", "Asthma")]);
    p.layers.push(PlanLayer { template: "top_k_gda".into(), inputs: BTreeMap::new() });
    let mut cat = catalogue();
    cat.templates.get_mut("top_k_gda").unwrap().sparql = "SELECT ?x WHERE { ?x ?p }".into();
    let store = fixture();
    match execute_plan(&cat, &p, store.as_ref(), Budget::default()).await {
        Err(EngineError::Layer { layer: 1, .. }) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn session_focus_fills_missing_slot() {
    let session = SessionState {
        focus_disease: Some(("umls:C0004096".into(), "Asthma".into())),
        ..SessionState::default()
    };
    let p = catalogue().plan_for_intent(&model(), "CausationIntent", &BTreeMap::new(), &session).unwrap();
    assert_eq!(p.slot_values["disease"], "Asthma");
    assert_eq!(p.session_filled, ["disease"]);
    assert_eq!(p.layers.len(), 1);

    let err = catalogue()
        .plan_for_intent(&model(), "CausationIntent", &BTreeMap::new(), &SessionState::default())
        .unwrap_err();
    assert!(matches!(err, EngineError::MissingSlot(s) if s == "disease"));
    // a gene focus is not compatible with a disease slot
    let gene_only = SessionState { focus_gene: Some(("ncbigene:7157".into(), "TP53".into())), ..SessionState::default() };
    assert!(catalogue().plan_for_intent(&model(), "CausationIntent", &BTreeMap::new(), &gene_only).is_err());
}

#[test]
fn plan_lookup_examples() {
    let p = plan("TopAssociationsIntent", &[]);
    assert_eq!(p.layers.len(), 1);
    assert_eq!(p.postprocess, Some(kgvb_core::query_engine::Postprocess::TopK { k: 20 }));
    assert_eq!(plan("DefinitionIntent", &[("disease", "Asthma")]).layers[0].template, "definition");
    let err = catalogue()
        .plan_for_intent(&model(), "AMAZON.HelpIntent", &BTreeMap::new(), &SessionState::default())
        .unwrap_err();
    assert!(matches!(err, EngineError::UnknownIntent(_)));
    assert!(matches!(
        plan("DiseaseEvidenceIntent", &[("disease", "Asthma")]).layers[1].inputs["cui"],
        LayerInput::PriorLayerVar { layer: 0, .. }
    ));
}

#[test]
fn evidence_template_keeps_listing_shape() {
    let cat = catalogue();
    let t = &cat.templates["evidence"];
    let text = instantiate(t, &slots(&[("symbol", "TP53"), ("title", "Breast Carcinoma")])).unwrap();
    let q = parse_query(&text).unwrap();
    let has = |p: &str, o: &str| {
        q.patterns.iter().any(|tp| {
            tp.predicate == PatternTerm::Term(Term::iri(p)) && tp.object.as_var() == Some(o)
        })
    };
    assert!(has(&format!("{DCT}description"), "sentence"));
    assert!(has(&format!("{SIO}SIO_000772"), "paper"));
    assert_eq!(q.limit, Some(50));
}

#[test]
fn definition_template_binds_title() {
    let cat = catalogue();
    let t = &cat.templates["definition"];
    assert_eq!(t.params[0].kind, ParamKind::String);
    let text = instantiate(t, &slots(&[("title", "Asthma")])).unwrap();
    assert!(text.contains("dcterms:title \"Asthma\""));
    let q = parse_query(&text).unwrap();
    assert_eq!(q.output_vars(), ["disease", "doid", "cui", "description"]);
}

#[test]
fn fixture_titles_are_unique() {
    assert!(kgvb_core::query_engine::duplicate_disease_titles(&fixture()).is_empty());
    let mut store = TripleSet::new();
    for d in ["http://d/1", "http://d/2"] {
        store.insert(Term::iri(d), Term::iri(RDF_TYPE), Term::iri(NCIT_DISEASE)).unwrap();
        store.insert(Term::iri(d), Term::iri(format!("{DCT}title")), Term::literal("Same")).unwrap();
    }
    assert_eq!(kgvb_core::query_engine::duplicate_disease_titles(&store), ["Same"]);
}
