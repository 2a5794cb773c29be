//! Shared inputs for the benchmarks.

use std::path::PathBuf;

use kgvb_core::interaction_model::{compile, load_model, CompiledMatcher};
use kgvb_core::query_engine::Catalogue;

pub fn workspace() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixture_text() -> String {
    std::fs::read_to_string(workspace().join("fixtures/disgenet-mini.nt")).expect("fixture readable")
}

pub fn catalogue() -> Catalogue {
    Catalogue::load(workspace().join("queries")).expect("catalogue loads")
}

pub fn matcher() -> CompiledMatcher {
    let model = load_model(workspace().join("models/disease-skill.json")).expect("model loads");
    compile(&model).expect("model compiles")
}
