pub mod interaction_model;
pub mod nlu_matcher;
pub mod query_engine;
pub mod skill_service;
pub mod sparql_client;
pub mod triple_store;
