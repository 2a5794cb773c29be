//! HTTP client for the SPARQL protocol subset spoken by the embedded endpoint.

use std::time::{Duration, Instant};

use reqwest::header::ACCEPT;
use url::Url;

use crate::triple_store::{parse_results_json, ResultTable, RESULTS_CONTENT_TYPE};

pub const MAX_TIMEOUT_MS: u64 = 60_000;
pub const DEFAULT_TIMEOUT_MS: u64 = 5_000;
pub const DEFAULT_MAX_RESPONSE_BYTES: usize = 4 * 1024 * 1024;

const SNIPPET_LEN: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndpointConfig {
    pub url: String,
    pub timeout_ms: u64,
    pub max_response_bytes: usize,
    /// Send the query as a GET parameter instead of a form POST.
    pub use_get: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("endpoint URL '{0}' is not an absolute http(s) URL")]
    InvalidUrl(String),
    #[error("endpoint URL '{0}' must not carry a query string or fragment")]
    QueryStringInUrl(String),
    #[error("timeout_ms must be in 1..={MAX_TIMEOUT_MS}, got {0}")]
    Timeout(u64),
    #[error("max_response_bytes must be positive")]
    ResponseCap,
}

impl EndpointConfig {
    pub fn new(url: impl Into<String>) -> Result<Self, ConfigError> {
        let cfg = Self {
            url: url.into(),
            timeout_ms: DEFAULT_TIMEOUT_MS,
            max_response_bytes: DEFAULT_MAX_RESPONSE_BYTES,
            use_get: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_timeout_ms(mut self, timeout_ms: u64) -> Result<Self, ConfigError> {
        self.timeout_ms = timeout_ms;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let parsed = Url::parse(&self.url).map_err(|_| ConfigError::InvalidUrl(self.url.clone()))?;
        if !matches!(parsed.scheme(), "http" | "https") || parsed.host_str().is_none() {
            return Err(ConfigError::InvalidUrl(self.url.clone()));
        }
        if parsed.query().is_some() || parsed.fragment().is_some() {
            return Err(ConfigError::QueryStringInUrl(self.url.clone()));
        }
        if self.timeout_ms == 0 || self.timeout_ms > MAX_TIMEOUT_MS {
            return Err(ConfigError::Timeout(self.timeout_ms));
        }
        if self.max_response_bytes == 0 {
            return Err(ConfigError::ResponseCap);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClientError {
    #[error("query is empty")]
    EmptyQuery,
    #[error("endpoint did not answer within {elapsed_ms} ms")]
    Timeout { elapsed_ms: u64 },
    #[error("endpoint returned HTTP {code}: {body_snippet}")]
    HttpStatus { code: u16, body_snippet: String },
    #[error("network error: {0}")]
    Network(String),
    #[error("response exceeds {limit} bytes")]
    OversizedResponse { limit: usize },
    #[error("malformed results: {0}")]
    MalformedResults(String),
}

impl ClientError {
    /// Stable identifier used in diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            ClientError::EmptyQuery => "EmptyQuery",
            ClientError::Timeout { .. } => "Timeout",
            ClientError::HttpStatus { .. } => "HttpStatus",
            ClientError::Network(_) => "Network",
            ClientError::OversizedResponse { .. } => "OversizedResponse",
            ClientError::MalformedResults(_) => "MalformedResults",
        }
    }
}

/// Stateless client; clones share the connection pool.
#[derive(Debug, Clone)]
pub struct SparqlClient {
    cfg: EndpointConfig,
    http: reqwest::Client,
}

impl SparqlClient {
    pub fn new(cfg: EndpointConfig) -> Result<Self, ConfigError> {
        cfg.validate()?;
        Ok(Self { cfg, http: reqwest::Client::new() })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.cfg
    }

    /// Runs one query. No retries; any failure yields no rows.
    pub async fn execute(&self, query: &str) -> Result<ResultTable, ClientError> {
        if query.trim().is_empty() {
            return Err(ClientError::EmptyQuery);
        }
        let started = Instant::now();
        let budget = Duration::from_millis(self.cfg.timeout_ms);
        match tokio::time::timeout(budget, self.fetch(query)).await {
            Ok(result) => result,
            Err(_) => Err(ClientError::Timeout { elapsed_ms: started.elapsed().as_millis() as u64 }),
        }
    }

    async fn fetch(&self, query: &str) -> Result<ResultTable, ClientError> {
        let request = if self.cfg.use_get {
            self.http.get(&self.cfg.url).query(&[("query", query)])
        } else {
            self.http.post(&self.cfg.url).form(&[("query", query)])
        };
        let mut response = request
            .header(ACCEPT, RESULTS_CONTENT_TYPE)
            .send()
            .await
            .map_err(|e| ClientError::Network(e.to_string()))?;
        let status = response.status();
        if let Some(len) = response.content_length() {
            if len as usize > self.cfg.max_response_bytes {
                return Err(ClientError::OversizedResponse { limit: self.cfg.max_response_bytes });
            }
        }
        let mut body = Vec::new();
        while let Some(chunk) = response.chunk().await.map_err(|e| ClientError::Network(e.to_string()))? {
            if body.len() + chunk.len() > self.cfg.max_response_bytes {
                return Err(ClientError::OversizedResponse { limit: self.cfg.max_response_bytes });
            }
            body.extend_from_slice(&chunk);
        }
        let text = String::from_utf8_lossy(&body);
        if !status.is_success() {
            return Err(ClientError::HttpStatus {
                code: status.as_u16(),
                body_snippet: text.chars().take(SNIPPET_LEN).collect(),
            });
        }
        tracing::debug!(bytes = body.len(), "sparql response");
        parse_results_json(&text).map_err(|e| ClientError::MalformedResults(e.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_invariants() {
        assert!(EndpointConfig::new("http://127.0.0.1:7878/sparql").is_ok());
        assert!(EndpointConfig::new("https://rdf.disgenet.org/sparql/").is_ok());
        assert_eq!(
            EndpointConfig::new("http://h/sparql?query=x"),
            Err(ConfigError::QueryStringInUrl("http://h/sparql?query=x".into()))
        );
        assert!(matches!(EndpointConfig::new("ftp://h/sparql"), Err(ConfigError::InvalidUrl(_))));
        assert!(matches!(EndpointConfig::new("/sparql"), Err(ConfigError::InvalidUrl(_))));
        let cfg = EndpointConfig::new("http://h/sparql").unwrap();
        assert_eq!(cfg.clone().with_timeout_ms(60_001), Err(ConfigError::Timeout(60_001)));
        assert_eq!(cfg.with_timeout_ms(0), Err(ConfigError::Timeout(0)));
    }

    #[tokio::test]
    async fn empty_query_is_rejected_locally() {
        let client = SparqlClient::new(EndpointConfig::new("http://127.0.0.1:9/sparql").unwrap()).unwrap();
        assert_eq!(client.execute("  ").await, Err(ClientError::EmptyQuery));
    }
}
