//! Text generators: a deterministic mock that renders its constraint facts,
//! and an HTTP client for a remote model gateway.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::{claims_from_text, render_triple, ClaimGrammar};
use crate::model::{KnowledgeState, Polarity, QueryContext, Response, Triple};

/// Whether a generator may be called from several threads at once.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reentrancy {
    Serial,
    Concurrent,
}

pub trait Generator: Send + Sync {
    /// Generates a response for `context` constrained by `constraints`.
    fn generate(&self, context: &QueryContext, constraints: &KnowledgeState, seed: u64) -> Result<Response>;

    fn reentrancy(&self) -> Reentrancy;
}

/// Renders every constraint fact whose subject the context mentions (every
/// fact when it mentions none), sorted by key, one sentence per fact.
/// Facts whose predicate has no lexicon phrase are left out. The seed is
/// accepted for interface parity and has no effect.
///
/// ```
/// use claimguard::extraction::ClaimGrammar;
/// use claimguard::generator::{Generator, MockGenerator};
/// use claimguard::model::{EntityId, KnowledgeState, Provenance, QueryContext, Triple};
///
/// let k = KnowledgeState::from_facts(
///     [Triple::parse("einstein", "born_in", "ulm").unwrap(), Triple::parse("ulm", "located_in", "germany").unwrap()],
///     Provenance::Kb,
/// );
/// let ctx = QueryContext::with_mentions("Where was Einstein born?", |e: &EntityId| e.as_str() == "einstein");
/// let y = MockGenerator::new(ClaimGrammar::default()).generate(&ctx, &k, 7).unwrap();
/// assert_eq!(y.text, "Einstein was born in Ulm.");
/// ```
#[derive(Clone, Debug, Default)]
pub struct MockGenerator {
    grammar: ClaimGrammar,
}

impl MockGenerator {
    pub fn new(grammar: ClaimGrammar) -> Self {
        MockGenerator { grammar }
    }

    pub fn grammar(&self) -> &ClaimGrammar {
        &self.grammar
    }

    /// The facts the mock would render, in output order.
    pub fn selected<'a>(&self, context: &QueryContext, constraints: &'a KnowledgeState) -> Vec<&'a Triple> {
        constraints
            .facts()
            .filter(|t| context.mentioned_entities.is_empty() || context.mentioned_entities.contains(&t.subject))
            .filter(|t| self.grammar.phrase_for(&t.predicate).is_some())
            .collect()
    }
}

impl Generator for MockGenerator {
    fn generate(&self, context: &QueryContext, constraints: &KnowledgeState, _seed: u64) -> Result<Response> {
        let sentences: Vec<String> = self
            .selected(context, constraints)
            .into_iter()
            .filter_map(|t| render_triple(t, Polarity::Asserted, &self.grammar))
            .collect();
        let text = sentences.join(" ");
        let claims = claims_from_text(&text, &self.grammar)?.claims;
        let confidences = vec![1.0; claims.len()];
        Ok(Response {
            text,
            claims,
            claim_confidences: Some(confidences),
        })
    }

    fn reentrancy(&self) -> Reentrancy {
        Reentrancy::Concurrent
    }
}

#[derive(Serialize)]
struct WireFact<'a> {
    subject: &'a str,
    predicate: &'a str,
    object: String,
    confidence: f64,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    context: &'a str,
    constraints: Vec<WireFact<'a>>,
}

#[derive(Deserialize)]
struct WireResponse {
    text: String,
    #[serde(default)]
    claim_confidences: Vec<f64>,
}

/// Client for `POST {endpoint}/generate`.
#[derive(Clone, Debug)]
pub struct RemoteGenerator {
    endpoint: String,
    timeout: Duration,
    retries: usize,
    reentrancy: Reentrancy,
    grammar: ClaimGrammar,
}

/// Environment variable naming the remote endpoint.
pub const GENERATOR_URL_VAR: &str = "CG_GENERATOR_URL";

impl RemoteGenerator {
    pub fn new(endpoint: impl Into<String>, timeout: Duration, grammar: ClaimGrammar) -> Result<Self> {
        if timeout.is_zero() {
            return Err(Error::InvalidArgument("generator timeout must be positive".into()));
        }
        Ok(RemoteGenerator {
            endpoint: endpoint.into().trim_end_matches('/').to_string(),
            timeout,
            retries: 2,
            reentrancy: Reentrancy::Serial,
            grammar,
        })
    }

    pub fn with_retries(mut self, retries: usize) -> Self {
        self.retries = retries;
        self
    }

    pub fn with_reentrancy(mut self, reentrancy: Reentrancy) -> Self {
        self.reentrancy = reentrancy;
        self
    }

    fn call(&self, body: &str) -> Result<String> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .build()
            .into();
        let url = format!("{}/generate", self.endpoint);
        let mut last = String::new();
        for _ in 0..=self.retries {
            match agent.post(&url).header("content-type", "application/json").send(body) {
                Ok(mut resp) => {
                    return resp
                        .body_mut()
                        .read_to_string()
                        .map_err(|e| Error::GeneratorUnavailable(format!("{url}: {e}")));
                }
                Err(ureq::Error::StatusCode(code)) => {
                    return Err(Error::GeneratorUnavailable(format!("{url}: HTTP status {code}")));
                }
                Err(e) => last = e.to_string(),
            }
        }
        Err(Error::GeneratorUnavailable(format!("{url}: {last}")))
    }
}

impl Generator for RemoteGenerator {
    fn generate(&self, context: &QueryContext, constraints: &KnowledgeState, _seed: u64) -> Result<Response> {
        let request = WireRequest {
            context: &context.text,
            constraints: constraints
                .facts()
                .map(|t| WireFact {
                    subject: t.subject.as_str(),
                    predicate: t.predicate.as_str(),
                    object: t.object.to_string(),
                    confidence: t.confidence(),
                })
                .collect(),
        };
        let body = serde_json::to_string(&request).map_err(|e| Error::GeneratorUnavailable(e.to_string()))?;
        let text = self.call(&body)?;
        let wire: WireResponse = serde_json::from_str(&text)
            .map_err(|e| Error::GeneratorUnavailable(format!("protocol violation: {e}")))?;
        if wire.claim_confidences.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::GeneratorUnavailable("protocol violation: confidence outside [0, 1]".into()));
        }
        let claims = claims_from_text(&wire.text, &self.grammar)
            .map_err(|e| Error::GeneratorUnavailable(format!("protocol violation: {e}")))?
            .claims;
        Ok(Response {
            text: wire.text,
            claims,
            claim_confidences: (!wire.claim_confidences.is_empty()).then_some(wire.claim_confidences),
        })
    }

    fn reentrancy(&self) -> Reentrancy {
        self.reentrancy
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GeneratorBinding {
    Mock {
        #[serde(default)]
        seed: u64,
    },
    Remote {
        endpoint: String,
        timeout_ms: u64,
        #[serde(default = "serial")]
        reentrancy: Reentrancy,
    },
}

fn serial() -> Reentrancy {
    Reentrancy::Serial
}

impl Default for GeneratorBinding {
    fn default() -> Self {
        GeneratorBinding::Mock { seed: 0 }
    }
}

impl GeneratorBinding {
    pub fn build(&self, grammar: ClaimGrammar) -> Result<Box<dyn Generator>> {
        Ok(match self {
            GeneratorBinding::Mock { .. } => Box::new(MockGenerator::new(grammar)),
            GeneratorBinding::Remote {
                endpoint,
                timeout_ms,
                reentrancy,
            } => Box::new(
                RemoteGenerator::new(endpoint.clone(), Duration::from_millis(*timeout_ms), grammar)?
                    .with_reentrancy(*reentrancy),
            ),
        })
    }
}
