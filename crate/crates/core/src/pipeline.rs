//! The end-to-end verifier: extraction, graph construction, symbolic and
//! counterfactual checks, and fusion into a verdict.

use rayon::prelude::*;

use crate::causal::{causal_detect, estimate_knowledge_state, ScmConfig};
use crate::error::Result;
use crate::extraction::{claims_from_text, ClaimGrammar};
use crate::fusion::{fuse, p_symbolic, uncertainty, FusionWeights};
use crate::generator::{Generator, MockGenerator};
use crate::kgraph::{build_graph, KnowledgeBase, KnowledgeGraph, RuleSet, DEFAULT_HOPS};
use crate::logic::{check_consistent, ProverLimits};
use crate::model::{
    unique_claims, ClaimVerdict, KnowledgeState, QueryContext, Response, Thresholds, VerdictReport,
};

/// Everything needed to verify responses against one knowledge base.
pub struct Pipeline {
    pub kb: KnowledgeBase,
    pub rules: RuleSet,
    pub grammar: ClaimGrammar,
    pub weights: FusionWeights,
    pub thresholds: Thresholds,
    pub hops: usize,
    pub limits: ProverLimits,
    pub scm: ScmConfig,
    pub generator: Box<dyn Generator>,
}

/// A report together with the intermediate artefacts it was computed from.
#[derive(Clone, Debug)]
pub struct Verification {
    pub report: VerdictReport,
    pub response: Response,
    pub graph: KnowledgeGraph,
    pub state: KnowledgeState,
}

impl Pipeline {
    /// Default settings and the mock generator. The shipped temporal and
    /// causal axioms are added to `rules`.
    pub fn new(kb: KnowledgeBase, rules: RuleSet, grammar: ClaimGrammar) -> Self {
        Pipeline {
            kb,
            rules: rules.with_shipped_axioms(),
            generator: Box::new(MockGenerator::new(grammar.clone())),
            grammar,
            weights: FusionWeights::default(),
            thresholds: Thresholds::default(),
            hops: DEFAULT_HOPS,
            limits: ProverLimits::default(),
            scm: ScmConfig::default(),
        }
    }

    pub fn with_weights(mut self, weights: FusionWeights) -> Self {
        self.weights = weights;
        self
    }

    pub fn with_generator(mut self, generator: Box<dyn Generator>) -> Self {
        self.generator = generator;
        self
    }

    /// A query context whose mentions are the KB entities named in `text`.
    pub fn context(&self, text: &str) -> QueryContext {
        QueryContext::with_mentions(text, |e| self.kb.has_entity(e))
    }

    /// Extracts claims from `text` and verifies them.
    pub fn verify(&self, context: &QueryContext, text: &str) -> Result<Verification> {
        let extraction = claims_from_text(text, &self.grammar)?;
        let response = Response::new(text, extraction.claims);
        self.verify_extracted(context, response, extraction.notes)
    }

    /// Verifies a response whose claims are already extracted.
    pub fn verify_response(&self, context: &QueryContext, response: Response) -> Result<Verification> {
        self.verify_extracted(context, response, Vec::new())
    }

    fn verify_extracted(&self, context: &QueryContext, response: Response, notes: Vec<String>) -> Result<Verification> {
        let mut trace = vec![format!("extracted {} claims", response.claims.len())];
        trace.extend(notes);
        let claims: Vec<_> = unique_claims(&response.claims).into_iter().cloned().collect();

        let graph = build_graph(context, &claims, &self.kb, &self.rules, self.hops)?;
        trace.push(format!(
            "graph: {} vertices, {} edges ({} inferred), hops = {}",
            graph.vertices().len(),
            graph.len(),
            graph.inferred_count(),
            self.hops
        ));

        let declarations = self.kb.declarations();
        let checks: Vec<_> = claims
            .par_iter()
            .map(|c| check_consistent(c, &graph, &self.rules, declarations, self.limits))
            .collect();

        let causal = causal_detect(context, &response, &self.kb, self.generator.as_ref(), self.hops, self.scm.seeds.u_y)?;
        trace.extend(causal.notes.iter().cloned());

        let mut per_claim = Vec::with_capacity(claims.len());
        for (claim, check) in claims.into_iter().zip(checks) {
            let consistency = causal.consistencies.iter().find(|(id, _)| *id == claim.id).map(|(_, c)| *c);
            let mut line = format!("claim {claim}: {}", check.status.name());
            if !check.evidence.is_empty() {
                let ev: Vec<String> = check.evidence.iter().map(|t| t.to_string()).collect();
                line.push_str(&format!(" (evidence: {})", ev.join("; ")));
            }
            if check.budget_exhausted {
                line.push_str(" [prover budget exhausted]");
            }
            trace.push(line);
            per_claim.push(ClaimVerdict {
                claim,
                status: check.status,
                evidence: check.evidence,
                proof: check.proof,
                consistency,
            });
        }

        let statuses: Vec<_> = per_claim.iter().map(|c| c.status).collect();
        let p_symbolic = p_symbolic(&statuses);
        let u = uncertainty(&response, &statuses);
        if statuses.is_empty() {
            trace.push("no claims: uncertainty defaults to 0.5".into());
        }
        let score = fuse(causal.p_causal, p_symbolic, u, &self.weights)?;
        let verdict = self.thresholds.verdict(score);
        trace.push(format!(
            "score = {:.6} * {:.6} + {:.6} * {:.6} + {:.6} * {:.6} = {score:.6} -> {}",
            self.weights.alpha,
            causal.p_causal,
            self.weights.beta,
            p_symbolic,
            self.weights.gamma,
            u,
            verdict.name()
        ));

        let state = estimate_knowledge_state(context, &response.claims, &self.kb, self.hops);
        Ok(Verification {
            report: VerdictReport {
                score,
                verdict,
                p_causal: causal.p_causal,
                p_symbolic,
                uncertainty: u,
                weights: self.weights,
                per_claim,
                trace,
            },
            response,
            graph,
            state,
        })
    }
}
