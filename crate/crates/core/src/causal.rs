//! Knowledge-state estimation, do-interventions, counterfactual detection and
//! causal-effect estimation.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{Generator, Reentrancy};
use crate::kgraph::{collect_entities, mine_relations, Declarations, KnowledgeBase, KnowledgeGraph, RuleSet};
use crate::logic::{check_consistent, ProverLimits};
use crate::model::{unique_claims, Claim, ClaimId, ClaimStatus, KnowledgeState, Provenance, QueryContext, Response, Triple};

/// Seeds of the three noise terms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseSeeds {
    pub u_k: u64,
    pub u_y: u64,
    pub u_h: u64,
}

/// Name of the only registered confounder: drops each fact with confidence
/// below one with the configured probability.
pub const DROP_RARE_FACTS: &str = "drop_rare_facts";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScmConfig {
    #[serde(default)]
    pub seeds: NoiseSeeds,
    /// Noise draws per probability estimate.
    #[serde(default = "one")]
    pub draws: usize,
    #[serde(default)]
    pub confounders: BTreeMap<String, f64>,
}

fn one() -> usize {
    1
}

impl Default for ScmConfig {
    fn default() -> Self {
        ScmConfig {
            seeds: NoiseSeeds::default(),
            draws: 1,
            confounders: BTreeMap::new(),
        }
    }
}

impl ScmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.draws == 0 {
            return Err(Error::Config("scm.draws must be positive".into()));
        }
        for (name, rate) in &self.confounders {
            if name != DROP_RARE_FACTS {
                return Err(Error::Config(format!("unknown confounder {name:?}")));
            }
            if !(0.0..=1.0).contains(rate) {
                return Err(Error::Config(format!("confounder {name} rate {rate} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn with_confounder(mut self, name: &str, rate: f64) -> Self {
        self.confounders.insert(name.to_string(), rate);
        self
    }

    fn drop_rate(&self) -> f64 {
        self.confounders.get(DROP_RARE_FACTS).copied().unwrap_or(0.0)
    }
}

/// Facts mined around the context's mentions and the claims' entities.
pub fn estimate_knowledge_state(context: &QueryContext, claims: &[Claim], kb: &KnowledgeBase, hops: usize) -> KnowledgeState {
    let seeds = collect_entities(context, claims);
    KnowledgeState::from_facts(mine_relations(&seeds, kb, hops), Provenance::Kb)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterventionKind {
    RemoveFact,
    ReplaceObject,
    InjectFact,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Intervention {
    pub kind: InterventionKind,
    pub target: Triple,
    pub replacement: Option<Triple>,
}

impl Intervention {
    pub fn remove(target: Triple) -> Self {
        Intervention {
            kind: InterventionKind::RemoveFact,
            target,
            replacement: None,
        }
    }

    pub fn inject(target: Triple) -> Self {
        Intervention {
            kind: InterventionKind::InjectFact,
            target,
            replacement: None,
        }
    }

    pub fn replace_object(target: Triple, replacement: Triple) -> Result<Self> {
        if replacement.subject != target.subject || replacement.predicate != target.predicate {
            return Err(Error::InvalidArgument(format!(
                "replacement {replacement} must keep the subject and predicate of {target}"
            )));
        }
        Ok(Intervention {
            kind: InterventionKind::ReplaceObject,
            target,
            replacement: Some(replacement),
        })
    }
}

/// `do(K; intervention)`: a modified copy of `k`.
pub fn intervene(k: &KnowledgeState, intervention: &Intervention) -> KnowledgeState {
    let mut out = k.clone();
    let target = intervention.target.key();
    match intervention.kind {
        InterventionKind::RemoveFact => {
            out.remove(&target);
        }
        InterventionKind::InjectFact => out.insert(intervention.target.clone(), Provenance::Intervened),
        InterventionKind::ReplaceObject => {
            out.remove(&target);
            if let Some(r) = &intervention.replacement {
                out.insert(r.clone(), Provenance::Intervened);
            }
        }
    }
    out
}

/// Removes every fact sharing the claim's subject and predicate.
///
/// ```
/// use claimguard::causal::generate_counterfactual;
/// use claimguard::model::{Claim, KnowledgeState, Polarity, Provenance, Span, Triple};
/// let k = KnowledgeState::from_facts(
///     [Triple::parse("einstein", "born_in", "ulm").unwrap(), Triple::parse("ulm", "located_in", "germany").unwrap()],
///     Provenance::Kb,
/// );
/// let claim = Claim::from_triple(&Triple::parse("einstein", "born_in", "ulm").unwrap(), Polarity::Asserted, Span::new(0, 0));
/// let k2 = generate_counterfactual(&k, &claim);
/// assert_eq!(k2.len(), 1);
/// assert_eq!(k2.facts().next().unwrap().to_string(), "located_in(ulm, germany)");
/// ```
pub fn generate_counterfactual(k: &KnowledgeState, claim: &Claim) -> KnowledgeState {
    let mut out = k.clone();
    out.retain(|t| !(t.subject == *claim.subject() && t.predicate == *claim.predicate()));
    out
}

pub fn generate_alternative(
    context: &QueryContext,
    k_prime: &KnowledgeState,
    generator: &dyn Generator,
    seed: u64,
) -> Result<Response> {
    generator.generate(context, k_prime, seed)
}

/// Jaccard similarity of the two responses' claim-id sets; 1 when both are
/// empty.
pub fn check_consistency(y: &Response, y_prime: &Response) -> f64 {
    let a: BTreeSet<&ClaimId> = y.claims.iter().map(|c| &c.id).collect();
    let b: BTreeSet<&ClaimId> = y_prime.claims.iter().map(|c| &c.id).collect();
    let union = a.union(&b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

/// `sum(1 - c) / n` over per-claim consistencies; 0 when there are none.
pub fn p_causal_from(consistencies: &[f64]) -> f64 {
    if consistencies.is_empty() {
        return 0.0;
    }
    consistencies.iter().map(|c| 1.0 - c).sum::<f64>() / consistencies.len() as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct CausalDetection {
    pub p_causal: f64,
    /// Consistency per distinct claim, in first-occurrence order.
    pub consistencies: Vec<(ClaimId, f64)>,
    pub notes: Vec<String>,
}

/// Counterfactual detection over the response's distinct claims: intervene
/// on each claim, regenerate, and average the loss of consistency.
pub fn causal_detect(
    context: &QueryContext,
    response: &Response,
    kb: &KnowledgeBase,
    generator: &dyn Generator,
    hops: usize,
    seed: u64,
) -> Result<CausalDetection> {
    let claims = unique_claims(&response.claims);
    if claims.is_empty() {
        return Ok(CausalDetection {
            p_causal: 0.0,
            consistencies: Vec::new(),
            notes: vec!["causal: no claims, p_causal = 0".into()],
        });
    }
    let k = estimate_knowledge_state(context, &response.claims, kb, hops);
    let one = |claim: &&Claim| -> Result<(ClaimId, f64)> {
        let k_prime = generate_counterfactual(&k, claim);
        let y_prime = generate_alternative(context, &k_prime, generator, seed)?;
        Ok((claim.id.clone(), check_consistency(response, &y_prime)))
    };
    let consistencies: Vec<(ClaimId, f64)> = match generator.reentrancy() {
        Reentrancy::Concurrent => claims.par_iter().map(one).collect::<Result<_>>()?,
        Reentrancy::Serial => claims.iter().map(one).collect::<Result<_>>()?,
    };
    let values: Vec<f64> = consistencies.iter().map(|(_, c)| *c).collect();
    let p_causal = p_causal_from(&values);
    let notes = vec![format!(
        "causal: {} facts in the knowledge state, {} counterfactuals, p_causal = {p_causal:.6}",
        k.len(),
        values.len()
    )];
    Ok(CausalDetection {
        p_causal,
        consistencies,
        notes,
    })
}

/// The hallucination indicator `H = f_H(K, claim)`.
pub trait HallucinationIndicator: Sync {
    fn hallucinated(&self, state: &KnowledgeState, claim: &Claim) -> bool;
}

/// `H = 1` unless the claim is supported by the state closed under the rules.
#[derive(Clone, Debug, Default)]
pub struct LogicIndicator {
    pub rules: RuleSet,
    pub declarations: Declarations,
    pub limits: ProverLimits,
}

impl HallucinationIndicator for LogicIndicator {
    fn hallucinated(&self, state: &KnowledgeState, claim: &Claim) -> bool {
        let graph = match KnowledgeGraph::from_state(state, &self.rules) {
            Ok(g) => g,
            Err(_) => return true,
        };
        check_consistent(claim, &graph, &self.rules, &self.declarations, self.limits).status != ClaimStatus::Supported
    }
}

/// The state seen under noise draw `draw`: the confounder's random drops.
pub fn confounded_state(state: &KnowledgeState, scm: &ScmConfig, draw: usize) -> KnowledgeState {
    let rate = scm.drop_rate();
    if rate == 0.0 {
        return state.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(scm.seeds.u_h);
    rng.set_stream(draw as u64);
    let mut out = state.clone();
    out.retain(|t| t.confidence() >= 1.0 || !rng.random_bool(rate));
    out
}

/// `P(H = 1 | do(K = k))` over the configured number of seeded draws.
pub fn hallucination_probability(
    k: &KnowledgeState,
    scm: &ScmConfig,
    claim: &Claim,
    indicator: &dyn HallucinationIndicator,
) -> f64 {
    let draws = scm.draws.max(1);
    let hits = (0..draws)
        .into_par_iter()
        .filter(|&d| indicator.hallucinated(&confounded_state(k, scm, d), claim))
        .count();
    hits as f64 / draws as f64
}

/// `P(H = 1 | do(K = k)) - P(H = 1 | do(K = k0))`, both estimated from the
/// same noise draws.
pub fn estimate_causal_effect(
    k: &KnowledgeState,
    k0: &KnowledgeState,
    scm: &ScmConfig,
    claim: &Claim,
    indicator: &dyn HallucinationIndicator,
) -> Result<f64> {
    scm.validate()?;
    Ok(hallucination_probability(k, scm, claim, indicator) - hallucination_probability(k0, scm, claim, indicator))
}
