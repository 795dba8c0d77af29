use std::collections::BTreeSet;

use crate::kgraph::{Declarations, KnowledgeGraph, RuleSet};
use crate::model::{Claim, ClaimStatus, FactKey, Triple};

use super::premises::{extract_premises, PremiseSource, Premises};
use super::prover::{refute, theorem_prove, ProofStatus, ProofTrace, ProverLimits};
use super::syntax::{Clause, ClauseOrigin, Literal};

/// Upper bound on distinct refutations collected per claim.
pub const MAX_CONTRADICTIONS: usize = 3;

/// Ground literal for a claim; negated claims give negative literals.
pub fn translate_to_fol(claim: &Claim) -> Literal {
    Literal::from_triple(&claim.triple, claim.is_negated())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Contradiction {
    /// Graph facts used by the refutation, or the claim's own triple when
    /// the claim is refuted by the constraints alone.
    pub evidence: Vec<Triple>,
    pub derivation: ProofTrace,
    /// The refutation does not use the claim.
    pub premises_inconsistent: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Contradictions {
    pub found: Vec<Contradiction>,
    /// Set when a search stopped on a budget before saturating.
    pub budget_exhausted: bool,
}

impl Contradictions {
    pub fn is_empty(&self) -> bool {
        self.found.is_empty()
    }
}

fn edge_inputs(trace: &ProofTrace, premises: &Premises, index: &[usize]) -> Vec<Triple> {
    let mut out: Vec<Triple> = trace
        .input_ids()
        .filter_map(|id| index.get(id))
        .filter_map(|&i| match &premises.sources[i] {
            PremiseSource::Edge(t) => Some(t.clone()),
            _ => None,
        })
        .collect();
    out.sort_by(|a, b| a.key().cmp(&b.key()));
    out
}

/// Refutes the graph's premises together with `claim_literal`, collecting up
/// to [`MAX_CONTRADICTIONS`] refutations with disjoint graph evidence.
pub fn find_contradictions(
    graph: &KnowledgeGraph,
    claim_literal: &Literal,
    rules: &RuleSet,
    declarations: &Declarations,
    limits: ProverLimits,
) -> Contradictions {
    let premises = extract_premises(graph, claim_literal, rules, declarations);
    let mut removed: BTreeSet<FactKey> = BTreeSet::new();
    let mut result = Contradictions::default();
    while result.found.len() < MAX_CONTRADICTIONS {
        let mut clauses: Vec<Clause> = Vec::with_capacity(premises.len() + 1);
        let mut index: Vec<usize> = Vec::with_capacity(premises.len());
        for (i, (c, s)) in premises.clauses.iter().zip(&premises.sources).enumerate() {
            if let PremiseSource::Edge(t) = s {
                if removed.contains(&t.key()) {
                    continue;
                }
            }
            clauses.push(c.clone());
            index.push(i);
        }
        let claim_id = clauses.len();
        clauses.push(Clause::unit(claim_literal.clone(), ClauseOrigin::Premise));
        let outcome = refute(&clauses, limits);
        let Some(trace) = outcome.trace else {
            result.budget_exhausted |= matches!(outcome.status, ProofStatus::BudgetExhausted(_));
            break;
        };
        let uses_claim = trace.input_ids().any(|id| id == claim_id);
        let edges = edge_inputs(&trace, &premises, &index);
        let evidence = if edges.is_empty() {
            claim_literal.to_triple().into_iter().collect()
        } else {
            edges.clone()
        };
        result.found.push(Contradiction {
            evidence,
            derivation: trace,
            premises_inconsistent: !uses_claim,
        });
        if edges.is_empty() {
            break;
        }
        removed.extend(edges.iter().map(Triple::key));
    }
    result
}

#[derive(Clone, Debug, PartialEq)]
pub struct Consistency {
    pub status: ClaimStatus,
    pub evidence: Vec<Triple>,
    pub proof: Option<ProofTrace>,
    pub budget_exhausted: bool,
}

/// Contradicted when a refutation with the claim exists, supported when the
/// claim is provable, unverifiable otherwise (including budget exhaustion).
///
/// ```
/// use claimguard::kgraph::{Declarations, KnowledgeGraph, RuleSet};
/// use claimguard::logic::{check_consistent, ProverLimits};
/// use claimguard::model::{Claim, ClaimStatus, EntityId, Polarity, Span, Triple};
///
/// let graph = KnowledgeGraph::from_triples([], [Triple::parse("einstein", "born_in", "ulm").unwrap()]);
/// let mut decl = Declarations::new();
/// decl.declare_functional(EntityId::new("born_in").unwrap());
/// let claim = Claim::from_triple(&Triple::parse("einstein", "born_in", "paris").unwrap(), Polarity::Asserted, Span::new(0, 0));
/// let c = check_consistent(&claim, &graph, &RuleSet::new(), &decl, ProverLimits::default());
/// assert_eq!(c.status, ClaimStatus::Contradicted);
/// assert_eq!(c.evidence[0].to_string(), "born_in(einstein, ulm)");
/// ```
pub fn check_consistent(
    claim: &Claim,
    graph: &KnowledgeGraph,
    rules: &RuleSet,
    declarations: &Declarations,
    limits: ProverLimits,
) -> Consistency {
    let goal = translate_to_fol(claim);
    let contradictions = find_contradictions(graph, &goal, rules, declarations, limits);
    if let Some(first) = contradictions.found.first() {
        let mut evidence: Vec<Triple> = Vec::new();
        for c in &contradictions.found {
            for t in &c.evidence {
                if !evidence.iter().any(|e| e.key() == t.key()) {
                    evidence.push(t.clone());
                }
            }
        }
        return Consistency {
            status: ClaimStatus::Contradicted,
            evidence,
            proof: Some(first.derivation.clone()),
            budget_exhausted: false,
        };
    }
    let premises = extract_premises(graph, &goal, rules, declarations);
    let outcome = theorem_prove(&premises.clauses, &goal, limits);
    let budget_exhausted = contradictions.budget_exhausted || matches!(outcome.status, ProofStatus::BudgetExhausted(_));
    match outcome.trace {
        Some(trace) if !outcome.premises_inconsistent => {
            let index: Vec<usize> = (0..premises.len()).collect();
            Consistency {
                status: ClaimStatus::Supported,
                evidence: edge_inputs(&trace, &premises, &index),
                proof: Some(trace),
                budget_exhausted,
            }
        }
        _ => Consistency {
            status: ClaimStatus::Unverifiable,
            evidence: Vec::new(),
            proof: None,
            budget_exhausted,
        },
    }
}
