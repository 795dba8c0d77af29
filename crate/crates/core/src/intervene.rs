//! Prevention by regeneration, correction by editing, and explanation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::{claims_from_text, has_directives, render_triple, ClaimGrammar};
use crate::kgraph::{Declarations, KnowledgeGraph};
use crate::model::{ClaimId, ClaimStatus, ClaimVerdict, Polarity, QueryContext, Response, Thresholds, Triple, VerdictReport};
use crate::pipeline::{Pipeline, Verification};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionMode {
    ReplaceObject,
    DeleteClaim,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterventionPolicy {
    pub prevent_threshold: f64,
    pub max_regenerations: usize,
    pub correction_mode: CorrectionMode,
}

impl Default for InterventionPolicy {
    fn default() -> Self {
        InterventionPolicy {
            prevent_threshold: Thresholds::default().reject,
            max_regenerations: 3,
            correction_mode: CorrectionMode::ReplaceObject,
        }
    }
}

impl InterventionPolicy {
    /// Prevention must not trigger below the accept threshold.
    pub fn validate(&self, thresholds: &Thresholds) -> Result<()> {
        if !(0.0..=1.0).contains(&self.prevent_threshold) || self.prevent_threshold < thresholds.accept {
            return Err(Error::InvalidArgument(format!(
                "prevent threshold {} must lie in [{}, 1]",
                self.prevent_threshold, thresholds.accept
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Prevention {
    pub verification: Verification,
    pub regenerated: bool,
    /// Regeneration was required but no candidate fell below the threshold
    /// (or the budget was zero); the best candidate is returned.
    pub budget_exhausted: bool,
    pub candidates: usize,
}

/// Regenerates under the knowledge state when the score reaches the policy
/// threshold, keeping the lowest-scoring candidate (the original included).
pub fn prevent(
    pipeline: &Pipeline,
    context: &QueryContext,
    original: Verification,
    policy: &InterventionPolicy,
) -> Result<Prevention> {
    if original.report.score < policy.prevent_threshold {
        return Ok(Prevention {
            verification: original,
            regenerated: false,
            budget_exhausted: false,
            candidates: 0,
        });
    }
    let state = original.state.clone();
    let mut best = original;
    let mut regenerated = false;
    for i in 0..policy.max_regenerations {
        let seed = pipeline.scm.seeds.u_y.wrapping_add(i as u64 + 1);
        let candidate = pipeline.generator.generate(context, &state, seed)?;
        let verified = pipeline.verify_response(context, candidate)?;
        if verified.report.score < best.report.score {
            best = verified;
            regenerated = true;
        }
        if best.report.score < policy.prevent_threshold {
            break;
        }
    }
    let budget_exhausted = best.report.score >= policy.prevent_threshold;
    Ok(Prevention {
        verification: best,
        regenerated,
        budget_exhausted,
        candidates: policy.max_regenerations,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Correction {
    pub response: Response,
    pub notes: Vec<String>,
}

fn sentence_for(triple: &Triple, directives: bool, grammar: &ClaimGrammar) -> Option<String> {
    if directives {
        Some(format!("@claim({}, {}, {})", triple.subject, triple.predicate, triple.object))
    } else {
        render_triple(triple, Polarity::Asserted, grammar)
    }
}

/// Rewrites or deletes the sentences of contradicted claims.
///
/// In replace mode an asserted claim on a functional predicate gets the
/// graph's object for that subject (the most confident one); everything else
/// that is contradicted is deleted, with a note.
pub fn correct(
    response: &Response,
    per_claim: &[ClaimVerdict],
    graph: &KnowledgeGraph,
    declarations: &Declarations,
    grammar: &ClaimGrammar,
    policy: &InterventionPolicy,
) -> Result<Correction> {
    let status: BTreeMap<&ClaimId, ClaimStatus> = per_claim.iter().map(|c| (&c.claim.id, c.status)).collect();
    let directives = has_directives(&response.text);
    let mut edits: Vec<(usize, usize, String)> = Vec::new();
    let mut notes = Vec::new();
    for claim in &response.claims {
        if status.get(&claim.id) != Some(&ClaimStatus::Contradicted) {
            continue;
        }
        let replacement = match policy.correction_mode {
            CorrectionMode::DeleteClaim => None,
            CorrectionMode::ReplaceObject if claim.is_negated() => None,
            CorrectionMode::ReplaceObject => {
                if declarations.is_functional(claim.predicate()) {
                    graph
                        .objects(claim.subject(), claim.predicate())
                        .first()
                        .filter(|t| t.object != *claim.object())
                        .and_then(|t| sentence_for(t, directives, grammar))
                } else {
                    None
                }
            }
        };
        let (start, mut end) = (claim.span.start, claim.span.end);
        match replacement {
            Some(sentence) => {
                notes.push(format!("replaced {claim} with {sentence:?}"));
                edits.push((start, end, sentence));
            }
            None => {
                if policy.correction_mode == CorrectionMode::ReplaceObject {
                    notes.push(format!("no replacement for {claim}: sentence deleted"));
                } else {
                    notes.push(format!("deleted {claim}"));
                }
                let rest = &response.text[end..];
                end += rest.len() - rest.trim_start().len();
                edits.push((start, end, String::new()));
            }
        }
    }
    if edits.is_empty() {
        return Ok(Correction {
            response: response.clone(),
            notes,
        });
    }
    edits.sort_by(|a, b| b.0.cmp(&a.0));
    edits.dedup_by_key(|e| e.0);
    let mut text = response.text.clone();
    for (start, end, replacement) in edits {
        text.replace_range(start..end, &replacement);
    }
    let text = text.trim_end().to_string();
    let claims = claims_from_text(&text, grammar)?.claims;
    Ok(Correction {
        response: Response {
            text,
            claims,
            claim_confidences: None,
        },
        notes,
    })
}

/// Plain-text account of a report: the score decomposition, then one section
/// per claim with its evidence, proof and counterfactual consistency.
pub fn explain(report: &VerdictReport) -> String {
    let mut out = String::new();
    let w = &report.weights;
    let _ = writeln!(out, "verdict: {} (score {:.6})", report.verdict.name(), report.score);
    let _ = writeln!(out, "score decomposition:");
    let _ = writeln!(out, "  alpha * p_causal    = {:.6} * {:.6} = {:.6}", w.alpha, report.p_causal, w.alpha * report.p_causal);
    let _ = writeln!(out, "  beta  * p_symbolic  = {:.6} * {:.6} = {:.6}", w.beta, report.p_symbolic, w.beta * report.p_symbolic);
    let _ = writeln!(out, "  gamma * uncertainty = {:.6} * {:.6} = {:.6}", w.gamma, report.uncertainty, w.gamma * report.uncertainty);
    if report.per_claim.is_empty() {
        let _ = writeln!(out, "\nno verifiable claims extracted");
        return out;
    }
    for (i, c) in report.per_claim.iter().enumerate() {
        let _ = writeln!(out, "\nclaim {}: {} [{}]", i + 1, c.claim, c.status.name());
        if let Some(consistency) = c.consistency {
            let _ = writeln!(out, "  counterfactual consistency: {consistency:.6}");
        }
        if !c.evidence.is_empty() {
            let _ = writeln!(out, "  evidence:");
            for t in &c.evidence {
                let _ = writeln!(out, "    {t} (confidence {:.6})", t.confidence());
            }
        }
        if let Some(proof) = &c.proof {
            let heading = if c.status == ClaimStatus::Contradicted { "refutation" } else { "proof" };
            let _ = writeln!(out, "  {heading}:");
            for line in proof.replay() {
                let _ = writeln!(out, "    {line}");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::FusionWeights;
    use crate::model::Verdict;

    #[test]
    fn explain_empty_report() {
        let r = VerdictReport {
            score: 0.1,
            verdict: Verdict::Accept,
            p_causal: 0.0,
            p_symbolic: 0.0,
            uncertainty: 0.5,
            weights: FusionWeights::new(0.2, 0.6, 0.2, -0.35).unwrap(),
            per_claim: vec![],
            trace: vec![],
        };
        let text = explain(&r);
        assert!(text.contains("no verifiable claims extracted"));
        assert!(text.contains("gamma * uncertainty = 0.200000 * 0.500000 = 0.100000"));
    }

    #[test]
    fn policy_validation() {
        let t = Thresholds::default();
        assert!(InterventionPolicy::default().validate(&t).is_ok());
        let low = InterventionPolicy {
            prevent_threshold: 0.1,
            ..Default::default()
        };
        assert!(low.validate(&t).is_err());
    }
}
