//! Canonical JSON documents: keys sorted, reals with six decimals, two-space
//! indentation, trailing newline.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::fusion::FusionWeights;
use crate::logic::{parse_clause, parse_term, ClauseOrigin, ProofStep, ProofTrace, Substitution};
use crate::model::{
    Claim, ClaimId, ClaimStatus, ClaimVerdict, EntityId, Object, ObjectKind, Polarity, Span, Triple, Verdict,
    VerdictReport,
};

/// Writes `value` canonically. Floating-point numbers are printed with six
/// decimals; integers as integers.
pub fn to_canonical(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(value: &Value, indent: usize, out: &mut String) {
    match value {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&value.to_string()),
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => out.push_str(&format!("{f:.6}")),
            _ => out.push_str(&n.to_string()),
        },
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&"  ".repeat(indent + 1));
                write_value(item, indent + 1, out);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, key) in keys.iter().enumerate() {
                out.push_str(&"  ".repeat(indent + 1));
                out.push_str(&Value::String((*key).clone()).to_string());
                out.push_str(": ");
                write_value(&map[*key], indent + 1, out);
                if i + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
    }
}

fn real(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn triple_value(t: &Triple) -> Value {
    json!({
        "subject": t.subject.as_str(),
        "predicate": t.predicate.as_str(),
        "object": t.object.to_string(),
        "object_kind": t.object.kind().name(),
        "confidence": real(t.confidence()),
    })
}

fn proof_value(trace: &ProofTrace) -> Value {
    let mut steps: Vec<Value> = trace
        .inputs
        .iter()
        .map(|(id, c)| {
            json!({
                "id": id,
                "rule": "input",
                "origin": c.origin.name(),
                "clause": c.to_string(),
            })
        })
        .collect();
    for step in &trace.steps {
        steps.push(match step {
            ProofStep::Resolution {
                id,
                left,
                left_literal,
                right,
                right_literal,
                unifier,
                resolvent,
            } => {
                let u: Map<String, Value> = unifier.iter().map(|(v, t)| (v.to_string(), Value::String(t.to_string()))).collect();
                json!({
                    "id": id,
                    "rule": "resolution",
                    "left": left,
                    "left_literal": left_literal,
                    "right": right,
                    "right_literal": right_literal,
                    "unifier": u,
                    "resolvent": resolvent.to_string(),
                })
            }
            ProofStep::Evaluation { id, parent, resolvent } => json!({
                "id": id,
                "rule": "evaluation",
                "parent": parent,
                "resolvent": resolvent.to_string(),
            }),
        });
    }
    Value::Array(steps)
}

fn claim_value(c: &ClaimVerdict) -> Value {
    let claim = &c.claim;
    json!({
        "id": claim.id.as_str(),
        "subject": claim.subject().as_str(),
        "predicate": claim.predicate().as_str(),
        "object": claim.object().to_string(),
        "object_kind": claim.object().kind().name(),
        "polarity": claim.polarity.name(),
        "span": [claim.span.start, claim.span.end],
        "status": c.status.name(),
        "evidence": c.evidence.iter().map(triple_value).collect::<Vec<_>>(),
        "proof": c.proof.as_ref().map(proof_value).unwrap_or_else(|| json!([])),
        "consistency": c.consistency.map(real).unwrap_or(Value::Null),
    })
}

/// The report as a JSON value.
pub fn report_value(report: &VerdictReport) -> Value {
    json!({
        "score": real(report.score),
        "verdict": report.verdict.name(),
        "p_causal": real(report.p_causal),
        "p_symbolic": real(report.p_symbolic),
        "uncertainty": real(report.uncertainty),
        "weights": {
            "alpha": real(report.weights.alpha),
            "beta": real(report.weights.beta),
            "gamma": real(report.weights.gamma),
            "bias": real(report.weights.bias),
        },
        "claims": report.per_claim.iter().map(claim_value).collect::<Vec<_>>(),
        "trace": report.trace,
    })
}

/// Canonical text of a report; equal reports give identical bytes.
pub fn serialize_report(report: &VerdictReport) -> String {
    to_canonical(&report_value(report))
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Document(msg.into())
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| bad(format!("missing field {key:?}")))
}

fn f64_field(v: &Value, key: &str) -> Result<f64> {
    field(v, key)?.as_f64().ok_or_else(|| bad(format!("{key} is not a number")))
}

fn usize_field(v: &Value, key: &str) -> Result<usize> {
    field(v, key)?
        .as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| bad(format!("{key} is not an unsigned integer")))
}

fn str_field<'a>(v: &'a Value, key: &str) -> Result<&'a str> {
    field(v, key)?.as_str().ok_or_else(|| bad(format!("{key} is not a string")))
}

fn array_field<'a>(v: &'a Value, key: &str) -> Result<&'a Vec<Value>> {
    field(v, key)?.as_array().ok_or_else(|| bad(format!("{key} is not an array")))
}

fn object_of(v: &Value) -> Result<Object> {
    let kind = ObjectKind::from_name(str_field(v, "object_kind")?).ok_or_else(|| bad("unknown object_kind"))?;
    Object::parse_kind(kind, str_field(v, "object")?)
}

fn parse_triple(v: &Value) -> Result<Triple> {
    Triple::new(
        EntityId::new(str_field(v, "subject")?)?,
        EntityId::new(str_field(v, "predicate")?)?,
        object_of(v)?,
        f64_field(v, "confidence")?,
    )
}

fn parse_proof(steps: &[Value]) -> Result<Option<ProofTrace>> {
    if steps.is_empty() {
        return Ok(None);
    }
    let mut trace = ProofTrace::default();
    for s in steps {
        let id = usize_field(s, "id")?;
        match str_field(s, "rule")? {
            "input" => {
                let origin = ClauseOrigin::from_name(str_field(s, "origin")?).ok_or_else(|| bad("unknown clause origin"))?;
                trace.inputs.push((id, parse_clause(str_field(s, "clause")?, origin)?));
            }
            "resolution" => {
                let mut unifier = Substitution::new();
                let map = field(s, "unifier")?.as_object().ok_or_else(|| bad("unifier is not an object"))?;
                for (var, term) in map {
                    let term = term.as_str().ok_or_else(|| bad("unifier term is not a string"))?;
                    unifier.bind(var, parse_term(term)?);
                }
                trace.steps.push(ProofStep::Resolution {
                    id,
                    left: usize_field(s, "left")?,
                    left_literal: usize_field(s, "left_literal")?,
                    right: usize_field(s, "right")?,
                    right_literal: usize_field(s, "right_literal")?,
                    unifier,
                    resolvent: parse_clause(str_field(s, "resolvent")?, ClauseOrigin::Resolvent)?,
                });
            }
            "evaluation" => trace.steps.push(ProofStep::Evaluation {
                id,
                parent: usize_field(s, "parent")?,
                resolvent: parse_clause(str_field(s, "resolvent")?, ClauseOrigin::Resolvent)?,
            }),
            other => return Err(bad(format!("unknown proof rule {other:?}"))),
        }
    }
    Ok(Some(trace))
}

fn parse_claim(v: &Value) -> Result<ClaimVerdict> {
    let polarity = Polarity::from_name(str_field(v, "polarity")?).ok_or_else(|| bad("unknown polarity"))?;
    let span = array_field(v, "span")?;
    let [start, end] = span.as_slice() else {
        return Err(bad("span must have two entries"));
    };
    let (start, end) = match (start.as_u64(), end.as_u64()) {
        (Some(s), Some(e)) if s <= e => (s as usize, e as usize),
        _ => return Err(bad("bad span")),
    };
    let claim = Claim::new(
        EntityId::new(str_field(v, "subject")?)?,
        EntityId::new(str_field(v, "predicate")?)?,
        object_of(v)?,
        polarity,
        Span::new(start, end),
    );
    if claim.id != ClaimId::from_hex(str_field(v, "id")?)? {
        return Err(bad(format!("claim id does not match the content of {claim}")));
    }
    let consistency = match field(v, "consistency")? {
        Value::Null => None,
        x => Some(x.as_f64().ok_or_else(|| bad("consistency is not a number"))?),
    };
    Ok(ClaimVerdict {
        claim,
        status: ClaimStatus::from_name(str_field(v, "status")?).ok_or_else(|| bad("unknown status"))?,
        evidence: array_field(v, "evidence")?.iter().map(parse_triple).collect::<Result<_>>()?,
        proof: parse_proof(array_field(v, "proof")?)?,
        consistency,
    })
}

/// Inverse of [`serialize_report`].
pub fn parse_report(text: &str) -> Result<VerdictReport> {
    let v: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let w = field(&v, "weights")?;
    Ok(VerdictReport {
        score: f64_field(&v, "score")?,
        verdict: Verdict::from_name(str_field(&v, "verdict")?).ok_or_else(|| bad("unknown verdict"))?,
        p_causal: f64_field(&v, "p_causal")?,
        p_symbolic: f64_field(&v, "p_symbolic")?,
        uncertainty: f64_field(&v, "uncertainty")?,
        weights: FusionWeights {
            alpha: f64_field(w, "alpha")?,
            beta: f64_field(w, "beta")?,
            gamma: f64_field(w, "gamma")?,
            bias: f64_field(w, "bias")?,
        },
        per_claim: array_field(&v, "claims")?.iter().map(parse_claim).collect::<Result<_>>()?,
        trace: array_field(&v, "trace")?
            .iter()
            .map(|t| t.as_str().map(str::to_string).ok_or_else(|| bad("trace entries must be strings")))
            .collect::<Result<_>>()?,
    })
}
