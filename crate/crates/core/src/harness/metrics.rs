use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::harness::corpus::LabeledExample;
use crate::model::ClaimStatus;
use crate::pipeline::Pipeline;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Counts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatencyStats {
    pub mean: f64,
    pub p95: f64,
}

/// Per-claim tallies against the gold contradicted claims.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClaimCounts {
    pub gold: usize,
    pub detected: usize,
    pub matched: usize,
}

/// Detection metrics. Entries whose denominator is zero are `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct Metrics {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub auc: Option<f64>,
    pub counts: Counts,
    pub claims: ClaimCounts,
    pub latency: Option<LatencyStats>,
}

impl Metrics {
    /// The named metric, or [`Error::UndefinedMetric`].
    pub fn require(&self, name: &'static str) -> Result<f64> {
        let value = match name {
            "precision" => self.precision,
            "recall" => self.recall,
            "f1" => self.f1,
            "auc" => self.auc,
            _ => return Err(Error::InvalidArgument(format!("unknown metric {name:?}"))),
        };
        value.ok_or(Error::UndefinedMetric(name))
    }
}

/// Harmonic mean of precision and recall; `None` when both are zero.
pub fn harmonic_f1(precision: f64, recall: f64) -> Option<f64> {
    let sum = precision + recall;
    (sum > 0.0).then(|| 2.0 * precision * recall / sum)
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Area under the ROC curve via the Mann-Whitney rank statistic with tied
/// scores given their average rank. `None` without both classes.
pub fn auc(scores: &[(f64, bool)]) -> Option<f64> {
    let pos = scores.iter().filter(|s| s.1).count();
    let neg = scores.len() - pos;
    if pos == 0 || neg == 0 {
        return None;
    }
    let mut sorted: Vec<(f64, bool)> = scores.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j].0 == sorted[i].0 {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        rank_sum += avg_rank * sorted[i..j].iter().filter(|s| s.1).count() as f64;
        i = j;
    }
    let u = rank_sum - (pos * (pos + 1)) as f64 / 2.0;
    Some(u / (pos * neg) as f64)
}

fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let rank = (q * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

/// Scored outcome of one example.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredExample {
    pub id: String,
    pub score: f64,
    pub hallucinated: bool,
    pub gold_claims: usize,
    pub detected_claims: usize,
    pub matched_claims: usize,
    pub p_causal: f64,
    pub p_symbolic: f64,
    pub uncertainty: f64,
    pub seconds: f64,
}

/// Metrics from already scored examples; order does not matter.
pub fn metrics_from_scores(scored: &[ScoredExample], threshold: f64) -> Metrics {
    let mut counts = Counts::default();
    let mut claims = ClaimCounts::default();
    for s in scored {
        match (s.score >= threshold, s.hallucinated) {
            (true, true) => counts.tp += 1,
            (true, false) => counts.fp += 1,
            (false, false) => counts.tn += 1,
            (false, true) => counts.fn_ += 1,
        }
        claims.gold += s.gold_claims;
        claims.detected += s.detected_claims;
        claims.matched += s.matched_claims;
    }
    let precision = ratio(counts.tp, counts.tp + counts.fp);
    let recall = ratio(counts.tp, counts.tp + counts.fn_);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) => harmonic_f1(p, r),
        _ => None,
    };
    let pairs: Vec<(f64, bool)> = scored.iter().map(|s| (s.score, s.hallucinated)).collect();
    let latency = (!scored.is_empty()).then(|| {
        let mut t: Vec<f64> = scored.iter().map(|s| s.seconds).collect();
        t.sort_by(f64::total_cmp);
        LatencyStats {
            mean: t.iter().sum::<f64>() / t.len() as f64,
            p95: nearest_rank(&t, 0.95),
        }
    });
    Metrics {
        precision,
        recall,
        f1,
        auc: auc(&pairs),
        counts,
        claims,
        latency,
    }
}

/// Verifies every example (in parallel) and scores it.
///
/// Latency is wall-clock time around each verify call. Results come back in
/// dataset order.
pub fn score_dataset(pipeline: &Pipeline, dataset: &[LabeledExample]) -> Result<Vec<ScoredExample>> {
    dataset
        .par_iter()
        .map(|e| {
            let context = pipeline.context(&e.context);
            let start = Instant::now();
            let v = pipeline.verify(&context, &e.response)?;
            let seconds = start.elapsed().as_secs_f64();
            let detected: BTreeSet<&str> = v
                .report
                .per_claim
                .iter()
                .filter(|c| c.status == ClaimStatus::Contradicted)
                .map(|c| c.claim.id.as_str())
                .collect();
            let matched = e.gold_contradicted_claims.iter().filter(|g| detected.contains(g.as_str())).count();
            Ok(ScoredExample {
                id: e.id.clone(),
                score: v.report.score,
                hallucinated: e.label.is_hallucinated(),
                gold_claims: e.gold_contradicted_claims.len(),
                detected_claims: detected.len(),
                matched_claims: matched,
                p_causal: v.report.p_causal,
                p_symbolic: v.report.p_symbolic,
                uncertainty: v.report.uncertainty,
                seconds,
            })
        })
        .collect()
}

/// Per-response detection metrics: an example is predicted hallucinated
/// when its score reaches `threshold`.
pub fn evaluate(pipeline: &Pipeline, dataset: &[LabeledExample], threshold: f64) -> Result<Metrics> {
    Ok(metrics_from_scores(&score_dataset(pipeline, dataset)?, threshold))
}

/// Metrics as a JSON value for the canonical document writer. Undefined
/// metrics are omitted; latency is included only when asked for, since it
/// varies between runs.
pub fn metrics_value(metrics: &Metrics, with_latency: bool) -> Value {
    let mut m = Map::new();
    for (name, v) in [
        ("precision", metrics.precision),
        ("recall", metrics.recall),
        ("f1", metrics.f1),
        ("auc", metrics.auc),
    ] {
        if let Some(v) = v {
            m.insert(name.into(), json!(v));
        }
    }
    let c = metrics.counts;
    m.insert("counts".into(), json!({"tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn_}));
    let k = metrics.claims;
    m.insert(
        "claims".into(),
        json!({"gold_contradicted": k.gold, "detected_contradicted": k.detected, "matched": k.matched}),
    );
    if with_latency {
        if let Some(l) = metrics.latency {
            m.insert("latency_seconds".into(), json!({"mean": l.mean, "p95": l.p95}));
        }
    }
    Value::Object(m)
}
