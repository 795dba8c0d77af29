//! Synthetic corpora, batch evaluation and detection metrics.

mod corpus;
mod metrics;
mod world;

pub use corpus::{load_dataset, perturb_corpus, read_dataset, write_dataset, Label, LabeledExample, MAX_FACTS_PER_RESPONSE};
pub use metrics::{
    auc, evaluate, harmonic_f1, metrics_from_scores, metrics_value, score_dataset, ClaimCounts, Counts, LatencyStats,
    Metrics, ScoredExample,
};
pub use world::{synthetic_world, world_rules, WorldSpec};
