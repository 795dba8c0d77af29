//! Query-specific knowledge graphs: triple stores, rules, and forward
//! chaining to a fixpoint.

mod graph;
mod kb;
mod rules;

pub use graph::{
    apply_rules, build_graph, build_graph_with_cap, collect_entities, mine_relations, Edge, EdgeProvenance,
    KnowledgeGraph, DEFAULT_HOPS, DEFAULT_INFERENCE_CAP,
};
pub use kb::{Declarations, KnowledgeBase};
pub use rules::{Constraint, Rule, RuleSet};
