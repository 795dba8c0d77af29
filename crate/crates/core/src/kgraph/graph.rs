use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::logic::{unify_with, Literal, Substitution};
use crate::model::{Claim, EntityId, FactKey, KnowledgeState, Object, QueryContext, Triple};

use super::kb::KnowledgeBase;
use super::rules::{Rule, RuleSet};

pub const DEFAULT_HOPS: usize = 2;
pub const DEFAULT_INFERENCE_CAP: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeProvenance {
    Mined,
    Inferred,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub triple: Triple,
    pub provenance: EdgeProvenance,
}

/// Query-specific entity/relation graph.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KnowledgeGraph {
    vertices: BTreeSet<EntityId>,
    edges: BTreeMap<FactKey, Edge>,
    hop_index: BTreeMap<EntityId, BTreeSet<EntityId>>,
    by_predicate: BTreeMap<EntityId, BTreeSet<FactKey>>,
}

impl KnowledgeGraph {
    pub fn new(vertices: impl IntoIterator<Item = EntityId>) -> Self {
        KnowledgeGraph {
            vertices: vertices.into_iter().collect(),
            ..Default::default()
        }
    }

    /// Graph over mined edges; vertices are the seeds plus every entity endpoint.
    pub fn from_triples(seeds: impl IntoIterator<Item = EntityId>, triples: impl IntoIterator<Item = Triple>) -> Self {
        let mut g = KnowledgeGraph::new(seeds);
        for t in triples {
            g.insert(t, EdgeProvenance::Mined);
        }
        g
    }

    /// Mined graph over a knowledge state's facts, closed under `rules`.
    pub fn from_state(state: &KnowledgeState, rules: &RuleSet) -> Result<Self> {
        apply_rules(
            &KnowledgeGraph::from_triples([], state.facts().cloned()),
            rules,
            DEFAULT_INFERENCE_CAP,
        )
    }

    fn insert(&mut self, triple: Triple, provenance: EdgeProvenance) {
        let key = triple.key();
        self.vertices.insert(triple.subject.clone());
        if let Object::Entity(o) = &triple.object {
            self.vertices.insert(o.clone());
            self.hop_index.entry(triple.subject.clone()).or_default().insert(o.clone());
            self.hop_index.entry(o.clone()).or_default().insert(triple.subject.clone());
        }
        self.by_predicate.entry(triple.predicate.clone()).or_default().insert(key.clone());
        self.edges.insert(key, Edge { triple, provenance });
    }

    pub fn vertices(&self) -> &BTreeSet<EntityId> {
        &self.vertices
    }

    /// Edges in key order.
    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values()
    }

    pub fn edge(&self, key: &FactKey) -> Option<&Edge> {
        self.edges.get(key)
    }

    pub fn contains(&self, key: &FactKey) -> bool {
        self.edges.contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn neighbors(&self, entity: &EntityId) -> impl Iterator<Item = &EntityId> {
        self.hop_index.get(entity).into_iter().flatten()
    }

    pub fn with_predicate<'a>(&'a self, predicate: &EntityId) -> impl Iterator<Item = &'a Edge> + 'a {
        self.by_predicate
            .get(predicate)
            .into_iter()
            .flatten()
            .map(|k| &self.edges[k])
    }

    /// Objects of `predicate(subject, _)` edges, highest confidence first.
    pub fn objects(&self, subject: &EntityId, predicate: &EntityId) -> Vec<&Triple> {
        let mut out: Vec<&Triple> = self
            .with_predicate(predicate)
            .map(|e| &e.triple)
            .filter(|t| &t.subject == subject)
            .collect();
        out.sort_by(|a, b| b.confidence().total_cmp(&a.confidence()).then_with(|| a.object.cmp(&b.object)));
        out
    }

    pub fn inferred_count(&self) -> usize {
        self.edges.values().filter(|e| e.provenance == EdgeProvenance::Inferred).count()
    }
}

/// Subjects and entity objects of the claims, plus the context's mentions.
pub fn collect_entities(context: &QueryContext, claims: &[Claim]) -> BTreeSet<EntityId> {
    let mut out: BTreeSet<EntityId> = context.mentioned_entities.iter().cloned().collect();
    for c in claims {
        out.insert(c.subject().clone());
        if let Some(o) = c.object().as_entity() {
            out.insert(o.clone());
        }
    }
    out
}

/// KB triples touching any entity within `hops` edges of a seed.
pub fn mine_relations(entities: &BTreeSet<EntityId>, kb: &KnowledgeBase, hops: usize) -> Vec<Triple> {
    let mut dist: BTreeMap<&EntityId, usize> = BTreeMap::new();
    let mut queue: VecDeque<&EntityId> = VecDeque::new();
    for e in entities {
        dist.insert(e, 0);
        queue.push_back(e);
    }
    while let Some(e) = queue.pop_front() {
        let d = dist[e];
        if d == hops {
            continue;
        }
        for t in kb.touching(e) {
            let next = if &t.subject == e {
                t.object.as_entity()
            } else {
                Some(&t.subject)
            };
            if let Some(n) = next {
                if !dist.contains_key(n) {
                    dist.insert(n, d + 1);
                    queue.push_back(n);
                }
            }
        }
    }
    let mut keys = BTreeSet::new();
    for e in dist.keys() {
        for t in kb.touching(e) {
            keys.insert(t.key());
        }
    }
    keys.into_iter().filter_map(|k| kb.get(&k).cloned()).collect()
}

/// Body matches of `rule` against the graph: substitutions and the weakest
/// matched edge confidence.
fn matches(rule: &Rule, graph: &KnowledgeGraph) -> Vec<(Substitution, f64)> {
    let mut out = Vec::new();
    extend_match(&rule.body, graph, Substitution::new(), 1.0, &mut out);
    out
}

fn extend_match(
    body: &[Literal],
    graph: &KnowledgeGraph,
    subst: Substitution,
    confidence: f64,
    out: &mut Vec<(Substitution, f64)>,
) {
    let Some((first, rest)) = body.split_first() else {
        out.push((subst, confidence));
        return;
    };
    let lit = first.apply(&subst);
    match lit.eval() {
        Some(true) => return extend_match(rest, graph, subst, confidence, out),
        Some(false) => return,
        None => {}
    }
    let Ok(pred) = EntityId::new(lit.predicate.name()) else {
        return;
    };
    for edge in graph.with_predicate(&pred) {
        let edge_lit = Literal::from_triple(&edge.triple, false);
        if let Some(s) = unify_with(&lit, &edge_lit, subst.clone()) {
            extend_match(rest, graph, s, confidence.min(edge.triple.confidence()), out);
        }
    }
}

/// Forward chaining to fixpoint. Inferred edges take the minimum confidence
/// of their body edges (the best derivation wins); mined edges are never
/// overwritten.
pub fn apply_rules(graph: &KnowledgeGraph, rules: &RuleSet, cap: usize) -> Result<KnowledgeGraph> {
    let mut g = graph.clone();
    let mut inferred = g.inferred_count();
    loop {
        let mut changed = false;
        for rule in &rules.rules {
            let mut derived: Vec<(Triple, f64)> = Vec::new();
            for (subst, conf) in matches(rule, &g) {
                let head = rule.head.apply(&subst);
                if head.eval().is_some() {
                    continue;
                }
                if let Some(t) = head.to_triple() {
                    derived.push((t, conf));
                }
            }
            for (t, conf) in derived {
                let key = t.key();
                match g.edges.get_mut(&key) {
                    Some(existing) => {
                        if existing.provenance == EdgeProvenance::Inferred && conf > existing.triple.confidence() {
                            existing.triple = t.with_confidence(conf)?;
                            changed = true;
                        }
                    }
                    None => {
                        inferred += 1;
                        if inferred > cap {
                            return Err(Error::FixpointBudgetExceeded { cap });
                        }
                        g.insert(t.with_confidence(conf)?, EdgeProvenance::Inferred);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return Ok(g);
        }
    }
}

/// Entity collection, relation mining, then rule closure.
pub fn build_graph(
    context: &QueryContext,
    claims: &[Claim],
    kb: &KnowledgeBase,
    rules: &RuleSet,
    hops: usize,
) -> Result<KnowledgeGraph> {
    build_graph_with_cap(context, claims, kb, rules, hops, DEFAULT_INFERENCE_CAP)
}

pub fn build_graph_with_cap(
    context: &QueryContext,
    claims: &[Claim],
    kb: &KnowledgeBase,
    rules: &RuleSet,
    hops: usize,
    cap: usize,
) -> Result<KnowledgeGraph> {
    let entities = collect_entities(context, claims);
    let mined = mine_relations(&entities, kb, hops);
    apply_rules(&KnowledgeGraph::from_triples(entities, mined), rules, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kgraph::Declarations;
    use crate::model::{Polarity, Span};

    fn fixture() -> KnowledgeBase {
        KnowledgeBase::from_triples(
            Declarations::new(),
            [
                Triple::parse("einstein", "born_in", "ulm").unwrap(),
                Triple::parse("ulm", "located_in", "germany").unwrap(),
            ],
        )
        .unwrap()
    }

    fn composition() -> RuleSet {
        RuleSet::from_rules(vec![
            Rule::parse("born_in(?x,?y) & located_in(?y,?z) -> born_in_country(?x,?z)").unwrap()
        ])
    }

    fn ids(names: &[&str]) -> BTreeSet<EntityId> {
        names.iter().map(|n| EntityId::new(n).unwrap()).collect()
    }

    fn claim(s: &str, p: &str, o: &str) -> Claim {
        let t = Triple::parse(s, p, o).unwrap();
        Claim::from_triple(&t, Polarity::Asserted, Span::default())
    }

    #[test]
    fn entities_from_claims_skip_literals() {
        let ctx = QueryContext::default();
        assert_eq!(collect_entities(&ctx, &[claim("einstein", "born_in", "ulm")]), ids(&["einstein", "ulm"]));
        assert!(collect_entities(&ctx, &[]).is_empty());
        assert_eq!(collect_entities(&ctx, &[claim("einstein", "born_year", "1879")]), ids(&["einstein"]));
    }

    #[test]
    fn mining_respects_hop_radius() {
        let kb = fixture();
        let zero = mine_relations(&ids(&["einstein"]), &kb, 0);
        assert_eq!(zero, vec![Triple::parse("einstein", "born_in", "ulm").unwrap()]);
        assert_eq!(mine_relations(&ids(&["einstein"]), &kb, 1).len(), 2);
        assert!(mine_relations(&BTreeSet::new(), &kb, 3).is_empty());
    }

    #[test]
    fn composition_rule_adds_one_edge() {
        let kb = fixture();
        let g = KnowledgeGraph::from_triples(ids(&["einstein"]), mine_relations(&ids(&["einstein"]), &kb, 1));
        let closed = apply_rules(&g, &composition(), DEFAULT_INFERENCE_CAP).unwrap();
        assert_eq!(closed.len(), 3);
        let key = Triple::parse("einstein", "born_in_country", "germany").unwrap().key();
        let edge = closed.edge(&key).unwrap();
        assert_eq!(edge.provenance, EdgeProvenance::Inferred);
        assert_eq!(edge.triple.confidence(), 1.0);
        assert_eq!(apply_rules(&closed, &composition(), DEFAULT_INFERENCE_CAP).unwrap(), closed);
        assert_eq!(apply_rules(&g, &RuleSet::new(), DEFAULT_INFERENCE_CAP).unwrap(), g);
    }

    #[test]
    fn inferred_confidence_is_weakest_link() {
        let kb = KnowledgeBase::from_triples(
            Declarations::new(),
            [
                Triple::parse("einstein", "born_in", "ulm").unwrap().with_confidence(0.9).unwrap(),
                Triple::parse("ulm", "located_in", "germany").unwrap().with_confidence(0.7).unwrap(),
            ],
        )
        .unwrap();
        let g = build_graph(&QueryContext::default(), &[claim("einstein", "born_in", "ulm")], &kb, &composition(), 1).unwrap();
        let key = Triple::parse("einstein", "born_in_country", "germany").unwrap().key();
        assert_eq!(g.edge(&key).unwrap().triple.confidence(), 0.7);
    }

    #[test]
    fn build_graph_composes_steps() {
        let kb = fixture();
        let g = build_graph(&QueryContext::default(), &[claim("einstein", "born_in", "ulm")], &kb, &composition(), 1).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.inferred_count(), 1);
        let empty = KnowledgeBase::default();
        let g = build_graph(&QueryContext::default(), &[claim("einstein", "born_in", "ulm")], &empty, &composition(), 1).unwrap();
        assert!(g.is_empty());
        assert_eq!(g.vertices(), &ids(&["einstein", "ulm"]));
    }

    #[test]
    fn cap_is_enforced() {
        let kb = fixture();
        let g = build_graph_with_cap(&QueryContext::default(), &[claim("einstein", "born_in", "ulm")], &kb, &composition(), 1, 0);
        assert!(matches!(g, Err(Error::FixpointBudgetExceeded { cap: 0 })));
    }

    #[test]
    fn builtin_conditions_filter_matches() {
        let kb = KnowledgeBase::from_triples(
            Declarations::new(),
            [
                Triple::parse("ada", "born_year", "1815").unwrap(),
                Triple::parse("alan", "born_year", "1912").unwrap(),
            ],
        )
        .unwrap();
        let rules = RuleSet::from_rules(vec![Rule::parse("born_year(?x, ?y) & lt(?y, 1900) -> era(?x, nineteenth_century)").unwrap()]);
        let g = build_graph(&QueryContext::default(), &[], &kb, &rules, 0).unwrap();
        assert!(g.is_empty());
        let seeds = ids(&["ada", "alan"]);
        let g = apply_rules(&KnowledgeGraph::from_triples(seeds.clone(), mine_relations(&seeds, &kb, 0)), &rules, 10).unwrap();
        assert_eq!(g.inferred_count(), 1);
        assert!(g.contains(&Triple::parse("ada", "era", "nineteenth_century").unwrap().key()));
    }

    #[test]
    fn temporal_chain_over_event_constants() {
        let kb = KnowledgeBase::from_triples(
            Declarations::new(),
            [
                Triple::parse("a", "before", "b").unwrap(),
                Triple::parse("b", "before", "c").unwrap(),
            ],
        )
        .unwrap();
        let seeds = ids(&["a"]);
        let g = apply_rules(
            &KnowledgeGraph::from_triples(seeds.clone(), mine_relations(&seeds, &kb, 2)),
            &RuleSet::temporal(),
            DEFAULT_INFERENCE_CAP,
        )
        .unwrap();
        assert!(g.contains(&Triple::parse("a", "before", "c").unwrap().key()));
        assert!(g.contains(&Triple::parse("c", "after", "a").unwrap().key()));
    }
}
