use std::collections::BTreeSet;

use crate::kgraph::{Declarations, KnowledgeGraph, RuleSet};
use crate::model::{EntityId, ObjectKind, Triple};

use super::syntax::{Builtin, Clause, ClauseOrigin, Literal, Predicate, Term};

/// Where a premise clause came from.
#[derive(Clone, Debug, PartialEq)]
pub enum PremiseSource {
    Edge(Triple),
    /// Index into `RuleSet::rules`.
    Rule(usize),
    /// Index into `RuleSet::constraints`.
    Constraint(usize),
    /// Functional-predicate schema for the named predicate.
    Functional(EntityId),
}

/// Clauses selected for one goal, each paired with its source.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Premises {
    pub clauses: Vec<Clause>,
    pub sources: Vec<PremiseSource>,
}

impl Premises {
    fn push(&mut self, clause: Clause, source: PremiseSource) {
        self.clauses.push(clause);
        self.sources.push(source);
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.sources.iter().filter(|s| matches!(s, PremiseSource::Edge(_))).count()
    }
}

/// `~p(?x, ?y) | ~p(?x, ?z) | same(?y, ?z)` where `same` suits the range.
pub fn functional_clause(predicate: &EntityId, range: Option<ObjectKind>) -> Clause {
    let same = match range {
        Some(ObjectKind::Number) => Builtin::eq_num(super::syntax::DEFAULT_EQ_TOLERANCE),
        Some(ObjectKind::Date) => Builtin::SameTime,
        _ => Builtin::Eq,
    };
    let p = Predicate::Named(predicate.clone());
    let atom = |o: &str| Literal::new(p.clone(), vec![Term::var("x"), Term::var(o)], true);
    Clause::new(
        vec![
            atom("y"),
            atom("z"),
            Literal::positive(Predicate::Builtin(same), vec![Term::var("y"), Term::var("z")]),
        ],
        ClauseOrigin::Premise,
    )
}

pub fn rule_clause(rule: &crate::kgraph::Rule) -> Clause {
    let mut lits: Vec<Literal> = rule.body.iter().map(Literal::negate).collect();
    lits.push(rule.head.clone());
    Clause::new(lits, ClauseOrigin::Premise)
}

pub fn constraint_clause(constraint: &crate::kgraph::Constraint) -> Clause {
    Clause::new(constraint.body.iter().map(Literal::negate).collect(), ClauseOrigin::Premise)
}

/// Selects the premises relevant to `goal`.
///
/// Edges are kept when an endpoint lies in the goal's neighbourhood (its
/// constants and their direct neighbours) or when their predicate can feed
/// the goal's predicate through the rules. Rules and constraints are kept when
/// they mention a kept predicate; every functional declaration contributes
/// its contradiction schema.
pub fn extract_premises(
    graph: &KnowledgeGraph,
    goal: &Literal,
    rules: &RuleSet,
    declarations: &Declarations,
) -> Premises {
    let mut neighbourhood: BTreeSet<&EntityId> = BTreeSet::new();
    for t in &goal.args {
        if let Term::Const(e) = t {
            neighbourhood.insert(e);
            neighbourhood.extend(graph.neighbors(e));
        }
    }

    let mut feeding: BTreeSet<&str> = BTreeSet::from([goal.predicate.name()]);
    loop {
        let before = feeding.len();
        for r in &rules.rules {
            if feeding.contains(r.head.predicate.name()) {
                feeding.extend(r.body.iter().map(|l| l.predicate.name()));
            }
        }
        if feeding.len() == before {
            break;
        }
    }

    let mut premises = Premises::default();
    let mut predicates: BTreeSet<String> = feeding.iter().map(|s| s.to_string()).collect();
    for edge in graph.edges() {
        let t = &edge.triple;
        let near = neighbourhood.contains(&t.subject) || t.object.as_entity().is_some_and(|o| neighbourhood.contains(o));
        if near || feeding.contains(t.predicate.as_str()) {
            predicates.insert(t.predicate.as_str().to_string());
            premises.push(Clause::unit(Literal::from_triple(t, false), ClauseOrigin::Premise), PremiseSource::Edge(t.clone()));
        }
    }
    for (i, r) in rules.rules.iter().enumerate() {
        if r.predicates().any(|p| predicates.contains(p)) {
            premises.push(rule_clause(r), PremiseSource::Rule(i));
        }
    }
    for (i, c) in rules.constraints.iter().enumerate() {
        if c.predicates().any(|p| predicates.contains(p)) {
            premises.push(constraint_clause(c), PremiseSource::Constraint(i));
        }
    }
    for p in declarations.functional() {
        premises.push(functional_clause(p, declarations.range(p)), PremiseSource::Functional(p.clone()));
    }
    premises
}
