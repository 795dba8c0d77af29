//! Replays a [`ProofTrace`] without using the prover or the unifier.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::prover::{ProofStep, ProofTrace};
use super::syntax::{Clause, Literal, Substitution, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceError {
    pub step: Option<usize>,
    pub message: String,
}

impl fmt::Display for TraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(id) => write!(f, "step {id}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for TraceError {}

fn fail(step: Option<usize>, message: impl Into<String>) -> TraceError {
    TraceError {
        step,
        message: message.into(),
    }
}

fn substitute(term: &Term, unifier: &Substitution) -> Term {
    let mut current = term.clone();
    for _ in 0..=unifier.len() {
        match &current {
            Term::Var(v) => match unifier.get(v) {
                Some(next) if next != &current => current = next.clone(),
                _ => return current,
            },
            _ => return current,
        }
    }
    current
}

fn instantiate(lit: &Literal, unifier: &Substitution) -> Literal {
    Literal {
        negated: lit.negated,
        predicate: lit.predicate.clone(),
        args: lit.args.iter().map(|t| substitute(t, unifier)).collect(),
    }
}

fn primed(lit: &Literal) -> Literal {
    Literal {
        negated: lit.negated,
        predicate: lit.predicate.clone(),
        args: lit
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => Term::Var(format!("{v}'")),
                other => other.clone(),
            })
            .collect(),
    }
}

fn match_terms(a: &Term, b: &Term, map: &mut BTreeMap<String, String>, used: &mut BTreeSet<String>) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => match map.get(x) {
            Some(m) => m == y,
            None if used.contains(y) => false,
            None => {
                map.insert(x.clone(), y.clone());
                used.insert(y.clone());
                true
            }
        },
        (Term::Var(_), _) | (_, Term::Var(_)) => false,
        _ => a == b,
    }
}

fn match_literals(
    a: &[Literal],
    b: &[Literal],
    taken: &mut Vec<bool>,
    map: &BTreeMap<String, String>,
    used: &BTreeSet<String>,
) -> bool {
    let Some((first, rest)) = a.split_first() else {
        return true;
    };
    for (i, cand) in b.iter().enumerate() {
        if taken[i] || cand.negated != first.negated || cand.predicate != first.predicate || cand.args.len() != first.args.len() {
            continue;
        }
        let mut m = map.clone();
        let mut u = used.clone();
        if first.args.iter().zip(&cand.args).all(|(x, y)| match_terms(x, y, &mut m, &mut u)) {
            taken[i] = true;
            if match_literals(rest, b, taken, &m, &u) {
                return true;
            }
            taken[i] = false;
        }
    }
    false
}

/// Whether two literal sets are equal under some bijective variable renaming.
pub(crate) fn variants(a: &[Literal], b: &[Literal]) -> bool {
    let a: BTreeSet<&Literal> = a.iter().collect();
    let b: BTreeSet<&Literal> = b.iter().collect();
    if a.len() != b.len() {
        return false;
    }
    let a: Vec<Literal> = a.into_iter().cloned().collect();
    let b: Vec<Literal> = b.into_iter().cloned().collect();
    let mut taken = vec![false; b.len()];
    match_literals(&a, &b, &mut taken, &BTreeMap::new(), &BTreeSet::new())
}

/// Checks that every step follows from its parents and that the trace ends
/// in the empty clause.
///
/// ```
/// use claimguard::logic::{check_trace, refute, parse_clause, ClauseOrigin, ProverLimits};
/// let clauses = [
///     parse_clause("p(a)", ClauseOrigin::Premise).unwrap(),
///     parse_clause("~p(?x)", ClauseOrigin::NegatedGoal).unwrap(),
/// ];
/// let trace = refute(&clauses, ProverLimits::default()).trace.unwrap();
/// assert!(check_trace(&trace).is_ok());
/// ```
pub fn check_trace(trace: &ProofTrace) -> Result<(), TraceError> {
    let mut known: BTreeMap<usize, &Clause> = BTreeMap::new();
    for (id, clause) in &trace.inputs {
        if known.insert(*id, clause).is_some() {
            return Err(fail(Some(*id), "duplicate clause id"));
        }
    }
    for step in &trace.steps {
        let id = step.id();
        let parent = |p: usize| known.get(&p).copied().ok_or_else(|| fail(Some(id), format!("unknown parent {p}")));
        match step {
            ProofStep::Resolution {
                left,
                left_literal,
                right,
                right_literal,
                unifier,
                resolvent,
                ..
            } => {
                let l = parent(*left)?;
                let r = parent(*right)?;
                let r_lits: Vec<Literal> = r.literals().iter().map(primed).collect();
                let a = l
                    .literals()
                    .get(*left_literal)
                    .ok_or_else(|| fail(Some(id), "left literal index out of range"))?;
                let b = r_lits
                    .get(*right_literal)
                    .ok_or_else(|| fail(Some(id), "right literal index out of range"))?;
                let (ia, ib) = (instantiate(a, unifier), instantiate(b, unifier));
                if ia.negated == ib.negated || ia.predicate != ib.predicate || ia.args != ib.args {
                    return Err(fail(Some(id), format!("{ia} and {ib} are not complementary")));
                }
                let mut expected: Vec<Literal> = Vec::new();
                for (i, lit) in l.literals().iter().enumerate() {
                    if i != *left_literal {
                        expected.push(instantiate(lit, unifier));
                    }
                }
                for (j, lit) in r_lits.iter().enumerate() {
                    if j != *right_literal {
                        expected.push(instantiate(lit, unifier));
                    }
                }
                if !variants(&expected, resolvent.literals()) {
                    return Err(fail(Some(id), format!("recorded resolvent {resolvent} does not follow")));
                }
            }
            ProofStep::Evaluation { parent: p, resolvent, .. } => {
                let parent_clause = parent(*p)?;
                let kept: BTreeSet<&Literal> = resolvent.literals().iter().collect();
                for lit in parent_clause.literals() {
                    if kept.contains(lit) {
                        continue;
                    }
                    if lit.eval() != Some(false) {
                        return Err(fail(Some(id), format!("removed literal {lit} is not false")));
                    }
                }
                if kept.iter().any(|k| !parent_clause.literals().contains(k)) {
                    return Err(fail(Some(id), "evaluation introduced a literal"));
                }
            }
        }
        if known.insert(id, step.resolvent()).is_some() {
            return Err(fail(Some(id), "duplicate clause id"));
        }
    }
    let last = match trace.steps.last() {
        Some(step) => step.resolvent(),
        None => match trace.inputs.iter().find(|(_, c)| c.is_empty()) {
            Some((_, c)) => c,
            None => return Err(fail(None, "trace has no steps")),
        },
    };
    if !last.is_empty() {
        return Err(fail(None, format!("final clause {last} is not empty")));
    }
    Ok(())
}
