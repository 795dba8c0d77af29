//! Given-clause saturation with binary resolution.
//!
//! Each clause with negative literals selects one of them (the first
//! non-builtin negative literal, else the first negative); only the selected
//! literal is resolved, and only against positive literals of clauses without
//! negative literals. For range-restricted Horn premises over ground facts this
//! is forward chaining in resolution form and saturates finitely. Ground
//! builtin literals are evaluated as soon as they appear: a true literal
//! deletes its clause, a false one is dropped from it.
//!
//! The passive set is ordered by (clause length, clause id), which gives unit
//! preference with ties broken by insertion order.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use super::syntax::{Clause, ClauseOrigin, Literal, Substitution};
use super::unify::unify;

pub type ClauseId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProverLimits {
    /// Maximum number of retained clauses.
    pub max_clauses: usize,
    /// Maximum derivation depth of a retained clause.
    pub max_depth: usize,
}

impl Default for ProverLimits {
    fn default() -> Self {
        ProverLimits {
            max_clauses: 50_000,
            max_depth: 40,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProofStep {
    /// `resolvent` is the resolvent of `left` on `left_literal` and `right`
    /// (variables suffixed with `'`) on `right_literal` under `unifier`,
    /// up to variable renaming.
    Resolution {
        id: ClauseId,
        left: ClauseId,
        left_literal: usize,
        right: ClauseId,
        right_literal: usize,
        unifier: Substitution,
        resolvent: Clause,
    },
    /// `resolvent` is `parent` without its false ground builtin literals.
    Evaluation {
        id: ClauseId,
        parent: ClauseId,
        resolvent: Clause,
    },
}

impl ProofStep {
    pub fn id(&self) -> ClauseId {
        match self {
            ProofStep::Resolution { id, .. } | ProofStep::Evaluation { id, .. } => *id,
        }
    }

    pub fn resolvent(&self) -> &Clause {
        match self {
            ProofStep::Resolution { resolvent, .. } | ProofStep::Evaluation { resolvent, .. } => resolvent,
        }
    }
}

/// A refutation: the input clauses it uses and the derivation steps in order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProofTrace {
    pub inputs: Vec<(ClauseId, Clause)>,
    pub steps: Vec<ProofStep>,
}

impl ProofTrace {
    pub fn input_ids(&self) -> impl Iterator<Item = ClauseId> + '_ {
        self.inputs.iter().map(|(id, _)| *id)
    }

    pub fn resolution_steps(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, ProofStep::Resolution { .. })).count()
    }

    /// Human-readable replay, one line per input or step.
    pub fn replay(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .inputs
            .iter()
            .map(|(id, c)| format!("[{id}] {}: {c}", c.origin.name()))
            .collect();
        for step in &self.steps {
            out.push(match step {
                ProofStep::Resolution {
                    id,
                    left,
                    left_literal,
                    right,
                    right_literal,
                    unifier,
                    resolvent,
                } => format!("[{id}] resolve {left}.{left_literal} with {right}.{right_literal} {unifier}: {resolvent}"),
                ProofStep::Evaluation { id, parent, resolvent } => {
                    format!("[{id}] evaluate builtins in {parent}: {resolvent}")
                }
            });
        }
        out
    }
}

impl fmt::Display for ProofTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in self.replay() {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Budget {
    Clauses,
    Depth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProofStatus {
    Proved,
    SaturatedWithoutProof,
    BudgetExhausted(Budget),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProofOutcome {
    pub trace: Option<ProofTrace>,
    pub status: ProofStatus,
    /// The refutation does not use the negated goal: the premises alone are
    /// inconsistent.
    pub premises_inconsistent: bool,
    pub retained: usize,
}

impl ProofOutcome {
    pub fn is_proved(&self) -> bool {
        self.status == ProofStatus::Proved
    }
}

#[derive(Clone, Debug)]
enum Derivation {
    Input,
    Resolution {
        left: ClauseId,
        left_literal: usize,
        right: ClauseId,
        right_literal: usize,
        unifier: Substitution,
    },
    Evaluation {
        parent: ClauseId,
    },
}

struct Stored {
    clause: Clause,
    derivation: Derivation,
    depth: usize,
}

/// Index of the literal a clause resolves upon, if it has negative literals.
pub(crate) fn selected_literal(clause: &Clause) -> Option<usize> {
    let lits = clause.literals();
    lits.iter()
        .position(|l| l.negated && !l.is_builtin())
        .or_else(|| lits.iter().position(|l| l.negated))
}

/// Drops false ground builtins; `None` when some literal is true.
fn evaluate(clause: &Clause) -> Option<Clause> {
    let mut keep = Vec::with_capacity(clause.len());
    for l in clause.literals() {
        match l.eval() {
            Some(true) => return None,
            Some(false) => {}
            None => keep.push(l.clone()),
        }
    }
    Some(Clause::new(keep, clause.origin))
}

pub(crate) fn rename_apart(clause: &Clause) -> Clause {
    Clause::new(
        clause.literals().iter().map(|l| l.rename(&|v: &str| format!("{v}'"))).collect(),
        clause.origin,
    )
}

enum Added {
    Empty(ClauseId),
    Kept,
    Dropped,
    OverBudget,
}

struct Engine {
    limits: ProverLimits,
    store: Vec<Stored>,
    seen: HashSet<Clause>,
    passive: BTreeSet<(usize, ClauseId)>,
    active: Vec<ClauseId>,
    retained: usize,
    depth_cut: bool,
}

impl Engine {
    fn new(limits: ProverLimits) -> Self {
        Engine {
            limits,
            store: Vec::new(),
            seen: HashSet::new(),
            passive: BTreeSet::new(),
            active: Vec::new(),
            retained: 0,
            depth_cut: false,
        }
    }

    fn push(&mut self, clause: Clause, derivation: Derivation, depth: usize) -> ClauseId {
        self.store.push(Stored {
            clause,
            derivation,
            depth,
        });
        self.store.len() - 1
    }

    /// Simplifies and files a clause whose raw form is already stored as `id`.
    fn file(&mut self, id: ClauseId) -> Added {
        let raw = &self.store[id].clause;
        let depth = self.store[id].depth;
        let Some(evaluated) = evaluate(raw) else {
            return Added::Dropped;
        };
        let id = if evaluated.len() != raw.len() {
            self.push(evaluated, Derivation::Evaluation { parent: id }, depth)
        } else {
            id
        };
        let clause = &self.store[id].clause;
        if clause.is_empty() {
            return Added::Empty(id);
        }
        if clause.is_tautology() {
            return Added::Dropped;
        }
        let mut key = clause.canonical();
        key.origin = ClauseOrigin::Resolvent;
        if !self.seen.insert(key) {
            return Added::Dropped;
        }
        self.passive.insert((self.store[id].clause.len(), id));
        self.retained += 1;
        if self.retained > self.limits.max_clauses {
            return Added::OverBudget;
        }
        Added::Kept
    }

    /// Resolvents between `neg` (on its selected literal) and `pos`.
    fn resolve(&mut self, neg: ClauseId, pos: ClauseId) -> Option<Added> {
        let Some(sel) = selected_literal(&self.store[neg].clause) else {
            return None;
        };
        let left = self.store[neg].clause.clone();
        let right = rename_apart(&self.store[pos].clause);
        let depth = self.store[neg].depth.max(self.store[pos].depth) + 1;
        let target = &left.literals()[sel];
        for (j, m) in right.literals().iter().enumerate() {
            if m.negated || m.eval().is_some() {
                continue;
            }
            let Some(unifier) = unify(target, m) else {
                continue;
            };
            if depth > self.limits.max_depth {
                self.depth_cut = true;
                continue;
            }
            let mut lits: Vec<Literal> = Vec::with_capacity(left.len() + right.len() - 2);
            lits.extend(left.literals().iter().enumerate().filter(|(i, _)| *i != sel).map(|(_, l)| l.apply(&unifier)));
            lits.extend(right.literals().iter().enumerate().filter(|(i, _)| *i != j).map(|(_, l)| l.apply(&unifier)));
            let resolvent = Clause::new(lits, ClauseOrigin::Resolvent).canonical();
            let id = self.push(
                resolvent,
                Derivation::Resolution {
                    left: neg,
                    left_literal: sel,
                    right: pos,
                    right_literal: j,
                    unifier,
                },
                depth,
            );
            match self.file(id) {
                Added::Kept | Added::Dropped => {}
                done => return Some(done),
            }
        }
        None
    }

    fn run(&mut self) -> Result<ClauseId, ProofStatus> {
        while let Some((_, given)) = self.passive.pop_first() {
            let given_has_selection = selected_literal(&self.store[given].clause).is_some();
            let partners: Vec<ClauseId> = self.active.clone();
            self.active.push(given);
            for other in partners {
                let other_has_selection = selected_literal(&self.store[other].clause).is_some();
                let outcome = match (given_has_selection, other_has_selection) {
                    (true, false) => self.resolve(given, other),
                    (false, true) => self.resolve(other, given),
                    _ => None,
                };
                match outcome {
                    Some(Added::Empty(id)) => return Ok(id),
                    Some(Added::OverBudget) => return Err(ProofStatus::BudgetExhausted(Budget::Clauses)),
                    _ => {}
                }
            }
        }
        if self.depth_cut {
            Err(ProofStatus::BudgetExhausted(Budget::Depth))
        } else {
            Err(ProofStatus::SaturatedWithoutProof)
        }
    }

    fn trace(&self, empty: ClauseId) -> ProofTrace {
        let mut needed = BTreeSet::new();
        let mut stack = vec![empty];
        while let Some(id) = stack.pop() {
            if !needed.insert(id) {
                continue;
            }
            match &self.store[id].derivation {
                Derivation::Input => {}
                Derivation::Resolution { left, right, .. } => {
                    stack.push(*left);
                    stack.push(*right);
                }
                Derivation::Evaluation { parent } => stack.push(*parent),
            }
        }
        let mut trace = ProofTrace::default();
        for id in needed {
            let stored = &self.store[id];
            let clause = stored.clause.clone();
            match &stored.derivation {
                Derivation::Input => trace.inputs.push((id, clause)),
                Derivation::Resolution {
                    left,
                    left_literal,
                    right,
                    right_literal,
                    unifier,
                } => trace.steps.push(ProofStep::Resolution {
                    id,
                    left: *left,
                    left_literal: *left_literal,
                    right: *right,
                    right_literal: *right_literal,
                    unifier: unifier.clone(),
                    resolvent: clause,
                }),
                Derivation::Evaluation { parent } => trace.steps.push(ProofStep::Evaluation {
                    id,
                    parent: *parent,
                    resolvent: clause,
                }),
            }
        }
        trace
    }
}

/// Searches for a refutation of `clauses`. Input clause `i` gets id `i`.
pub fn refute(clauses: &[Clause], limits: ProverLimits) -> ProofOutcome {
    let mut engine = Engine::new(limits);
    for c in clauses {
        engine.push(c.clone(), Derivation::Input, 0);
    }
    let mut result = None;
    for id in 0..clauses.len() {
        match engine.file(id) {
            Added::Empty(e) => {
                result = Some(Ok(e));
                break;
            }
            Added::OverBudget => {
                result = Some(Err(ProofStatus::BudgetExhausted(Budget::Clauses)));
                break;
            }
            _ => {}
        }
    }
    let result = result.unwrap_or_else(|| engine.run());
    match result {
        Ok(empty) => {
            let trace = engine.trace(empty);
            debug_assert!(
                super::check::check_trace(&trace).is_ok(),
                "prover emitted an invalid trace: {:?}",
                super::check::check_trace(&trace)
            );
            ProofOutcome {
                trace: Some(trace),
                status: ProofStatus::Proved,
                premises_inconsistent: false,
                retained: engine.retained,
            }
        }
        Err(status) => ProofOutcome {
            trace: None,
            status,
            premises_inconsistent: false,
            retained: engine.retained,
        },
    }
}

/// Proves `premises ⊨ goal` by refuting `premises ∪ {¬goal}`.
///
/// ```
/// use claimguard::logic::{parse_clause, parse_goal, theorem_prove, ClauseOrigin, ProverLimits};
/// let premises = vec![
///     parse_clause("human(socrates)", ClauseOrigin::Premise).unwrap(),
///     parse_clause("~human(?x) | mortal(?x)", ClauseOrigin::Premise).unwrap(),
/// ];
/// let outcome = theorem_prove(&premises, &parse_goal("mortal(socrates)").unwrap(), ProverLimits::default());
/// assert!(outcome.is_proved());
/// assert_eq!(outcome.trace.unwrap().resolution_steps(), 2);
/// ```
pub fn theorem_prove(premises: &[Clause], goal: &Literal, limits: ProverLimits) -> ProofOutcome {
    let mut clauses = premises.to_vec();
    let goal_id = clauses.len();
    clauses.push(Clause::unit(goal.negate(), ClauseOrigin::NegatedGoal));
    let mut outcome = refute(&clauses, limits);
    if let Some(trace) = &outcome.trace {
        outcome.premises_inconsistent = !trace.input_ids().any(|id| id == goal_id);
    }
    outcome
}
