//! Function-free first-order clauses, a resolution prover with interpreted
//! numeric and temporal builtins, and claim checking against a knowledge
//! graph.

mod check;
pub(crate) mod parse;
mod premises;
mod prover;
mod syntax;
mod unify;
mod verify;

pub use check::{check_trace, TraceError};
pub use parse::{parse_clause, parse_goal, parse_literal, parse_term, ParseError};
pub use premises::{constraint_clause, extract_premises, functional_clause, rule_clause, PremiseSource, Premises};
pub use prover::{refute, theorem_prove, Budget, ClauseId, ProofOutcome, ProofStatus, ProofStep, ProofTrace, ProverLimits};
pub use syntax::{Builtin, Clause, ClauseOrigin, Literal, Predicate, Substitution, Term, DEFAULT_EQ_TOLERANCE};
pub use unify::{unify, unify_with};
pub use verify::{
    check_consistent, find_contradictions, translate_to_fol, Consistency, Contradiction, Contradictions, MAX_CONTRADICTIONS,
};
