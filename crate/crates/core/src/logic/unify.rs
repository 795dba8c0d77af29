use super::syntax::{Literal, Substitution, Term};

/// Most general unifier of the atoms of `a` and `b`, ignoring polarity.
///
/// The term language has no function symbols, so the occurs check reduces to
/// not binding a variable to itself.
///
/// ```
/// use claimguard::logic::{parse_literal, unify};
/// let a = parse_literal("p(?x, b)").unwrap();
/// let b = parse_literal("p(a, ?y)").unwrap();
/// let s = unify(&a, &b).unwrap();
/// assert_eq!(a.apply(&s), b.apply(&s));
/// ```
pub fn unify(a: &Literal, b: &Literal) -> Option<Substitution> {
    unify_with(a, b, Substitution::new())
}

/// Extends `subst` so that the atoms of `a` and `b` become equal.
pub fn unify_with(a: &Literal, b: &Literal, mut subst: Substitution) -> Option<Substitution> {
    if a.predicate != b.predicate || a.args.len() != b.args.len() {
        return None;
    }
    for (x, y) in a.args.iter().zip(&b.args) {
        let x = subst.resolve(x);
        let y = subst.resolve(y);
        match (&x, &y) {
            _ if x == y => {}
            (Term::Var(v), _) => subst.bind(v, y.clone()),
            (_, Term::Var(v)) => subst.bind(v, x.clone()),
            _ => return None,
        }
    }
    Some(subst.normalized())
}
