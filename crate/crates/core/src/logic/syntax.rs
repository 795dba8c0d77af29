use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::NaiveDate;

use crate::model::{EntityId, Number, Object, Triple};

/// Tolerance used by `eq_num` when none is written explicitly.
pub const DEFAULT_EQ_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(EntityId),
    Num(Number),
    Time(NaiveDate),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.to_string())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn to_object(&self) -> Option<Object> {
        match self {
            Term::Var(_) => None,
            Term::Const(e) => Some(Object::Entity(e.clone())),
            Term::Num(n) => Some(Object::Number(*n)),
            Term::Time(d) => Some(Object::Date(*d)),
        }
    }
}

impl From<&Object> for Term {
    fn from(o: &Object) -> Self {
        match o {
            Object::Entity(e) => Term::Const(e.clone()),
            Object::Number(n) => Term::Num(*n),
            Object::Date(d) => Term::Time(*d),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Const(e) => write!(f, "{e}"),
            Term::Num(n) => write!(f, "{n}"),
            Term::Time(d) => write!(f, "{}", d.format("%Y-%m-%d")),
        }
    }
}

/// Interpreted predicates over numbers and time points.
///
/// A builtin literal is evaluated only when both arguments are literal values
/// of a comparable kind. Over entity constants it behaves like an ordinary
/// relation, so `before(war, treaty)` can be stated as a fact and chained by
/// rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Builtin {
    Lt,
    Leq,
    EqNum { tolerance: Number },
    Before,
    After,
    SameTime,
    /// Identity under the unique-names assumption.
    Eq,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Lt => "lt",
            Builtin::Leq => "leq",
            Builtin::EqNum { .. } => "eq_num",
            Builtin::Before => "before",
            Builtin::After => "after",
            Builtin::SameTime => "same_time",
            Builtin::Eq => "eq",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "lt" => Builtin::Lt,
            "leq" => Builtin::Leq,
            "eq_num" => Builtin::eq_num(DEFAULT_EQ_TOLERANCE),
            "before" => Builtin::Before,
            "after" => Builtin::After,
            "same_time" => Builtin::SameTime,
            "eq" => Builtin::Eq,
            _ => return None,
        })
    }

    pub fn eq_num(tolerance: f64) -> Self {
        Builtin::EqNum {
            tolerance: Number::new(tolerance.abs()).expect("finite tolerance"),
        }
    }

    /// Truth value of `self(a, b)`, or `None` when the literal is not
    /// interpreted (a variable remains, or an entity constant is involved).
    pub fn eval(self, a: &Term, b: &Term) -> Option<bool> {
        if a.is_var() || b.is_var() {
            return None;
        }
        if let Builtin::Eq = self {
            return Some(a == b);
        }
        if matches!(a, Term::Const(_)) || matches!(b, Term::Const(_)) {
            return None;
        }
        let ordering = match (a, b) {
            (Term::Num(x), Term::Num(y)) => x.value().partial_cmp(&y.value()),
            (Term::Time(x), Term::Time(y)) => Some(x.cmp(y)),
            // a number compared with a time point: never true
            _ => return Some(false),
        }?;
        let numeric = matches!(a, Term::Num(_));
        use std::cmp::Ordering::*;
        Some(match self {
            Builtin::Lt => numeric && ordering == Less,
            Builtin::Leq => numeric && ordering != Greater,
            Builtin::EqNum { tolerance } => match (a, b) {
                (Term::Num(x), Term::Num(y)) => (x.value() - y.value()).abs() <= tolerance.value(),
                _ => false,
            },
            Builtin::Before => ordering == Less,
            Builtin::After => ordering == Greater,
            Builtin::SameTime => ordering == Equal,
            Builtin::Eq => unreachable!(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Predicate {
    Named(EntityId),
    Builtin(Builtin),
}

impl Predicate {
    /// Builtin names take precedence over relation names.
    pub fn from_name(name: &EntityId) -> Self {
        match Builtin::from_name(name.as_str()) {
            Some(b) => Predicate::Builtin(b),
            None => Predicate::Named(name.clone()),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Predicate::Named(e) => e.as_str(),
            Predicate::Builtin(b) => b.name(),
        }
    }

    pub fn builtin(&self) -> Option<Builtin> {
        match self {
            Predicate::Builtin(b) => Some(*b),
            Predicate::Named(_) => None,
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Builtin(Builtin::EqNum { tolerance }) if tolerance.value() != DEFAULT_EQ_TOLERANCE => {
                write!(f, "eq_num[{tolerance}]")
            }
            p => f.write_str(p.name()),
        }
    }
}

/// A possibly negated atom.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub negated: bool,
    pub predicate: Predicate,
    pub args: Vec<Term>,
}

impl Literal {
    pub fn new(predicate: Predicate, args: Vec<Term>, negated: bool) -> Self {
        Literal {
            negated,
            predicate,
            args,
        }
    }

    pub fn positive(predicate: Predicate, args: Vec<Term>) -> Self {
        Literal::new(predicate, args, false)
    }

    /// Ground literal for a triple: `predicate(subject, object)`.
    pub fn from_triple(t: &Triple, negated: bool) -> Self {
        Literal::new(
            Predicate::from_name(&t.predicate),
            vec![Term::Const(t.subject.clone()), Term::from(&t.object)],
            negated,
        )
    }

    /// Inverse of [`Literal::from_triple`] for ground binary literals with an
    /// entity subject.
    pub fn to_triple(&self) -> Option<Triple> {
        match self.args.as_slice() {
            [Term::Const(s), o] => {
                let predicate = EntityId::new(self.predicate.name()).ok()?;
                Some(Triple::certain(s.clone(), predicate, o.to_object()?))
            }
            _ => None,
        }
    }

    pub fn negate(&self) -> Self {
        Literal {
            negated: !self.negated,
            ..self.clone()
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    /// Truth value of this literal if it is an interpreted builtin.
    pub fn eval(&self) -> Option<bool> {
        let builtin = self.predicate.builtin()?;
        match self.args.as_slice() {
            [a, b] => builtin.eval(a, b).map(|v| v != self.negated),
            _ => None,
        }
    }

    /// Whether this literal is builtin-named (evaluable or not).
    pub fn is_builtin(&self) -> bool {
        self.predicate.builtin().is_some()
    }

    pub fn same_atom(&self, other: &Literal) -> bool {
        self.predicate == other.predicate && self.args == other.args
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            _ => None,
        })
    }

    pub fn apply(&self, subst: &Substitution) -> Literal {
        Literal {
            negated: self.negated,
            predicate: self.predicate.clone(),
            args: self.args.iter().map(|t| subst.resolve(t)).collect(),
        }
    }

    pub fn rename(&self, f: &impl Fn(&str) -> String) -> Literal {
        Literal {
            negated: self.negated,
            predicate: self.predicate.clone(),
            args: self
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => Term::Var(f(v)),
                    other => other.clone(),
                })
                .collect(),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("~")?;
        }
        write!(f, "{}(", self.predicate)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// Variable bindings. Bindings may chain; [`Substitution::resolve`] follows them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution(BTreeMap<String, Term>);

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, var: &str, term: Term) {
        self.0.insert(var.to_string(), term);
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.0.get(var)
    }

    pub fn resolve(&self, term: &Term) -> Term {
        let mut current = term;
        // chains are acyclic; bounded by the number of bindings
        for _ in 0..=self.0.len() {
            match current {
                Term::Var(v) => match self.0.get(v) {
                    Some(next) => current = next,
                    None => break,
                },
                _ => break,
            }
        }
        current.clone()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Same bindings with every right-hand side fully resolved.
    pub fn normalized(&self) -> Substitution {
        Substitution(self.0.keys().map(|k| (k.clone(), self.resolve(&Term::Var(k.clone())))).collect())
    }
}

impl FromIterator<(String, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (String, Term)>>(iter: I) -> Self {
        Substitution(iter.into_iter().collect())
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "?{k} -> {v}")?;
        }
        f.write_str("}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClauseOrigin {
    Premise,
    NegatedGoal,
    Resolvent,
}

impl ClauseOrigin {
    pub fn name(self) -> &'static str {
        match self {
            ClauseOrigin::Premise => "premise",
            ClauseOrigin::NegatedGoal => "negated_goal",
            ClauseOrigin::Resolvent => "resolvent",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "premise" => Some(ClauseOrigin::Premise),
            "negated_goal" => Some(ClauseOrigin::NegatedGoal),
            "resolvent" => Some(ClauseOrigin::Resolvent),
            _ => None,
        }
    }
}

/// A disjunction of literals. Literals are kept sorted and free of duplicates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    literals: Vec<Literal>,
    pub origin: ClauseOrigin,
}

impl Clause {
    pub fn new(mut literals: Vec<Literal>, origin: ClauseOrigin) -> Self {
        literals.sort();
        literals.dedup();
        Clause { literals, origin }
    }

    pub fn unit(literal: Literal, origin: ClauseOrigin) -> Self {
        Clause {
            literals: vec![literal],
            origin,
        }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn is_ground(&self) -> bool {
        self.literals.iter().all(Literal::is_ground)
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        self.literals.iter().flat_map(Literal::variables).collect()
    }

    /// Contains some atom both positively and negatively.
    pub fn is_tautology(&self) -> bool {
        self.literals
            .iter()
            .any(|a| a.negated && self.literals.iter().any(|b| !b.negated && a.same_atom(b)))
    }

    /// Renames variables to `v0, v1, ...` in order of first appearance,
    /// re-sorting until the order is stable.
    pub fn canonical(&self) -> Clause {
        let mut current = self.clone();
        for _ in 0..4 {
            let mut names: BTreeMap<String, String> = BTreeMap::new();
            for lit in &current.literals {
                for v in lit.variables() {
                    let next = format!("v{}", names.len());
                    names.entry(v.to_string()).or_insert(next);
                }
            }
            let renamed = Clause::new(
                current.literals.iter().map(|l| l.rename(&|v: &str| names[v].clone())).collect(),
                current.origin,
            );
            if renamed.literals == current.literals {
                break;
            }
            current = renamed;
        }
        current
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.literals.is_empty() {
            return f.write_str("[]");
        }
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(v: f64) -> Term {
        Term::Num(Number::new(v).unwrap())
    }

    fn date(s: &str) -> Term {
        Term::Time(crate::model::parse_date(s).unwrap())
    }

    fn c(s: &str) -> Term {
        Term::Const(EntityId::new(s).unwrap())
    }

    #[test]
    fn builtins_evaluate_only_on_values() {
        assert_eq!(Builtin::Lt.eval(&num(3.0), &num(5.0)), Some(true));
        assert_eq!(Builtin::Lt.eval(&num(5.0), &num(5.0)), Some(false));
        assert_eq!(Builtin::Leq.eval(&num(5.0), &num(5.0)), Some(true));
        assert_eq!(Builtin::Lt.eval(&Term::var("x"), &num(5.0)), None);
        assert_eq!(Builtin::Before.eval(&c("war"), &c("treaty")), None);
        assert_eq!(Builtin::Before.eval(&date("1914-07-28"), &date("1918-11-11")), Some(true));
        assert_eq!(Builtin::After.eval(&date("1914-07-28"), &date("1918-11-11")), Some(false));
        assert_eq!(Builtin::SameTime.eval(&date("1918-11-11"), &date("1918-11-11")), Some(true));
        assert_eq!(Builtin::Lt.eval(&num(1.0), &date("1918-11-11")), Some(false));
        assert_eq!(Builtin::Eq.eval(&c("ulm"), &c("paris")), Some(false));
        assert_eq!(Builtin::Eq.eval(&c("ulm"), &c("ulm")), Some(true));
        assert_eq!(Builtin::eq_num(0.5).eval(&num(1879.0), &num(1879.4)), Some(true));
        assert_eq!(Builtin::eq_num(DEFAULT_EQ_TOLERANCE).eval(&num(1879.0), &num(1900.0)), Some(false));
    }

    #[test]
    fn negated_builtin_flips_truth() {
        let lit = Literal::new(Predicate::Builtin(Builtin::Lt), vec![num(3.0), num(5.0)], true);
        assert_eq!(lit.eval(), Some(false));
    }

    #[test]
    fn canonical_is_insensitive_to_variable_names() {
        let p = Predicate::from_name(&EntityId::new("p").unwrap());
        let a = Clause::new(
            vec![
                Literal::new(p.clone(), vec![Term::var("x"), Term::var("y")], true),
                Literal::new(p.clone(), vec![Term::var("y"), c("a")], false),
            ],
            ClauseOrigin::Premise,
        );
        let b = Clause::new(
            vec![
                Literal::new(p.clone(), vec![Term::var("q"), Term::var("r")], true),
                Literal::new(p, vec![Term::var("r"), c("a")], false),
            ],
            ClauseOrigin::Premise,
        );
        assert_eq!(a.canonical(), b.canonical());
    }

    #[test]
    fn tautology_detection() {
        let p = Predicate::from_name(&EntityId::new("p").unwrap());
        let lit = Literal::positive(p, vec![c("a")]);
        assert!(Clause::new(vec![lit.clone(), lit.negate()], ClauseOrigin::Premise).is_tautology());
        assert!(!Clause::unit(lit, ClauseOrigin::Premise).is_tautology());
    }
}
