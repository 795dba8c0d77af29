use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use crate::error::{read_file, Error, Result};
use crate::logic::parse::Cursor;
use crate::logic::{Literal, ParseError};
use crate::model::EntityId;

/// Range-restricted Horn rule `body_1 & ... & body_n -> head`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub body: Vec<Literal>,
    pub head: Literal,
}

fn vars(lits: &[Literal]) -> BTreeSet<&str> {
    lits.iter().flat_map(Literal::variables).collect()
}

impl Rule {
    pub fn new(body: Vec<Literal>, head: Literal) -> Result<Self> {
        let rule = Rule { body, head };
        if rule.body.is_empty() {
            return Err(Error::UnsafeRule(format!("{rule}: empty body")));
        }
        if rule.body.iter().any(|l| l.negated) || rule.head.negated {
            return Err(Error::UnsafeRule(format!("{rule}: negated atoms are not allowed in rules")));
        }
        let body_vars = vars(&rule.body);
        if rule.head.variables().any(|v| !body_vars.contains(v)) {
            return Err(Error::UnsafeRule(rule.to_string()));
        }
        Ok(rule)
    }

    pub fn parse(text: &str) -> Result<Self> {
        match parse_line(text)? {
            Parsed::Rule(r) => Ok(r),
            Parsed::Constraint(c) => Err(Error::UnsafeRule(format!("{c}: expected a rule, found a constraint"))),
        }
    }

    pub fn predicates(&self) -> impl Iterator<Item = &str> {
        self.body.iter().chain(std::iter::once(&self.head)).map(|l| l.predicate.name())
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, " -> {}", self.head)
    }
}

/// Integrity constraint `body -> false`: the body atoms may not all hold.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub body: Vec<Literal>,
}

impl Constraint {
    pub fn predicates(&self) -> impl Iterator<Item = &str> {
        self.body.iter().map(|l| l.predicate.name())
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str(" -> false")
    }
}

enum Parsed {
    Rule(Rule),
    Constraint(Constraint),
}

fn parse_line(text: &str) -> Result<Parsed> {
    let mut c = Cursor::new(text);
    let mut body = vec![c.literal()?];
    while c.eat("&") {
        body.push(c.literal()?);
    }
    c.expect("->")?;
    if c.remaining().trim() == "false" {
        if body.iter().any(|l| l.negated) {
            return Err(Error::UnsafeRule(format!("{text}: negated atoms are not allowed in rules")));
        }
        return Ok(Parsed::Constraint(Constraint { body }));
    }
    let head = c.literal()?;
    c.finish()?;
    Ok(Parsed::Rule(Rule::new(body, head)?))
}

/// Rules plus integrity constraints, in file order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
    pub constraints: Vec<Constraint>,
}

const TEMPORAL_AXIOMS: &str = include_str!("../../data/temporal.rules");
const CAUSAL_AXIOMS: &str = include_str!("../../data/causal.rules");

impl RuleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rules(rules: Vec<Rule>) -> Self {
        RuleSet {
            rules,
            constraints: Vec::new(),
        }
    }

    /// One rule or constraint per line, `#` comments.
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut set = RuleSet::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parsed = parse_line(line).map_err(|e| match e {
                Error::Parse(ParseError { message, offset, .. }) => {
                    Error::format(source_name, i + 1, format!("column {}: {message}", offset + 1))
                }
                other => Error::format(source_name, i + 1, other.to_string()),
            })?;
            match parsed {
                Parsed::Rule(r) => set.rules.push(r),
                Parsed::Constraint(c) => set.constraints.push(c),
            }
        }
        Ok(set)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&read_file(path)?, &path.display().to_string())
    }

    /// Shipped temporal axioms (before/after/same_time).
    pub fn temporal() -> Self {
        Self::parse(TEMPORAL_AXIOMS, "temporal.rules").expect("shipped temporal axioms parse")
    }

    /// Shipped causal axioms (`causes` transitivity and anti-symmetry).
    pub fn causal() -> Self {
        Self::parse(CAUSAL_AXIOMS, "causal.rules").expect("shipped causal axioms parse")
    }

    /// Appends `other`, skipping rules and constraints already present.
    pub fn extend(&mut self, other: RuleSet) {
        for r in other.rules {
            if !self.rules.contains(&r) {
                self.rules.push(r);
            }
        }
        for c in other.constraints {
            if !self.constraints.contains(&c) {
                self.constraints.push(c);
            }
        }
    }

    pub fn with_shipped_axioms(mut self) -> Self {
        self.extend(Self::temporal());
        self.extend(Self::causal());
        self
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty() && self.constraints.is_empty()
    }

    pub fn predicates(&self) -> BTreeSet<EntityId> {
        self.rules
            .iter()
            .flat_map(|r| r.predicates())
            .chain(self.constraints.iter().flat_map(|c| c.predicates()))
            .filter_map(|p| EntityId::new(p).ok())
            .collect()
    }
}
