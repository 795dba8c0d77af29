//! Text syntax for literals and clauses: `pred(arg, ...)`, `~` for negation,
//! `|` between disjuncts, `?x` for variables. Numbers and `YYYY-MM-DD` dates
//! are literal values; other words are entity constants.

use std::fmt;

use crate::model::{normalize_entity, parse_date, EntityId, Number};

use super::syntax::{Builtin, Clause, ClauseOrigin, Literal, Predicate, Term};

/// Parse failure with the byte offset it was detected at.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub input: String,
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    /// The input line with a caret under the failure position.
    pub fn diagnostic(&self) -> String {
        let col = self.input[..self.offset.min(self.input.len())].chars().count();
        format!("{}\n{}^ {}", self.input, " ".repeat(col), self.message)
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at column {}: {}", self.offset + 1, self.message)
    }
}

impl std::error::Error for ParseError {}

pub(crate) struct Cursor<'a> {
    input: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(input: &'a str) -> Self {
        Cursor { input, pos: 0 }
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            input: self.input.to_string(),
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.rest().chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn rest(&self) -> &'a str {
        &self.input[self.pos..]
    }

    pub(crate) fn remaining(&mut self) -> &'a str {
        self.skip_ws();
        self.rest()
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.input.len()
    }

    pub(crate) fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, token: &str) -> Result<(), ParseError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{token}`")))
        }
    }

    fn word(&mut self) -> &'a str {
        self.skip_ws();
        let rest = self.rest();
        let mut end = 0;
        for (i, c) in rest.char_indices() {
            let arrow = c == '-' && rest[i..].starts_with("->");
            if (c.is_alphanumeric() || c == '_' || c == '.' || c == '-') && !arrow {
                end = i + c.len_utf8();
            } else {
                break;
            }
        }
        self.pos += end;
        &rest[..end]
    }

    fn identifier(&mut self, what: &str) -> Result<EntityId, ParseError> {
        let start = self.pos;
        let w = self.word();
        if w.is_empty() || !w.chars().all(|c| c.is_alphanumeric() || c == '_') {
            self.pos = start;
            self.skip_ws();
            return Err(self.error(format!("expected {what}")));
        }
        normalize_entity(w).map_err(|_| self.error(format!("expected {what}")))
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        if self.eat("?") {
            let start = self.pos;
            let w = self.word();
            if w.is_empty() || !w.chars().all(|c| c.is_alphanumeric() || c == '_') {
                self.pos = start;
                return Err(self.error("expected variable name"));
            }
            let primes = self.rest().len() - self.rest().trim_start_matches('\'').len();
            self.pos += primes;
            return Ok(Term::Var(self.input[start..self.pos].trim_start().to_string()));
        }
        self.skip_ws();
        let start = self.pos;
        let w = self.word();
        if w.is_empty() {
            return Err(self.error("expected term"));
        }
        if let Ok(n) = w.parse::<Number>() {
            return Ok(Term::Num(n));
        }
        if let Some(d) = parse_date(w) {
            return Ok(Term::Time(d));
        }
        if w.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return normalize_entity(w).map(Term::Const).map_err(|_| self.error("expected term"));
        }
        self.pos = start;
        Err(self.error(format!("`{w}` is not a constant, number, or date")))
    }

    fn predicate(&mut self) -> Result<Predicate, ParseError> {
        let name = self.identifier("predicate name")?;
        let mut predicate = Predicate::from_name(&name);
        if self.eat("[") {
            if !matches!(predicate, Predicate::Builtin(Builtin::EqNum { .. })) {
                return Err(self.error("only eq_num takes a tolerance"));
            }
            let w = self.word();
            let tol: Number = w.parse().map_err(|_| self.error("expected numeric tolerance"))?;
            self.expect("]")?;
            predicate = Predicate::Builtin(Builtin::eq_num(tol.value()));
        }
        Ok(predicate)
    }

    pub(crate) fn literal(&mut self) -> Result<Literal, ParseError> {
        let negated = self.eat("~") || self.eat("¬");
        let predicate = self.predicate()?;
        self.expect("(")?;
        let mut args = Vec::new();
        if !self.eat(")") {
            loop {
                args.push(self.term()?);
                if self.eat(")") {
                    break;
                }
                self.expect(",")?;
            }
        }
        if predicate.builtin().is_some() && args.len() != 2 {
            return Err(self.error(format!("builtin `{}` takes exactly 2 arguments", predicate.name())));
        }
        Ok(Literal::new(predicate, args, negated))
    }

    pub(crate) fn clause(&mut self, origin: ClauseOrigin) -> Result<Clause, ParseError> {
        if self.eat("[]") {
            return Ok(Clause::new(Vec::new(), origin));
        }
        let mut lits = vec![self.literal()?];
        while self.eat("|") {
            lits.push(self.literal()?);
        }
        Ok(Clause::new(lits, origin))
    }

    pub(crate) fn finish(&mut self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }
}

/// Parses a single literal such as `~born_in(einstein, paris)`.
pub fn parse_literal(input: &str) -> Result<Literal, ParseError> {
    let mut c = Cursor::new(input);
    let lit = c.literal()?;
    c.finish()?;
    Ok(lit)
}

/// Parses a single term: `?var`, a number, a `YYYY-MM-DD` date, or a constant.
pub fn parse_term(input: &str) -> Result<Term, ParseError> {
    let mut c = Cursor::new(input);
    let t = c.term()?;
    c.finish()?;
    Ok(t)
}

/// Parses a ground goal literal; variables are rejected.
pub fn parse_goal(input: &str) -> Result<Literal, ParseError> {
    let lit = parse_literal(input)?;
    if !lit.is_ground() {
        let offset = input.find('?').unwrap_or(0);
        return Err(ParseError {
            input: input.to_string(),
            offset,
            message: "goals must be ground".into(),
        });
    }
    Ok(lit)
}

/// Parses a disjunction such as `~human(?x) | mortal(?x)`, or `[]`.
pub fn parse_clause(input: &str, origin: ClauseOrigin) -> Result<Clause, ParseError> {
    let mut c = Cursor::new(input);
    let clause = c.clause(origin)?;
    c.finish()?;
    Ok(clause)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_literals_and_values() {
        let l = parse_literal("born_year(Einstein, 1879)").unwrap();
        assert_eq!(l.to_string(), "born_year(einstein, 1879)");
        assert!(matches!(l.args[1], Term::Num(_)));
        let l = parse_literal("~before(?x, 1918-11-11)").unwrap();
        assert!(l.negated);
        assert!(matches!(l.args[1], Term::Time(_)));
        assert_eq!(l.to_string(), "~before(?x, 1918-11-11)");
        let l = parse_literal("eq_num[0.5](1, 1.25)").unwrap();
        assert_eq!(l.to_string(), "eq_num[0.5](1, 1.25)");
        assert_eq!(l.eval(), Some(true));
    }

    #[test]
    fn clause_round_trip() {
        let c = parse_clause("~human(?x) | mortal(?x)", ClauseOrigin::Premise).unwrap();
        assert_eq!(c.len(), 2);
        let again = parse_clause(&c.to_string(), ClauseOrigin::Premise).unwrap();
        assert_eq!(c, again);
        assert!(parse_clause("[]", ClauseOrigin::Resolvent).unwrap().is_empty());
    }

    #[test]
    fn errors_point_at_the_problem() {
        let e = parse_literal("born_in(").unwrap_err();
        assert_eq!(e.offset, 8);
        assert!(e.diagnostic().ends_with("        ^ expected term"));
        let e = parse_literal("lt(1)").unwrap_err();
        assert!(e.message.contains("exactly 2"));
        assert!(parse_literal("p(a) q").is_err());
        assert!(parse_goal("p(?x)").is_err());
        assert!(parse_literal("p(a,)").is_err());
    }

    #[test]
    fn negative_numbers_and_zero_arity() {
        let l = parse_literal("temp(x, -3.5)").unwrap();
        assert_eq!(l.to_string(), "temp(x, -3.5)");
        let l = parse_literal("p(?v0', ?x'')").unwrap();
        assert_eq!(l.to_string(), "p(?v0', ?x'')");
        let l = parse_literal("raining()").unwrap();
        assert!(l.args.is_empty());
    }
}
