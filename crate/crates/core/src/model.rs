//! Shared vocabulary: entities, literal values, triples, claims, knowledge
//! states and verdict reports.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use chrono::NaiveDate;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fusion::FusionWeights;
use crate::logic::ProofTrace;

/// Canonical entity name: lowercase, punctuation-free, words joined by `_`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId(String);

impl EntityId {
    /// Normalizes a surface form. Fails when nothing survives normalization.
    pub fn new(surface: &str) -> Result<Self> {
        normalize_entity(surface)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Title-cased surface form, the inverse of normalization on covered input.
    ///
    /// ```
    /// use claimguard::model::EntityId;
    /// let id = EntityId::new("New  York City").unwrap();
    /// assert_eq!(id.as_str(), "new_york_city");
    /// assert_eq!(id.display_name(), "New York City");
    /// ```
    pub fn display_name(&self) -> String {
        self.0
            .split('_')
            .filter(|w| !w.is_empty())
            .map(|w| {
                let mut chars = w.chars();
                match chars.next() {
                    Some(first) => first.to_uppercase().chain(chars).collect::<String>(),
                    None => String::new(),
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Lowercases, drops punctuation, and joins whitespace-separated words with `_`.
pub fn normalize_entity(surface: &str) -> Result<EntityId> {
    let words: Vec<String> = surface
        .split_whitespace()
        .map(|word| {
            word.chars()
                .filter(|c| c.is_alphanumeric() || *c == '_')
                .flat_map(char::to_lowercase)
                .collect::<String>()
        })
        .filter(|w| !w.is_empty())
        .collect();
    if words.is_empty() {
        return Err(Error::Normalization(surface.to_string()));
    }
    Ok(EntityId(words.join("_")))
}

/// A finite real number with total ordering, so it can live in keys.
#[derive(Clone, Copy, Debug)]
pub struct Number(f64);

impl Number {
    pub fn new(value: f64) -> Option<Self> {
        value.is_finite().then(|| Number(if value == 0.0 { 0.0 } else { value }))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Eq for Number {}

impl PartialOrd for Number {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Number {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Hash for Number {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.fract() == 0.0 && self.0.abs() < 1e15 {
            write!(f, "{}", self.0 as i64)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Number {
    type Err = ();

    /// Accepts `-?digits(.digits)?` only; exponents and `inf`/`nan` are rejected.
    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        let body = s.strip_prefix('-').unwrap_or(s);
        let (int, frac) = match body.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (body, None),
        };
        let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
        if !digits(int) || frac.is_some_and(|f| !digits(f)) {
            return Err(());
        }
        s.parse::<f64>().ok().and_then(Number::new).ok_or(())
    }
}

pub(crate) fn parse_date(s: &str) -> Option<NaiveDate> {
    let b = s.as_bytes();
    if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
        return None;
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()
}

/// Kind of a triple object; also used for predicate range declarations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ObjectKind {
    Entity,
    Number,
    Date,
}

impl ObjectKind {
    pub fn name(self) -> &'static str {
        match self {
            ObjectKind::Entity => "entity",
            ObjectKind::Number => "number",
            ObjectKind::Date => "date",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "entity" => Some(ObjectKind::Entity),
            "number" => Some(ObjectKind::Number),
            "date" | "time" => Some(ObjectKind::Date),
            _ => None,
        }
    }
}

/// Object position of a triple: an entity or a literal value.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Object {
    Entity(EntityId),
    Number(Number),
    Date(NaiveDate),
}

impl Object {
    /// Reads a surface form: numbers and ISO dates become literals, anything
    /// else is normalized as an entity.
    pub fn parse_surface(text: &str) -> Result<Self> {
        let t = text.trim();
        if let Ok(n) = t.parse::<Number>() {
            return Ok(Object::Number(n));
        }
        if let Some(d) = parse_date(t) {
            return Ok(Object::Date(d));
        }
        Ok(Object::Entity(normalize_entity(t)?))
    }

    /// Reads a value of a known kind from its canonical text.
    pub fn parse_kind(kind: ObjectKind, text: &str) -> Result<Self> {
        let bad = || Error::Document(format!("{text:?} is not a valid {}", kind.name()));
        match kind {
            ObjectKind::Entity => Ok(Object::Entity(normalize_entity(text)?)),
            ObjectKind::Number => text.parse().map(Object::Number).map_err(|_| bad()),
            ObjectKind::Date => parse_date(text).map(Object::Date).ok_or_else(bad),
        }
    }

    pub fn kind(&self) -> ObjectKind {
        match self {
            Object::Entity(_) => ObjectKind::Entity,
            Object::Number(_) => ObjectKind::Number,
            Object::Date(_) => ObjectKind::Date,
        }
    }

    pub fn as_entity(&self) -> Option<&EntityId> {
        match self {
            Object::Entity(e) => Some(e),
            _ => None,
        }
    }

    pub fn display_name(&self) -> String {
        match self {
            Object::Entity(e) => e.display_name(),
            other => other.to_string(),
        }
    }
}

impl fmt::Display for Object {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Object::Entity(e) => write!(f, "{e}"),
            Object::Number(n) => write!(f, "{n}"),
            Object::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
        }
    }
}

impl From<EntityId> for Object {
    fn from(e: EntityId) -> Self {
        Object::Entity(e)
    }
}

/// Identity of a fact, ignoring its confidence.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FactKey {
    pub subject: EntityId,
    pub predicate: EntityId,
    pub object: Object,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Triple {
    pub subject: EntityId,
    pub predicate: EntityId,
    pub object: Object,
    confidence: f64,
}

impl Triple {
    pub fn new(subject: EntityId, predicate: EntityId, object: Object, confidence: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::Confidence(confidence));
        }
        Ok(Triple {
            subject,
            predicate,
            object,
            confidence,
        })
    }

    /// A fully confident triple.
    pub fn certain(subject: EntityId, predicate: EntityId, object: Object) -> Self {
        Triple {
            subject,
            predicate,
            object,
            confidence: 1.0,
        }
    }

    /// Builds a certain triple from surface strings; handy in tests and docs.
    ///
    /// ```
    /// use claimguard::model::Triple;
    /// let t = Triple::parse("Einstein", "born in", "Ulm").unwrap();
    /// assert_eq!(t.to_string(), "born_in(einstein, ulm)");
    /// ```
    pub fn parse(subject: &str, predicate: &str, object: &str) -> Result<Self> {
        Ok(Triple::certain(
            normalize_entity(subject)?,
            normalize_entity(predicate)?,
            Object::parse_surface(object)?,
        ))
    }

    pub fn confidence(&self) -> f64 {
        self.confidence
    }

    pub fn with_confidence(mut self, confidence: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::Confidence(confidence));
        }
        self.confidence = confidence;
        Ok(self)
    }

    pub fn key(&self) -> FactKey {
        FactKey {
            subject: self.subject.clone(),
            predicate: self.predicate.clone(),
            object: self.object.clone(),
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {})", self.predicate, self.subject, self.object)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Asserted,
    Negated,
}

impl Polarity {
    pub fn name(self) -> &'static str {
        match self {
            Polarity::Asserted => "asserted",
            Polarity::Negated => "negated",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "asserted" => Some(Polarity::Asserted),
            "negated" => Some(Polarity::Negated),
            _ => None,
        }
    }
}

/// Byte range into the response text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }
}

/// Content hash of a claim's (subject, predicate, object, polarity).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClaimId(String);

impl ClaimId {
    pub fn of(subject: &EntityId, predicate: &EntityId, object: &Object, polarity: Polarity) -> Self {
        let mut hasher = Sha256::new();
        for part in [
            subject.as_str(),
            predicate.as_str(),
            object.kind().name(),
            &object.to_string(),
            polarity.name(),
        ] {
            hasher.update(part.as_bytes());
            hasher.update([0x1f]);
        }
        let digest = hasher.finalize();
        ClaimId(digest[..8].iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        if s.len() == 16 && s.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase()) {
            Ok(ClaimId(s.to_string()))
        } else {
            Err(Error::Document(format!("bad claim id {s:?}")))
        }
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One atomic factual assertion found in a response.
#[derive(Clone, Debug, PartialEq)]
pub struct Claim {
    pub id: ClaimId,
    pub triple: Triple,
    pub polarity: Polarity,
    pub span: Span,
}

impl Claim {
    pub fn new(subject: EntityId, predicate: EntityId, object: Object, polarity: Polarity, span: Span) -> Self {
        let id = ClaimId::of(&subject, &predicate, &object, polarity);
        Claim {
            id,
            triple: Triple::certain(subject, predicate, object),
            polarity,
            span,
        }
    }

    pub fn from_triple(triple: &Triple, polarity: Polarity, span: Span) -> Self {
        Claim::new(
            triple.subject.clone(),
            triple.predicate.clone(),
            triple.object.clone(),
            polarity,
            span,
        )
    }

    pub fn subject(&self) -> &EntityId {
        &self.triple.subject
    }

    pub fn predicate(&self) -> &EntityId {
        &self.triple.predicate
    }

    pub fn object(&self) -> &Object {
        &self.triple.object
    }

    pub fn is_negated(&self) -> bool {
        self.polarity == Polarity::Negated
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_negated() {
            f.write_str("~")?;
        }
        write!(f, "{}", self.triple)
    }
}

/// Claims with duplicate ids collapsed, keeping first occurrences.
pub fn unique_claims(claims: &[Claim]) -> Vec<&Claim> {
    let mut seen = std::collections::BTreeSet::new();
    claims.iter().filter(|c| seen.insert(&c.id)).collect()
}

/// The user input together with the known entities it mentions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QueryContext {
    pub text: String,
    pub mentioned_entities: Vec<EntityId>,
}

impl QueryContext {
    /// Context without entity mentions.
    pub fn new(text: impl Into<String>) -> Self {
        QueryContext {
            text: text.into(),
            mentioned_entities: Vec::new(),
        }
    }

    /// Finds mentions of known entities by greedy longest n-gram match over
    /// the context's words (up to four words per mention).
    pub fn with_mentions(text: impl Into<String>, is_known: impl Fn(&EntityId) -> bool) -> Self {
        const MAX_WORDS: usize = 4;
        let text = text.into();
        let words: Vec<&str> = text.split_whitespace().collect();
        let mut mentions = Vec::new();
        let mut i = 0;
        while i < words.len() {
            let mut matched = 0;
            for len in (1..=MAX_WORDS.min(words.len() - i)).rev() {
                if let Ok(id) = normalize_entity(&words[i..i + len].join(" ")) {
                    if is_known(&id) {
                        if !mentions.contains(&id) {
                            mentions.push(id);
                        }
                        matched = len;
                        break;
                    }
                }
            }
            i += matched.max(1);
        }
        QueryContext {
            text,
            mentioned_entities: mentions,
        }
    }
}

/// Generated text with the claims extracted from it.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Response {
    pub text: String,
    pub claims: Vec<Claim>,
    pub claim_confidences: Option<Vec<f64>>,
}

impl Response {
    pub fn new(text: impl Into<String>, claims: Vec<Claim>) -> Self {
        Response {
            text: text.into(),
            claims,
            claim_confidences: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Provenance {
    Kb,
    Inferred,
    Intervened,
}

/// Facts treated as operative knowledge for one query.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KnowledgeState {
    facts: BTreeMap<FactKey, (Triple, Provenance)>,
}

impl KnowledgeState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_facts(facts: impl IntoIterator<Item = Triple>, provenance: Provenance) -> Self {
        let mut state = KnowledgeState::new();
        for t in facts {
            state.insert(t, provenance);
        }
        state
    }

    /// Inserts or overwrites the fact with the same key.
    pub fn insert(&mut self, triple: Triple, provenance: Provenance) {
        self.facts.insert(triple.key(), (triple, provenance));
    }

    pub fn remove(&mut self, key: &FactKey) -> Option<(Triple, Provenance)> {
        self.facts.remove(key)
    }

    pub fn retain(&mut self, mut keep: impl FnMut(&Triple) -> bool) {
        self.facts.retain(|_, (t, _)| keep(t));
    }

    pub fn contains(&self, key: &FactKey) -> bool {
        self.facts.contains_key(key)
    }

    pub fn provenance(&self, key: &FactKey) -> Option<Provenance> {
        self.facts.get(key).map(|(_, p)| *p)
    }

    /// Facts in key order.
    pub fn facts(&self) -> impl Iterator<Item = &Triple> {
        self.facts.values().map(|(t, _)| t)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Triple, Provenance)> {
        self.facts.values().map(|(t, p)| (t, *p))
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClaimStatus {
    Supported,
    Contradicted,
    Unverifiable,
}

impl ClaimStatus {
    pub fn name(self) -> &'static str {
        match self {
            ClaimStatus::Supported => "supported",
            ClaimStatus::Contradicted => "contradicted",
            ClaimStatus::Unverifiable => "unverifiable",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "supported" => Some(ClaimStatus::Supported),
            "contradicted" => Some(ClaimStatus::Contradicted),
            "unverifiable" => Some(ClaimStatus::Unverifiable),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Accept,
    Flag,
    Reject,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Accept => "accept",
            Verdict::Flag => "flag",
            Verdict::Reject => "reject",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "accept" => Some(Verdict::Accept),
            "flag" => Some(Verdict::Flag),
            "reject" => Some(Verdict::Reject),
            _ => None,
        }
    }
}

/// `score < accept` accepts, `score >= reject` rejects, anything between flags.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub accept: f64,
    pub reject: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            accept: 0.35,
            reject: 0.65,
        }
    }
}

impl Thresholds {
    pub fn new(accept: f64, reject: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&accept) || !(0.0..=1.0).contains(&reject) || accept > reject {
            return Err(Error::InvalidArgument(format!(
                "thresholds must satisfy 0 <= accept ({accept}) <= reject ({reject}) <= 1"
            )));
        }
        Ok(Thresholds { accept, reject })
    }

    pub fn verdict(&self, score: f64) -> Verdict {
        if score < self.accept {
            Verdict::Accept
        } else if score < self.reject {
            Verdict::Flag
        } else {
            Verdict::Reject
        }
    }
}

/// Verification outcome for a single claim.
#[derive(Clone, Debug, PartialEq)]
pub struct ClaimVerdict {
    pub claim: Claim,
    pub status: ClaimStatus,
    pub evidence: Vec<Triple>,
    pub proof: Option<ProofTrace>,
    /// Counterfactual consistency from the causal path, when it ran.
    pub consistency: Option<f64>,
}

/// The pipeline's output artifact.
#[derive(Clone, Debug, PartialEq)]
pub struct VerdictReport {
    pub score: f64,
    pub verdict: Verdict,
    pub p_causal: f64,
    pub p_symbolic: f64,
    pub uncertainty: f64,
    pub weights: FusionWeights,
    pub per_claim: Vec<ClaimVerdict>,
    pub trace: Vec<String>,
}

impl VerdictReport {
    /// Re-applies the fusion formula to the report's own fields.
    pub fn recomputed_score(&self) -> f64 {
        self.weights.alpha * self.p_causal + self.weights.beta * self.p_symbolic + self.weights.gamma * self.uncertainty
    }

    pub fn statuses(&self) -> Vec<ClaimStatus> {
        self.per_claim.iter().map(|c| c.status).collect()
    }

    pub fn contradicted(&self) -> impl Iterator<Item = &ClaimVerdict> {
        self.per_claim.iter().filter(|c| c.status == ClaimStatus::Contradicted)
    }
}
