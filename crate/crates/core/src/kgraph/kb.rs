use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{read_file, Error, Result};
use crate::model::{normalize_entity, EntityId, FactKey, Object, ObjectKind, Triple};

/// Predicate declarations: functional predicates and object ranges.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Declarations {
    functional: BTreeSet<EntityId>,
    ranges: BTreeMap<EntityId, ObjectKind>,
}

impl Declarations {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare_functional(&mut self, predicate: EntityId) {
        self.functional.insert(predicate);
    }

    pub fn declare_range(&mut self, predicate: EntityId, kind: ObjectKind) {
        self.ranges.insert(predicate, kind);
    }

    pub fn is_functional(&self, predicate: &EntityId) -> bool {
        self.functional.contains(predicate)
    }

    pub fn functional(&self) -> impl Iterator<Item = &EntityId> {
        self.functional.iter()
    }

    pub fn range(&self, predicate: &EntityId) -> Option<ObjectKind> {
        self.ranges.get(predicate).copied()
    }

    pub fn ranges(&self) -> impl Iterator<Item = (&EntityId, ObjectKind)> {
        self.ranges.iter().map(|(p, k)| (p, *k))
    }
}

/// A triple store with predicate declarations; immutable once loaded.
#[derive(Clone, Debug, Default)]
pub struct KnowledgeBase {
    triples: BTreeMap<FactKey, Triple>,
    declarations: Declarations,
    by_entity: BTreeMap<EntityId, BTreeSet<FactKey>>,
}

impl KnowledgeBase {
    pub fn new(declarations: Declarations) -> Self {
        KnowledgeBase {
            declarations,
            ..Default::default()
        }
    }

    /// Builds a store from triples; duplicates keep the highest confidence.
    pub fn from_triples(declarations: Declarations, triples: impl IntoIterator<Item = Triple>) -> Result<Self> {
        let mut kb = KnowledgeBase::new(declarations);
        for t in triples {
            kb.insert(t)?;
        }
        Ok(kb)
    }

    pub fn insert(&mut self, triple: Triple) -> Result<()> {
        if let Some(kind) = self.declarations.range(&triple.predicate) {
            if triple.object.kind() != kind {
                return Err(Error::InvalidArgument(format!(
                    "{triple}: object is a {} but {} has range {}",
                    triple.object.kind().name(),
                    triple.predicate,
                    kind.name()
                )));
            }
        }
        let key = triple.key();
        match self.triples.get(&key) {
            Some(existing) if existing.confidence() >= triple.confidence() => return Ok(()),
            _ => {}
        }
        self.by_entity.entry(triple.subject.clone()).or_default().insert(key.clone());
        if let Object::Entity(o) = &triple.object {
            self.by_entity.entry(o.clone()).or_default().insert(key.clone());
        }
        self.triples.insert(key, triple);
        Ok(())
    }

    /// Parses the TSV format: `subject<TAB>predicate<TAB>object[<TAB>confidence]`,
    /// `#` comments, and `#!functional p` / `#!range p kind` directives.
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut declarations = Declarations::new();
        for (i, line) in text.lines().enumerate() {
            let Some(directive) = line.trim().strip_prefix("#!") else {
                continue;
            };
            let parts: Vec<&str> = directive.split_whitespace().collect();
            let bad = |m: &str| Error::format(source_name, i + 1, m);
            match parts.as_slice() {
                ["functional", p] => declarations.declare_functional(normalize_entity(p)?),
                ["range", p, kind] => {
                    let kind = ObjectKind::from_name(kind).ok_or_else(|| bad("range must be entity, number or date"))?;
                    declarations.declare_range(normalize_entity(p)?, kind);
                }
                _ => return Err(bad("unknown directive")),
            }
        }
        let mut kb = KnowledgeBase::new(declarations);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches(['\r', '\n']);
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let bad = |m: String| Error::format(source_name, i + 1, m);
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if fields.len() != 3 && fields.len() != 4 {
                return Err(bad(format!("expected 3 or 4 tab-separated fields, found {}", fields.len())));
            }
            let subject = normalize_entity(fields[0]).map_err(|e| bad(e.to_string()))?;
            let predicate = normalize_entity(fields[1]).map_err(|e| bad(e.to_string()))?;
            let object = match kb.declarations.range(&predicate) {
                Some(kind) => Object::parse_kind(kind, fields[2]),
                None => Object::parse_surface(fields[2]),
            }
            .map_err(|e| bad(e.to_string()))?;
            let confidence = match fields.get(3) {
                Some(c) => c.parse::<f64>().map_err(|_| bad(format!("bad confidence {c:?}")))?,
                None => 1.0,
            };
            let triple = Triple::new(subject, predicate, object, confidence).map_err(|e| bad(e.to_string()))?;
            kb.insert(triple).map_err(|e| bad(e.to_string()))?;
        }
        Ok(kb)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&read_file(path)?, &path.display().to_string())
    }

    /// Serializes back to the TSV format; `parse(to_tsv())` reproduces the store.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for p in self.declarations.functional() {
            let _ = writeln!(out, "#!functional {p}");
        }
        for (p, kind) in self.declarations.ranges() {
            let _ = writeln!(out, "#!range {p} {}", kind.name());
        }
        for t in self.triples.values() {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", t.subject, t.predicate, t.object, t.confidence());
        }
        out
    }

    pub fn declarations(&self) -> &Declarations {
        &self.declarations
    }

    /// Triples in key order.
    pub fn triples(&self) -> impl Iterator<Item = &Triple> {
        self.triples.values()
    }

    pub fn get(&self, key: &FactKey) -> Option<&Triple> {
        self.triples.get(key)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn has_entity(&self, entity: &EntityId) -> bool {
        self.by_entity.contains_key(entity)
    }

    pub fn entities(&self) -> impl Iterator<Item = &EntityId> {
        self.by_entity.keys()
    }

    /// Triples with `entity` as subject or object.
    pub fn touching<'a>(&'a self, entity: &EntityId) -> impl Iterator<Item = &'a Triple> + 'a {
        self.by_entity
            .get(entity)
            .into_iter()
            .flatten()
            .map(|k| &self.triples[k])
    }

    pub fn objects_of(&self, predicate: &EntityId) -> BTreeSet<&Object> {
        self.triples
            .values()
            .filter(|t| &t.predicate == predicate)
            .map(|t| &t.object)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = "\
#!functional born_in
#!range born_year number
# people
einstein\tborn_in\tulm\t1.0
ulm\tlocated_in\tgermany
einstein\tborn_year\t1879\t0.9
einstein\tborn_year\t1879\t0.5
";

    #[test]
    fn parses_fixture() {
        let kb = KnowledgeBase::parse(FIXTURE, "fixture").unwrap();
        assert_eq!(kb.len(), 3);
        let born_in = EntityId::new("born_in").unwrap();
        assert!(kb.declarations().is_functional(&born_in));
        let year = kb.triples().find(|t| t.predicate.as_str() == "born_year").unwrap();
        assert_eq!(year.confidence(), 0.9);
        assert_eq!(year.object.kind(), ObjectKind::Number);
        assert!(kb.has_entity(&EntityId::new("germany").unwrap()));
        assert_eq!(kb.touching(&EntityId::new("ulm").unwrap()).count(), 2);
    }

    #[test]
    fn round_trips_through_tsv() {
        let kb = KnowledgeBase::parse(FIXTURE, "fixture").unwrap();
        let again = KnowledgeBase::parse(&kb.to_tsv(), "again").unwrap();
        assert_eq!(kb.to_tsv(), again.to_tsv());
    }

    #[test]
    fn rejects_range_violations_and_bad_lines() {
        let err = KnowledgeBase::parse("#!range born_year number\na\tborn_year\tparis\n", "f").unwrap_err();
        assert!(err.to_string().starts_with("f:2:"), "{err}");
        assert!(KnowledgeBase::parse("a\tb\n", "f").is_err());
        assert!(KnowledgeBase::parse("a\tb\tc\t1.5\n", "f").is_err());
        assert!(KnowledgeBase::parse("#!frobnicate x\n", "f").is_err());
    }

    #[test]
    fn entity_range_keeps_numeric_names_as_entities() {
        let kb = KnowledgeBase::parse("#!range code entity\nx\tcode\t42\n", "f").unwrap();
        assert_eq!(kb.triples().next().unwrap().object.kind(), ObjectKind::Entity);
    }
}
