use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::{index, IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::causal::{intervene, Intervention};
use crate::error::{Error, Result};
use crate::extraction::ClaimGrammar;
use crate::generator::{Generator, MockGenerator};
use crate::kgraph::KnowledgeBase;
use crate::model::{ClaimId, EntityId, KnowledgeState, Polarity, Provenance, QueryContext, Triple};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Clean,
    Hallucinated,
}

impl Label {
    pub fn is_hallucinated(self) -> bool {
        self == Label::Hallucinated
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub id: String,
    pub context: String,
    pub response: String,
    pub label: Label,
    #[serde(default)]
    pub gold_contradicted_claims: Vec<String>,
}

/// Most facts rendered into one response.
pub const MAX_FACTS_PER_RESPONSE: usize = 3;

fn swap_targets<'a>(kb: &'a KnowledgeBase, fact: &Triple) -> Vec<&'a crate::model::Object> {
    let held: BTreeSet<_> = kb
        .triples()
        .filter(|t| t.subject == fact.subject && t.predicate == fact.predicate)
        .map(|t| &t.object)
        .collect();
    kb.objects_of(&fact.predicate)
        .into_iter()
        .filter(|o| !held.contains(o) && o.kind() == fact.object.kind())
        .collect()
}

/// A seeded corpus of responses about single KB subjects.
///
/// Each response renders one to three true facts about a subject with the
/// mock generator. Exactly `round(rate * n)` responses get one fact's object
/// swapped for another object of the same predicate that the subject does
/// not hold; facts of functional predicates are preferred for the swap so
/// the corruption is a direct contradiction.
pub fn perturb_corpus(
    kb: &KnowledgeBase,
    n_examples: usize,
    hallucination_rate: f64,
    seed: u64,
    grammar: &ClaimGrammar,
) -> Result<Vec<LabeledExample>> {
    if !(0.0..=1.0).contains(&hallucination_rate) {
        return Err(Error::InvalidArgument(format!("hallucination rate {hallucination_rate} outside [0, 1]")));
    }
    let subjects: Vec<&EntityId> = kb
        .triples()
        .filter(|t| grammar.phrase_for(&t.predicate).is_some())
        .map(|t| &t.subject)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if subjects.is_empty() {
        return Err(Error::InvalidArgument("knowledge base has no renderable facts".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_bad = (hallucination_rate * n_examples as f64).round() as usize;
    let mut order: Vec<usize> = (0..n_examples).collect();
    order.shuffle(&mut rng);
    let bad: BTreeSet<usize> = order[..n_bad].iter().copied().collect();
    let mock = MockGenerator::new(grammar.clone());

    let mut out = Vec::with_capacity(n_examples);
    for i in 0..n_examples {
        let corrupt = bad.contains(&i);
        let subject = *subjects.choose(&mut rng).expect("non-empty");
        let facts: Vec<&Triple> = kb
            .touching(subject)
            .filter(|t| &t.subject == subject && grammar.phrase_for(&t.predicate).is_some())
            .collect();
        let k = rng.random_range(1..=facts.len().min(MAX_FACTS_PER_RESPONSE));
        let mut chosen: Vec<&Triple> = index::sample(&mut rng, facts.len(), k).into_iter().map(|j| facts[j]).collect();
        chosen.sort_by_key(|t| t.key());

        let mut state = KnowledgeState::from_facts(chosen.iter().map(|t| (*t).clone()), Provenance::Kb);
        let mut gold = Vec::new();
        if corrupt {
            let swappable = |pool: &[&Triple], functional_only: bool| -> Vec<usize> {
                (0..pool.len())
                    .filter(|&j| !functional_only || kb.declarations().is_functional(&pool[j].predicate))
                    .filter(|&j| !swap_targets(kb, pool[j]).is_empty())
                    .collect()
            };
            let mut candidates = swappable(&chosen, true);
            if candidates.is_empty() {
                candidates = swappable(&chosen, false);
            }
            if candidates.is_empty() {
                let mut extra = swappable(&facts, true);
                if extra.is_empty() {
                    extra = swappable(&facts, false);
                }
                let Some(&j) = extra.choose(&mut rng) else {
                    return Err(Error::InsufficientEntities(
                        chosen.first().map(|t| t.predicate.to_string()).unwrap_or_default(),
                    ));
                };
                chosen[0] = facts[j];
                chosen.sort_by_key(|t| t.key());
                chosen.dedup_by_key(|t| t.key());
                state = KnowledgeState::from_facts(chosen.iter().map(|t| (*t).clone()), Provenance::Kb);
                candidates = vec![chosen.iter().position(|t| t.key() == facts[j].key()).expect("inserted")];
            }
            let target = chosen[*candidates.choose(&mut rng).expect("non-empty")];
            let objects = swap_targets(kb, target);
            let object = (*objects.choose(&mut rng).expect("non-empty")).clone();
            let wrong = Triple::certain(target.subject.clone(), target.predicate.clone(), object);
            gold.push(ClaimId::of(&wrong.subject, &wrong.predicate, &wrong.object, Polarity::Asserted).to_string());
            state = intervene(&state, &Intervention::replace_object(target.clone(), wrong)?);
        }
        let context_text = format!("Tell me about {}.", subject.display_name());
        let context = QueryContext {
            text: context_text.clone(),
            mentioned_entities: vec![subject.clone()],
        };
        let response = mock.generate(&context, &state, seed)?;
        out.push(LabeledExample {
            id: format!("ex{i:04}"),
            context: context_text,
            response: response.text,
            label: if corrupt { Label::Hallucinated } else { Label::Clean },
            gold_contradicted_claims: gold,
        });
    }
    Ok(out)
}

/// One JSON object per line.
pub fn write_dataset(examples: &[LabeledExample], mut out: impl Write) -> Result<()> {
    for e in examples {
        let line = serde_json::to_string(e).map_err(|e| Error::Document(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::io("<dataset>", e))?;
    }
    Ok(())
}

pub fn read_dataset(input: impl BufRead, source_name: &str) -> Result<Vec<LabeledExample>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source_name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::format(source_name, i + 1, e.to_string()))?);
    }
    Ok(out)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<LabeledExample>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(std::io::BufReader::new(file), &path.display().to_string())
}
