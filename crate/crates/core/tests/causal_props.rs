use claimguard::causal::{
    causal_detect, check_consistency, estimate_causal_effect, generate_counterfactual, intervene, Intervention,
    LogicIndicator, ScmConfig, DROP_RARE_FACTS,
};
use claimguard::extraction::{claims_from_text, ClaimGrammar};
use claimguard::generator::{Generator, MockGenerator};
use claimguard::kgraph::{Declarations, KnowledgeBase, Rule, RuleSet};
use claimguard::model::{Claim, KnowledgeState, Polarity, Provenance, QueryContext, Response, Span, Triple};
use proptest::prelude::*;

const ENTITIES: [&str; 4] = ["a", "b", "c", "d"];
const PREDICATES: [&str; 3] = ["born_in", "located_in", "works_on"];

fn triple_strategy() -> impl Strategy<Value = Triple> {
    (0..4usize, 0..3usize, 0..4usize, prop_oneof![Just(1.0), 0.05..1.0f64]).prop_map(|(s, p, o, c)| {
        Triple::parse(ENTITIES[s], PREDICATES[p], ENTITIES[o]).unwrap().with_confidence(c).unwrap()
    })
}

fn state_strategy() -> impl Strategy<Value = KnowledgeState> {
    prop::collection::vec(triple_strategy(), 0..8).prop_map(|ts| KnowledgeState::from_facts(ts, Provenance::Kb))
}

fn intervention_strategy() -> impl Strategy<Value = Intervention> {
    (0..3usize, triple_strategy(), 0..4usize).prop_map(|(kind, t, o)| match kind {
        0 => Intervention::remove(t),
        1 => Intervention::inject(t),
        _ => {
            let r = Triple::parse(t.subject.as_str(), t.predicate.as_str(), ENTITIES[o]).unwrap();
            Intervention::replace_object(t, r).unwrap()
        }
    })
}

fn indicator() -> LogicIndicator {
    let mut declarations = Declarations::new();
    declarations.declare_functional(claimguard::model::EntityId::new("born_in").unwrap());
    LogicIndicator {
        rules: RuleSet::from_rules(vec![Rule::parse("born_in(?x, ?y) & located_in(?y, ?z) -> born_in_country(?x, ?z)").unwrap()]),
        declarations,
        ..Default::default()
    }
}

fn claim(t: &Triple) -> Claim {
    Claim::from_triple(t, Polarity::Asserted, Span::new(0, 0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn intervention_is_local(k in state_strategy(), i in intervention_strategy()) {
        let out = intervene(&k, &i);
        let touched: Vec<_> = std::iter::once(i.target.key()).chain(i.replacement.iter().map(Triple::key)).collect();
        for (t, p) in k.entries() {
            if !touched.contains(&t.key()) {
                prop_assert_eq!(out.provenance(&t.key()), Some(p));
            }
        }
        for t in out.facts() {
            prop_assert!(touched.contains(&t.key()) || k.contains(&t.key()));
        }
    }

    #[test]
    fn effect_of_a_state_on_itself_is_zero(k in state_strategy(), t in triple_strategy(), rate in 0.0..1.0f64, seed in any::<u64>()) {
        let mut scm = ScmConfig::default().with_confounder(DROP_RARE_FACTS, rate);
        scm.draws = 8;
        scm.seeds.u_h = seed;
        prop_assert_eq!(estimate_causal_effect(&k, &k, &scm, &claim(&t), &indicator()).unwrap(), 0.0);
    }

    #[test]
    fn effect_is_antisymmetric(k in state_strategy(), k0 in state_strategy(), t in triple_strategy(), seed in any::<u64>()) {
        let mut scm = ScmConfig::default().with_confounder(DROP_RARE_FACTS, 0.3);
        scm.draws = 8;
        scm.seeds.u_h = seed;
        let ind = indicator();
        let forward = estimate_causal_effect(&k, &k0, &scm, &claim(&t), &ind).unwrap();
        let backward = estimate_causal_effect(&k0, &k, &scm, &claim(&t), &ind).unwrap();
        prop_assert!((forward + backward).abs() <= 1e-9);
    }

    #[test]
    fn consistency_is_a_similarity(k in state_strategy(), k2 in state_strategy()) {
        let g = MockGenerator::new(ClaimGrammar::default());
        let ctx = QueryContext::new("");
        let y = g.generate(&ctx, &k, 0).unwrap();
        let y2 = g.generate(&ctx, &k2, 0).unwrap();
        let c = check_consistency(&y, &y2);
        prop_assert!((0.0..=1.0).contains(&c));
        prop_assert_eq!(c, check_consistency(&y2, &y));
        prop_assert_eq!(check_consistency(&y, &y), 1.0);
    }
}

#[test]
fn confounder_effect_matches_enumeration() {
    let k = KnowledgeState::from_facts(
        [
            Triple::parse("einstein", "born_in", "ulm").unwrap().with_confidence(0.9).unwrap(),
            Triple::parse("ulm", "located_in", "germany").unwrap().with_confidence(0.9).unwrap(),
        ],
        Provenance::Kb,
    );
    let c = claim(&Triple::parse("einstein", "born_in_country", "germany").unwrap());
    let rate = 0.5;
    // supported only when both facts survive: P(H | k) = 1 - (1 - rate)^2, P(H | empty) = 1
    let exact = (1.0 - (1.0 - rate) * (1.0 - rate)) - 1.0;
    let mut scm = ScmConfig::default().with_confounder(DROP_RARE_FACTS, rate);
    scm.draws = 400;
    scm.seeds.u_h = 11;
    let estimate = estimate_causal_effect(&k, &KnowledgeState::new(), &scm, &c, &indicator()).unwrap();
    assert!((estimate - exact).abs() <= 0.05, "{estimate} vs {exact}");
}

#[test]
fn detection_matches_hand_computation() {
    let kb = KnowledgeBase::load(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/einstein.tsv")).unwrap();
    let grammar = ClaimGrammar::default();
    let mock = MockGenerator::new(grammar.clone());
    let ctx = QueryContext::with_mentions("Tell me about Einstein.", |e| kb.has_entity(e));
    let text = "Einstein was born in Ulm. Einstein was born in the year 1879. Einstein works on physics.";
    let response = Response::new(text, claims_from_text(text, &grammar).unwrap().claims);
    let detection = causal_detect(&ctx, &response, &kb, &mock, 2, 0).unwrap();

    let k = claimguard::causal::estimate_knowledge_state(&ctx, &response.claims, &kb, 2);
    let mut sum = 0.0;
    for c in &response.claims {
        let y_prime = mock.generate(&ctx, &generate_counterfactual(&k, c), 0).unwrap();
        let a: std::collections::BTreeSet<_> = response.claims.iter().map(|c| c.id.clone()).collect();
        let b: std::collections::BTreeSet<_> = y_prime.claims.iter().map(|c| c.id.clone()).collect();
        sum += 1.0 - a.intersection(&b).count() as f64 / a.union(&b).count() as f64;
    }
    let expected = sum / response.claims.len() as f64;
    assert!((detection.p_causal - expected).abs() <= 1e-9, "{} vs {expected}", detection.p_causal);
}
