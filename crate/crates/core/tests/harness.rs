use claimguard::extraction::{claims_from_text, ClaimGrammar};
use claimguard::harness::*;
use claimguard::kgraph::{Declarations, KnowledgeBase};
use claimguard::model::Triple;
use claimguard::Error;
use proptest::prelude::*;

fn world() -> KnowledgeBase {
    synthetic_world(&WorldSpec {
        people: 12,
        cities: 5,
        countries: 3,
        with_dates: true,
        seed: 1,
    })
    .unwrap()
}

fn bytes(examples: &[LabeledExample]) -> Vec<u8> {
    let mut out = Vec::new();
    write_dataset(examples, &mut out).unwrap();
    out
}

fn scored(pairs: &[(f64, bool)]) -> Vec<ScoredExample> {
    pairs
        .iter()
        .enumerate()
        .map(|(i, &(score, hallucinated))| ScoredExample {
            id: format!("s{i}"),
            score,
            hallucinated,
            gold_claims: 0,
            detected_claims: 0,
            matched_claims: 0,
            p_causal: 0.0,
            p_symbolic: 0.0,
            uncertainty: 0.0,
            seconds: 0.0,
        })
        .collect()
}

fn brute_force_auc(pairs: &[(f64, bool)]) -> f64 {
    let mut wins = 0.0;
    let mut total = 0.0;
    for p in pairs.iter().filter(|p| p.1) {
        for n in pairs.iter().filter(|p| !p.1) {
            total += 1.0;
            wins += if p.0 > n.0 { 1.0 } else if p.0 == n.0 { 0.5 } else { 0.0 };
        }
    }
    wins / total
}

#[test]
fn rate_zero_and_one() {
    let g = ClaimGrammar::default();
    assert!(perturb_corpus(&world(), 20, 0.0, 5, &g).unwrap().iter().all(|e| e.label == Label::Clean));
    let all = perturb_corpus(&world(), 20, 1.0, 5, &g).unwrap();
    assert!(all.iter().all(|e| e.label == Label::Hallucinated && !e.gold_contradicted_claims.is_empty()));
}

#[test]
fn exact_corruption_count_and_reproducibility() {
    let g = ClaimGrammar::default();
    let a = perturb_corpus(&world(), 10, 0.5, 42, &g).unwrap();
    let b = perturb_corpus(&world(), 10, 0.5, 42, &g).unwrap();
    assert_eq!(a.iter().filter(|e| e.label.is_hallucinated()).count(), 5);
    assert_eq!(bytes(&a), bytes(&b));
    assert_ne!(bytes(&a), bytes(&perturb_corpus(&world(), 10, 0.5, 43, &g).unwrap()));
}

#[test]
fn gold_claims_appear_in_responses() {
    let g = ClaimGrammar::default();
    for e in perturb_corpus(&world(), 30, 1.0, 8, &g).unwrap() {
        let ids: Vec<String> = claims_from_text(&e.response, &g).unwrap().claims.iter().map(|c| c.id.to_string()).collect();
        for gold in &e.gold_contradicted_claims {
            assert!(ids.contains(gold), "{} lacks {gold}", e.response);
        }
    }
}

#[test]
fn clean_responses_state_kb_facts() {
    let g = ClaimGrammar::default();
    let kb = world();
    for e in perturb_corpus(&kb, 30, 0.0, 8, &g).unwrap() {
        for c in claims_from_text(&e.response, &g).unwrap().claims {
            assert!(kb.get(&c.triple.key()).is_some(), "{c}");
        }
    }
}

#[test]
fn dataset_round_trip() {
    let examples = perturb_corpus(&world(), 8, 0.5, 2, &ClaimGrammar::default()).unwrap();
    let text = bytes(&examples);
    assert_eq!(read_dataset(&text[..], "mem").unwrap(), examples);
}

#[test]
fn no_swap_target_is_an_error() {
    let kb = KnowledgeBase::from_triples(Declarations::new(), [Triple::parse("ada", "born_in", "ulm").unwrap()]).unwrap();
    let err = perturb_corpus(&kb, 4, 1.0, 0, &ClaimGrammar::default()).unwrap_err();
    assert!(matches!(err, Error::InsufficientEntities(_)));
}

#[test]
fn metric_examples() {
    let m = metrics_from_scores(&scored(&[(0.1, false), (0.2, false), (0.8, true), (0.9, true)]), 0.5);
    assert_eq!((m.precision, m.recall, m.f1, m.auc), (Some(1.0), Some(1.0), Some(1.0), Some(1.0)));
    let ties = metrics_from_scores(&scored(&[(0.4, false), (0.4, true), (0.4, false), (0.4, true)]), 0.5);
    assert_eq!(ties.auc, Some(0.5));
    assert_eq!(ties.precision, None);
    assert!(matches!(ties.require("precision"), Err(Error::UndefinedMetric("precision"))));
    let f1 = harmonic_f1(0.893, 0.917).unwrap();
    assert!((f1 - 0.905).abs() <= 0.001);
}

#[test]
fn undefined_metrics_are_omitted() {
    let m = metrics_from_scores(&scored(&[(0.1, false), (0.2, false)]), 0.5);
    let v = metrics_value(&m, false);
    assert!(v.get("recall").is_none() && v.get("auc").is_none());
    assert_eq!(v["counts"]["tn"], 2);
}

proptest! {
    #[test]
    fn auc_equals_pairwise_count(pairs in prop::collection::vec(((0..20u8).prop_map(|s| s as f64 / 20.0), any::<bool>()), 2..200)) {
        prop_assume!(pairs.iter().any(|p| p.1) && pairs.iter().any(|p| !p.1));
        let a = auc(&pairs).unwrap();
        prop_assert!((a - brute_force_auc(&pairs)).abs() < 1e-12);
    }

    #[test]
    fn metrics_ignore_order(pairs in prop::collection::vec((0.0..1.0f64, any::<bool>()), 1..60), threshold in 0.0..1.0f64, rot in 0..60usize) {
        let mut shuffled = pairs.clone();
        shuffled.reverse();
        let len = shuffled.len();
        shuffled.rotate_left(rot % len);
        let a = metrics_from_scores(&scored(&pairs), threshold);
        let b = metrics_from_scores(&scored(&shuffled), threshold);
        prop_assert_eq!(a.counts, b.counts);
        prop_assert_eq!(a.precision, b.precision);
        prop_assert_eq!(a.recall, b.recall);
        prop_assert_eq!(a.auc, b.auc);
    }
}
