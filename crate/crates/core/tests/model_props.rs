use claimguard::extraction::{extract, render_triple, split_sentences, ClaimGrammar};
use claimguard::fusion::FusionWeights;
use claimguard::model::{ClaimId, ClaimVerdict, ClaimStatus, EntityId, Polarity, Triple, Verdict, VerdictReport};
use claimguard::report::{parse_report, serialize_report};
use proptest::prelude::*;

const NAMES: [&str; 5] = ["Ada Lovelace", "Ulm", "New York", "Marie Curie", "Bohr"];

fn triple() -> impl Strategy<Value = Triple> {
    prop_oneof![
        (0..5usize, prop::sample::select(vec!["born_in", "located_in", "works_on", "married_to", "capital_of"]), 0..5usize)
            .prop_map(|(s, p, o)| Triple::parse(NAMES[s], p, NAMES[o]).unwrap()),
        (0..5usize, 1000..2100i32).prop_map(|(s, y)| Triple::parse(NAMES[s], "born_year", &y.to_string()).unwrap()),
        (0..5usize, 1800..2000i32, 1..=12u32, 1..=28u32)
            .prop_map(|(s, y, m, d)| Triple::parse(NAMES[s], "died_on", &format!("{y}-{m:02}-{d:02}")).unwrap()),
    ]
}

fn polarity() -> impl Strategy<Value = Polarity> {
    prop_oneof![Just(Polarity::Asserted), Just(Polarity::Negated)]
}

fn grid(x: u32) -> f64 {
    x as f64 / 1_000_000.0
}

proptest! {
    #[test]
    fn rendered_claims_extract_back(ts in prop::collection::vec((triple(), polarity()), 1..5)) {
        let g = ClaimGrammar::default();
        let text: Vec<String> = ts.iter().map(|(t, p)| render_triple(t, *p, &g).unwrap()).collect();
        let text = text.join(" ");
        let claims = extract(&text, &g).claims;
        prop_assert_eq!(claims.len(), ts.len());
        for ((t, p), c) in ts.iter().zip(&claims) {
            prop_assert_eq!(&c.triple.key(), &t.key());
            prop_assert_eq!(c.polarity, *p);
            prop_assert!(text[c.span.start..c.span.end].ends_with('.'));
        }
    }

    #[test]
    fn sentence_spans_tile_the_text(words in prop::collection::vec("[a-z]{1,6}[.!?]?", 0..20)) {
        let text = words.join(" ");
        let spans = split_sentences(&text);
        for w in spans.windows(2) {
            prop_assert!(w[0].end <= w[1].start);
        }
        for s in &spans {
            prop_assert!(s.start < s.end && s.end <= text.len());
        }
    }

    #[test]
    fn claim_ids_depend_only_on_content(t in triple(), p in polarity()) {
        let a = ClaimId::of(&t.subject, &t.predicate, &t.object, p);
        let again = Triple::parse(t.subject.as_str(), t.predicate.as_str(), &t.object.to_string()).unwrap();
        prop_assert_eq!(&a, &ClaimId::of(&again.subject, &again.predicate, &again.object, p));
        prop_assert_eq!(a.as_str().len(), 16);
    }

    #[test]
    fn reports_round_trip(
        scores in prop::array::uniform4(0..=1_000_000u32),
        ts in prop::collection::vec((triple(), polarity(), 0..3usize, prop::option::of(0..=1_000_000u32)), 0..4),
    ) {
        let per_claim = ts
            .iter()
            .map(|(t, p, s, c)| ClaimVerdict {
                claim: claimguard::model::Claim::from_triple(t, *p, claimguard::model::Span::new(0, 3)),
                status: [ClaimStatus::Supported, ClaimStatus::Contradicted, ClaimStatus::Unverifiable][*s],
                evidence: vec![t.clone().with_confidence(grid(scores[0])).unwrap()],
                proof: None,
                consistency: c.map(grid),
            })
            .collect();
        let report = VerdictReport {
            score: grid(scores[0]),
            verdict: Verdict::Flag,
            p_causal: grid(scores[1]),
            p_symbolic: grid(scores[2]),
            uncertainty: grid(scores[3]),
            weights: FusionWeights::new(0.25, 0.5, 0.25, -0.5).unwrap(),
            per_claim,
            trace: vec!["a".into(), "b \"quoted\"".into()],
        };
        let text = serialize_report(&report);
        let parsed = parse_report(&text).unwrap();
        prop_assert_eq!(&parsed, &report);
        prop_assert_eq!(serialize_report(&parsed), text);
    }
}

#[test]
fn entity_normalization() {
    assert_eq!(EntityId::new("  New   York ").unwrap().as_str(), "new_york");
    assert!(EntityId::new("   ").is_err());
}
