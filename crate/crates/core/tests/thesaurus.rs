use std::collections::BTreeSet;

use drec_core::thesaurus::parse_thesaurus_unchecked;
use drec_core::{ancestors, parse_thesaurus, validate_thesaurus, Facet, Thesaurus, Violation};
use drec_testkit::{fixture, SyntheticThesaurus};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn shipped_thesaurus_is_valid_and_covers_all_facets() {
    let t = parse_thesaurus(&std::fs::read(fixture("thesaurus.json")).unwrap()).unwrap();
    assert!(validate_thesaurus(&t).is_valid());
    let facets: BTreeSet<Facet> = t.roots().filter_map(|c| c.facet).collect();
    assert_eq!(facets.len(), 6);
    assert_eq!(
        t.get("huis-clos").unwrap().definition,
        "Le film est composé de plans tournés dans un seul et même lieu fermé."
    );
}

#[test]
fn synthetic_292_concepts_validate_clean() {
    let mut rng = ChaCha8Rng::seed_from_u64(292);
    let syn = SyntheticThesaurus::generate(&mut rng, 292, 5);
    let t = Thesaurus::from_concepts_unchecked(syn.concepts.clone());
    assert_eq!(t.len(), 292);
    assert_eq!(t.roots().count(), 6);
    assert!(validate_thesaurus(&t).is_valid());
}

#[test]
fn ancestors_match_naive_walk_on_300_concepts() {
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    let syn = SyntheticThesaurus::generate(&mut rng, 300, 5);
    let t = syn.thesaurus();
    let leaves = syn.leaves();
    for _ in 0..50 {
        let leaf = leaves[rng.gen_range(0..leaves.len())];
        let expected: Vec<(String, usize)> = syn
            .naive_ancestors(leaf)
            .into_iter()
            .map(|(i, d)| (syn.concepts[i].id.clone(), d))
            .collect();
        assert_eq!(ancestors(&t, &syn.concepts[leaf].id).unwrap(), expected);
    }
}

#[test]
fn depth_is_ancestor_count_and_ends_at_root() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let syn = SyntheticThesaurus::generate(&mut rng, 120, 5);
    let t = syn.thesaurus();
    for (i, c) in syn.concepts.iter().enumerate() {
        let anc = t.ancestors(&c.id).unwrap();
        assert_eq!(t.depth(&c.id).unwrap(), anc.len());
        let top = anc.last().map(|(id, _)| id.as_str()).unwrap_or(&c.id);
        assert!(t.get(top).unwrap().is_root());
        assert_eq!(t.facet(&c.id).unwrap(), syn.facet[i]);
        for child in t.narrower(&c.id) {
            assert_eq!(
                t.get(child).unwrap().broader.as_deref(),
                Some(c.id.as_str())
            );
        }
    }
}

/// One injected defect must produce exactly one violation of its kind.
#[test]
fn injected_defects_are_pinpointed() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let syn = SyntheticThesaurus::generate(&mut rng, 292, 5);
    let leaf = syn
        .leaves()
        .into_iter()
        .filter(|&l| syn.parent[l].is_some())
        .nth(3)
        .unwrap();
    let leaf_id = syn.concepts[leaf].id.clone();

    // cycle: a root now hangs under one of its own descendants
    let mut cyclic = syn.concepts.clone();
    let root = syn.naive_ancestors(leaf).last().unwrap().0;
    cyclic[root].broader = Some(leaf_id.clone());
    let v = validate_thesaurus(&Thesaurus::from_concepts_unchecked(cyclic)).violations;
    assert_eq!(v.len(), 1, "{v:?}");
    match &v[0] {
        Violation::Cycle { members } => {
            assert!(members.contains(&leaf_id));
            assert!(members.contains(&syn.concepts[root].id));
        }
        other => panic!("{other:?}"),
    }

    let mut dangling = syn.concepts.clone();
    dangling[leaf].broader = Some("nowhere".into());
    let v = validate_thesaurus(&Thesaurus::from_concepts_unchecked(dangling)).violations;
    assert_eq!(
        v,
        vec![Violation::DanglingBroader {
            id: leaf_id.clone(),
            broader: "nowhere".into()
        }]
    );

    let mut mismatch = syn.concepts.clone();
    let wrong = Facet::ALL
        .into_iter()
        .find(|f| *f != syn.facet[leaf])
        .unwrap();
    mismatch[leaf].facet = Some(wrong);
    let v = validate_thesaurus(&Thesaurus::from_concepts_unchecked(mismatch)).violations;
    assert_eq!(
        v,
        vec![Violation::FacetMismatch {
            id: leaf_id.clone(),
            declared: wrong,
            inherited: syn.facet[leaf]
        }]
    );

    let mut asym = syn.concepts.clone();
    let other = (0..asym.len())
        .find(|&i| i != leaf && !asym[leaf].related.contains(&asym[i].id))
        .unwrap();
    let other_id = asym[other].id.clone();
    asym[leaf].related.insert(other_id.clone());
    let v = validate_thesaurus(&Thesaurus::from_concepts_unchecked(asym)).violations;
    assert_eq!(
        v,
        vec![Violation::AsymmetricRelated {
            from: leaf_id,
            to: other_id
        }]
    );
}

#[test]
fn serialize_then_parse_is_identity_on_fixture() {
    let src = std::fs::read(fixture("thesaurus.json")).unwrap();
    let t = parse_thesaurus(&src).unwrap();
    assert_eq!(parse_thesaurus(t.to_json().as_bytes()).unwrap(), t);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialize_then_parse_is_identity(seed in any::<u64>(), n in 6usize..200, levels in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = SyntheticThesaurus::generate(&mut rng, n, levels).thesaurus();
        let back = parse_thesaurus(t.to_json().as_bytes()).unwrap();
        prop_assert_eq!(back, t);
    }

    /// Whatever the strict parser accepts, the validator finds clean; whatever
    /// it rejects as invalid, the validator reports.
    #[test]
    fn parser_and_validator_agree(seed in any::<u64>(), n in 6usize..60, mutations in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut concepts = SyntheticThesaurus::generate(&mut rng, n, 4).concepts;
        for _ in 0..mutations {
            let i = rng.gen_range(0..concepts.len());
            let j = rng.gen_range(0..concepts.len());
            let target = concepts[j].id.clone();
            match rng.gen_range(0..4) {
                0 => concepts[i].broader = Some(target),
                1 => { concepts[i].related.insert(target); }
                2 => concepts[i].facet = Some(Facet::ALL[rng.gen_range(0..6)]),
                _ => concepts[i].broader = None,
            }
        }
        let doc = Thesaurus::from_concepts_unchecked(concepts).to_json();
        let unchecked = parse_thesaurus_unchecked(doc.as_bytes()).unwrap();
        let report = validate_thesaurus(&unchecked);
        match parse_thesaurus(doc.as_bytes()) {
            Ok(t) => {
                prop_assert!(report.is_valid());
                prop_assert!(validate_thesaurus(&t).is_valid());
            }
            Err(_) => prop_assert!(!report.is_valid()),
        }
    }
}
