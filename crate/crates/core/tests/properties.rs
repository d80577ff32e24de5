mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use archcalc::format::{parse, serialize, Document};
use archcalc::generate::{random_architecture, random_bnc, random_partition, random_tiered};
use archcalc::morphism::{find_homomorphism, HomFlags, SearchConfig};
use archcalc::tiers::{check_tier_partition, merge_adjacent_tiers, tier_homomorphism};
use archcalc::views::{is_sub_architecture, restrict};
use archcalc::{Architecture, ElementId};

use common::brute_force_hom_exists;

fn subset(rng: &mut StdRng, of: &[ElementId]) -> BTreeSet<ElementId> {
    of.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn disambiguation_removes_duplicates_and_is_stable(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut a = random_bnc(&mut rng, 4, 3, 4);
        // force a few duplicate extensions
        if let Some(r) = a.relations.first().cloned() {
            a.relations.push(archcalc::Relation { name: "dup".into(), ..r.clone() });
            a.relations.push(archcalc::Relation { name: "dup2".into(), ..r });
        }
        let once = a.disambiguate_relations();
        prop_assert!(once.is_valid(), "{}", once.validate());
        prop_assert_eq!(once.relations.len(), a.relations.len());
        prop_assert_eq!(once.disambiguate_relations(), once);
    }

    #[test]
    fn restriction_composes(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let a = random_architecture(&mut rng, 6);
        let s = subset(&mut rng, &a.universe);
        let t: BTreeSet<ElementId> = s.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
        let twice = restrict(&restrict(&a, &s).unwrap(), &t).unwrap();
        prop_assert_eq!(twice, restrict(&a, &t).unwrap());
    }

    #[test]
    fn strict_restriction_is_sub_architecture(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let a = random_architecture(&mut rng, 6);
        let s = subset(&mut rng, &a.universe);
        let r = restrict(&a, &s).unwrap();
        prop_assert!(r.is_valid());
        prop_assert_eq!(is_sub_architecture(&r, &a), s.len() < a.len());
        prop_assert!(!is_sub_architecture(&a, &a));
    }

    #[test]
    fn merging_adjacent_tiers_keeps_tiering(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let tiers = rng.gen_range(2..=4);
        let size = rng.gen_range(tiers..=7);
        let (a, p) = random_tiered(&mut rng, size, tiers, 8);
        let i = rng.gen_range(1..p.len());
        let merged = merge_adjacent_tiers(&p, i).unwrap();
        prop_assert_eq!(merged.len(), p.len() - 1);
        prop_assert!(check_tier_partition(&a, &merged).unwrap());
    }

    #[test]
    fn verified_partitions_give_homomorphisms(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let size = rng.gen_range(1..=6);
        let a = random_bnc(&mut rng, size, 2, 6);
        let p = random_partition(&mut rng, &a.universe);
        let ok = check_tier_partition(&a, &p).unwrap();
        let h = tier_homomorphism(&a, &p).unwrap();
        prop_assert_eq!(h.is_homomorphism(), ok);
    }

    #[test]
    fn search_agrees_with_brute_force(seed in any::<u64>(), flag in 0usize..4) {
        let mut rng = StdRng::seed_from_u64(seed);
        let size = rng.gen_range(0..=4);
        let a = random_bnc(&mut rng, size, 2, 5);
        let size = rng.gen_range(0..=4);
        let b = random_bnc(&mut rng, size, 2, 6);
        let flags = [HomFlags::ANY, HomFlags::SURJECTIVE, HomFlags::INJECTIVE, HomFlags::BIJECTIVE][flag];
        let found = find_homomorphism(&a, &b, flags, &SearchConfig::default()).unwrap();
        if let Some(h) = &found {
            prop_assert!(h.is_homomorphism());
            prop_assert!(!flags.surjective || h.is_surjective());
            prop_assert!(!flags.injective || h.is_injective());
        }
        prop_assert_eq!(found.is_some(), brute_force_hom_exists(&a, &b, flags));
    }

    #[test]
    fn search_agrees_with_brute_force_on_functions(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let a = random_architecture(&mut rng, 3);
        let b = random_architecture(&mut rng, 3);
        let found = find_homomorphism(&a, &b, HomFlags::ANY, &SearchConfig::default()).unwrap();
        prop_assert_eq!(found.is_some(), brute_force_hom_exists(&a, &b, HomFlags::ANY));
    }

    #[test]
    fn format_round_trip(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let a = random_architecture(&mut rng, 6);
        let doc = Document::architecture("g", a.clone());
        let text = serialize(&doc).unwrap();
        prop_assert_eq!(parse(&text).unwrap(), doc);
        let mut shuffled: Architecture = a;
        shuffled.universe.shuffle(&mut rng);
        shuffled.relations.shuffle(&mut rng);
        shuffled.functions.shuffle(&mut rng);
        prop_assert_eq!(serialize(&Document::architecture("g", shuffled)).unwrap(), text);
    }
}
