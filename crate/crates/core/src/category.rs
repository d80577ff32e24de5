//! Identity and composition of homomorphisms.

use std::collections::BTreeMap;

use crate::model::Architecture;
use crate::morphism::{Homomorphism, MorphismError};
use std::sync::Arc;

/// `<id_A, id_R, id_F>`.
pub fn identity(a: &Architecture) -> Homomorphism {
    let a = Arc::new(a.clone());
    let elements = a.universe.iter().map(|e| (e.clone(), e.clone())).collect();
    let relations = (0..a.relations.len()).collect();
    let functions = (0..a.functions.len()).collect();
    Homomorphism::new(a.clone(), a, elements, relations, functions).expect("identity is well formed")
}

/// `g ∘ f`, defined when the target of `f` equals the source of `g`
/// extensionally. Relations and functions of the middle architecture are
/// matched by extension, so differently ordered copies compose.
pub fn compose(g: &Homomorphism, f: &Homomorphism) -> Result<Homomorphism, MorphismError> {
    let middle_f = f.target();
    let middle_g = g.source();
    if middle_f != middle_g {
        return Err(MorphismError::NotComposable);
    }
    let elements: BTreeMap<_, _> = f
        .element_map()
        .iter()
        .map(|(a, b)| (a.clone(), g.element_map()[b].clone()))
        .collect();
    let relations = f
        .relation_map()
        .iter()
        .map(|&j| {
            let k = middle_g
                .relation_index_of(&middle_f.relations[j])
                .expect("extensionally equal middles share relations");
            g.relation_map()[k]
        })
        .collect();
    let functions = f
        .function_map()
        .iter()
        .map(|&j| {
            let k = middle_g
                .function_index_of(&middle_f.functions[j])
                .expect("extensionally equal middles share functions");
            g.function_map()[k]
        })
        .collect();
    Homomorphism::new(f.source_arc().clone(), g.target_arc().clone(), elements, relations, functions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{empty_architecture, trivial_architecture, ElementId};
    use crate::tiers::{elementary_tier, tier_homomorphism, TierPartition};
    use std::collections::BTreeSet;

    fn set(xs: &[&str]) -> BTreeSet<ElementId> {
        xs.iter().map(|s| ElementId::new(*s).unwrap()).collect()
    }

    #[test]
    fn identity_of_empty_and_trivial() {
        let id0 = identity(&empty_architecture());
        assert!(id0.element_map().is_empty());
        assert!(id0.relation_map().is_empty());
        let id1 = identity(&trivial_architecture());
        assert_eq!(id1.relation_map(), [0]);
        assert_eq!(id1.function_map(), [0]);
        assert!(id1.is_isomorphism());
    }

    #[test]
    fn identity_laws() {
        let a = Architecture::builder()
            .elements(["ui", "api", "db", "log"])
            .relation("calls", 2, [["ui", "api"], ["api", "db"], ["api", "log"]])
            .build()
            .unwrap();
        let p = TierPartition::new(vec![set(&["ui"]), set(&["api"]), set(&["db", "log"])]).unwrap();
        let f = tier_homomorphism(&a, &p).unwrap();
        assert_eq!(compose(&identity(f.target()), &f).unwrap(), f);
        assert_eq!(compose(&f, &identity(f.source())).unwrap(), f);
    }

    #[test]
    fn two_tier_maps_compose() {
        // 4 elements on two tiers, into T2, then T2 collapses onto T1's shape
        let a = Architecture::builder()
            .elements(["p", "q", "r", "s"])
            .relation("e", 2, [["p", "r"], ["q", "s"], ["p", "q"]])
            .build()
            .unwrap();
        let f = tier_homomorphism(&a, &TierPartition::new(vec![set(&["p", "q"]), set(&["r", "s"])]).unwrap()).unwrap();
        let t2 = elementary_tier(2);
        let g = tier_homomorphism(&t2, &TierPartition::new(vec![set(&["1", "2"])]).unwrap()).unwrap();
        let h = compose(&g, &f).unwrap();
        assert!(f.is_homomorphism() && g.is_homomorphism());
        assert!(h.is_homomorphism(), "{}", h.check());
        assert_eq!(h.target(), &elementary_tier(1));
    }

    #[test]
    fn mismatched_middle() {
        let f = identity(&elementary_tier(2));
        let g = identity(&elementary_tier(3));
        assert_eq!(compose(&g, &f).unwrap_err(), MorphismError::NotComposable);
    }

    #[test]
    fn middle_order_does_not_matter() {
        let a = Architecture::builder()
            .elements(["x"])
            .relation("r", 1, [["x"]])
            .relation("s", 2, [["x", "x"]])
            .build()
            .unwrap();
        let mut b = a.clone();
        b.relations.reverse();
        let f = identity(&a);
        let g = identity(&b);
        let h = compose(&g, &f).unwrap();
        assert!(h.is_homomorphism());
    }
}
