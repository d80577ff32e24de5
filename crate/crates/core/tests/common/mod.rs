//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use archcalc::graphbridge::Graph;
use archcalc::morphism::HomFlags;
use archcalc::{Architecture, ElementId, Homomorphism};

/// Calls `f` on every map `0..n -> 0..m` given as a slice, stopping when it
/// returns true. Returns whether it stopped early.
pub fn any_map(n: usize, m: usize, allowed: &dyn Fn(usize, usize) -> bool, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn go(
        k: usize,
        n: usize,
        m: usize,
        cur: &mut Vec<usize>,
        allowed: &dyn Fn(usize, usize) -> bool,
        f: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if k == n {
            return f(cur);
        }
        for v in 0..m {
            if allowed(k, v) {
                cur.push(v);
                if go(k + 1, n, m, cur, allowed, f) {
                    return true;
                }
                cur.pop();
            }
        }
        false
    }
    go(0, n, m, &mut Vec::new(), allowed, f)
}

/// Whether a homomorphism with the given flags exists, by trying every
/// triple of maps.
pub fn brute_force_hom_exists(a: &Architecture, b: &Architecture, flags: HomFlags) -> bool {
    let (sa, sb) = (Arc::new(a.clone()), Arc::new(b.clone()));
    let rel_ok = |i: usize, j: usize| a.relations[i].arity == b.relations[j].arity;
    let fun_ok = |i: usize, j: usize| a.functions[i].arity == b.functions[j].arity;
    any_map(a.len(), b.len(), &|_, _| true, &mut |h0| {
        let elements: BTreeMap<ElementId, ElementId> =
            h0.iter().enumerate().map(|(i, &j)| (a.universe[i].clone(), b.universe[j].clone())).collect();
        any_map(a.relations.len(), b.relations.len(), &rel_ok, &mut |hr| {
            any_map(a.functions.len(), b.functions.len(), &fun_ok, &mut |hf| {
                let h = Homomorphism::new(sa.clone(), sb.clone(), elements.clone(), hr.to_vec(), hf.to_vec()).unwrap();
                h.is_homomorphism() && (!flags.surjective || h.is_surjective()) && (!flags.injective || h.is_injective())
            })
        })
    })
}

/// Whether some vertex bijection carries the edges of `g` exactly onto
/// those of `h`.
pub fn brute_force_graph_isomorphic(g: &Graph, h: &Graph) -> bool {
    let gv: Vec<&ElementId> = g.vertices().iter().collect();
    let hv: Vec<&ElementId> = h.vertices().iter().collect();
    if gv.len() != hv.len() || g.edges().len() != h.edges().len() {
        return false;
    }
    let pos = |vs: &[&ElementId], e: &ElementId| vs.iter().position(|v| *v == e).unwrap();
    let n = gv.len();
    let mut used = vec![false; n];
    let mut perm = Vec::new();
    fn go(
        k: usize,
        n: usize,
        used: &mut Vec<bool>,
        perm: &mut Vec<usize>,
        check: &dyn Fn(&[usize]) -> bool,
    ) -> bool {
        if k == n {
            return check(perm);
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                perm.push(v);
                if go(k + 1, n, used, perm, check) {
                    return true;
                }
                perm.pop();
                used[v] = false;
            }
        }
        false
    }
    let check = |perm: &[usize]| {
        g.edges().iter().all(|(a, b)| {
            let (x, y) = (hv[perm[pos(&gv, a)]], hv[perm[pos(&gv, b)]]);
            h.edges().contains(&(x.clone(), y.clone()))
        })
    };
    go(0, n, &mut used, &mut perm, &check)
}

pub fn ids(xs: &[&str]) -> std::collections::BTreeSet<ElementId> {
    xs.iter().map(|s| ElementId::new(*s).unwrap()).collect()
}
