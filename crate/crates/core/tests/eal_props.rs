use std::collections::BTreeSet;

use ealinfer::eal::{contract_c, proc_p, unify_u, EalType, Formula, LinExpr, Valuation, VarGen};
use ealinfer::simple::SimpleType;
use ealinfer::solver::{enumerate, ConstraintStore, Kind};
use proptest::prelude::*;

fn arb_skeleton() -> impl Strategy<Value = SimpleType> {
    prop_oneof![Just(SimpleType::Base), Just(SimpleType::Var("a".into()))].prop_recursive(3, 12, 2, |inner| {
        (inner.clone(), inner).prop_map(|(a, b)| SimpleType::arrow(a, b))
    })
}

fn arb_formula() -> impl Strategy<Value = Formula> {
    let atom = prop_oneof![Just(Formula::o()), Just(Formula::Atom("a".into()))];
    let leaf = (atom, 0usize..3).prop_map(|(f, n)| Formula::bangs(n, f));
    leaf.prop_recursive(3, 12, 2, |inner| {
        (inner.clone(), inner, 0usize..3).prop_map(|(a, b, n)| Formula::bangs(n, Formula::lolli(a, b)))
    })
}

/// Exponents in preorder.
fn expos(t: &EalType) -> Vec<&LinExpr> {
    let mut v = vec![t.expo()];
    if let EalType::Arrow { left, right, .. } = t {
        v.extend(expos(left));
        v.extend(expos(right));
    }
    v
}

fn single_var(e: &LinExpr) -> ealinfer::eal::BoxVar {
    let ts: Vec<_> = e.terms().collect();
    assert_eq!(ts.len(), 1);
    assert_eq!(ts[0].1, 1);
    ts[0].0
}

/// Fresh types over one skeleton and a valuation that makes them agree
/// on a random subset of positions.
fn setup(sk: &SimpleType, k: usize, seed: &[u8], agree: bool) -> (Vec<EalType>, Valuation) {
    let mut g = VarGen::default();
    let types: Vec<EalType> = (0..k).map(|_| proc_p(sk, &mut g)).collect();
    let mut x = Valuation::new();
    let mut it = seed.iter().cycle();
    let first: Vec<u64> = expos(&types[0]).iter().map(|_| *it.next().unwrap() as u64 % 3).collect();
    for t in &types {
        for (i, e) in expos(t).into_iter().enumerate() {
            let v = if agree { first[i] } else { *it.next().unwrap() as u64 % 3 };
            x.insert(single_var(e), v);
        }
    }
    (types, x)
}

proptest! {
    #[test]
    fn unification_rows_hold_iff_instances_agree(sk in arb_skeleton(), k in 2usize..4, seed in prop::collection::vec(any::<u8>(), 8), agree in any::<bool>()) {
        let (types, x) = setup(&sk, k, &seed, agree);
        let refs: Vec<&EalType> = types.iter().collect();
        let rows = unify_u(&refs).unwrap();
        let holds = rows.iter().all(|e| e.eval(&x) == 0);
        let inst: BTreeSet<Formula> = types.iter().map(|t| t.instantiate(&x).unwrap()).collect();
        prop_assert_eq!(holds, inst.len() == 1);
        if agree {
            prop_assert!(holds);
        }
    }

    #[test]
    fn contraction_is_unification_plus_a_bang(sk in arb_skeleton(), k in 1usize..4, seed in prop::collection::vec(any::<u8>(), 8), agree in any::<bool>()) {
        let (types, x) = setup(&sk, k, &seed, agree);
        let refs: Vec<&EalType> = types.iter().collect();
        let rows = contract_c(&refs).unwrap();
        if k == 1 {
            prop_assert!(rows.is_empty());
            return Ok(());
        }
        prop_assert_eq!(&rows[0], &(types[0].expo().clone(), Kind::Ge1));
        let u: Vec<(LinExpr, Kind)> = unify_u(&refs).unwrap().into_iter().map(|e| (e, Kind::Eq0)).collect();
        prop_assert_eq!(&rows[1..], &u[..]);
        let holds = rows.iter().all(|(e, kind)| match kind {
            Kind::Ge1 => e.eval(&x) >= 1,
            _ => e.eval(&x) == 0,
        });
        let inst: Vec<Formula> = types.iter().map(|t| t.instantiate(&x).unwrap()).collect();
        let same = inst.iter().all(|f| *f == inst[0]);
        prop_assert_eq!(holds, same && matches!(inst[0], Formula::Bang(_)));
    }

    #[test]
    fn fresh_types_use_fresh_variables(a in arb_skeleton(), b in arb_skeleton()) {
        let mut g = VarGen::default();
        let s = proc_p(&a, &mut g);
        let t = proc_p(&b, &mut g);
        prop_assert_eq!(s.erase(), a.clone());
        prop_assert_eq!(t.erase(), b.clone());
        prop_assert!(s.vars().is_disjoint(&t.vars()));
        prop_assert_eq!(s.vars().len(), expos(&s).len());
        prop_assert_eq!(g.count() as usize, s.vars().len() + t.vars().len());
        prop_assert!(expos(&s).iter().all(|e| e.len() == 1));
    }

    #[test]
    fn concrete_types_are_recovered(f in arb_formula()) {
        let mut g = VarGen::default();
        let t = proc_p(&f.erase(), &mut g);
        let rows = t.pin_rows(&f).unwrap();
        let x: Valuation = rows.iter().map(|(e, k)| (single_var(e), *k as u64)).collect();
        prop_assert_eq!(t.instantiate(&x).unwrap(), f.clone());
        let mut store = ConstraintStore::new();
        for (e, k) in rows {
            store.add(e, Kind::Pin(k));
        }
        let en = enumerate(&store, 4, 2);
        prop_assert_eq!(en.solutions.len(), 1);
        prop_assert_eq!(t.instantiate(&en.solutions[0]).unwrap(), f);
    }
}
