mod common;

use ealinfer::eal::{BoxVar, LinExpr, Tag, Valuation};
use ealinfer::solver::{
    check_solution, eliminate_equalities, enumerate, verify_certificate, ConstraintStore, Kind, SolveOutcome,
};
use ealinfer::synthesis::{infer, Options};
use proptest::prelude::*;

fn var(i: u32) -> BoxVar {
    BoxVar { idx: i + 1, tag: if i.is_multiple_of(2) { Tag::P } else { Tag::B } }
}

fn arb_store() -> impl Strategy<Value = (usize, ConstraintStore)> {
    (2usize..5).prop_flat_map(|n| {
        let row = (prop::collection::vec(-1i64..=1, n), 0u8..5);
        (Just(n), prop::collection::vec(row, 1..6)).prop_map(|(n, rows)| {
            let mut s = ConstraintStore::new();
            for (cs, k) in rows {
                let mut e = LinExpr::zero();
                for (i, c) in cs.iter().enumerate() {
                    e.add_term(var(i as u32), *c);
                }
                if e.is_zero() {
                    continue;
                }
                let kind = match k {
                    0 | 1 => Kind::Eq0,
                    2 | 3 => Kind::Ge1,
                    _ => Kind::Pin(1),
                };
                s.add(e, kind);
            }
            (n, s)
        })
    })
}

fn full(x: &Valuation, vars: &[BoxVar]) -> Vec<u64> {
    vars.iter().map(|v| x.get(v).copied().unwrap_or(0)).collect()
}

/// Every solution with each variable at most `bound`, in sum then
/// lexicographic order.
fn brute(store: &ConstraintStore, bound: u64) -> Vec<Vec<u64>> {
    let vars: Vec<BoxVar> = store.vars().into_iter().collect();
    let n = vars.len();
    let mut out = Vec::new();
    let mut cur = vec![0u64; n];
    loop {
        let x: Valuation = vars.iter().copied().zip(cur.iter().copied()).collect();
        if check_solution(store, &x) {
            out.push(cur.clone());
        }
        let mut i = 0;
        while i < n && cur[i] == bound {
            cur[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
        cur[i] += 1;
    }
    out.sort_by_key(|v| (v.iter().sum::<u64>(), v.clone()));
    out
}

proptest! {
    #[test]
    fn sat_answers_satisfy_the_store((_n, store) in arb_store()) {
        let en = enumerate(&store, 4, 3);
        if let SolveOutcome::Sat(x) = &en.outcome {
            prop_assert!(check_solution(&store, x));
            for y in &en.solutions {
                prop_assert!(check_solution(&store, y));
            }
        }
    }

    #[test]
    fn unsat_certificates_verify_and_persist((_n, store) in arb_store()) {
        if let SolveOutcome::Unsat(c) = enumerate(&store, 3, 1).outcome {
            prop_assert!(verify_certificate(&store, &c));
            prop_assert!(brute(&store, 5).is_empty());
            prop_assert!(matches!(enumerate(&store, 12, 1).outcome, SolveOutcome::Unsat(_)));
        }
    }

    #[test]
    fn elimination_keeps_every_solution((_n, store) in arb_store()) {
        let e = eliminate_equalities(&store);
        let vars: Vec<BoxVar> = store.vars().into_iter().collect();
        let sols = brute(&store, 3);
        if e.contradiction.is_some() {
            prop_assert!(sols.is_empty());
        }
        for s in sols {
            let x: Valuation = vars.iter().copied().zip(s).collect();
            for v in &e.zeroed {
                prop_assert_eq!(x.get(v).copied().unwrap_or(0), 0);
            }
            for (v, expr, k) in &e.substitution {
                prop_assert_eq!(x[v] as i64, expr.eval(&x) + k);
            }
            let free: Valuation = e.free_vars(&store).into_iter().map(|v| (v, x[&v])).collect();
            let ext = e.extend(&free);
            for v in &vars {
                prop_assert_eq!(ext.get(v).copied().unwrap_or(0), x[v] as i64);
            }
        }
    }

    #[test]
    fn enumeration_order_matches_brute_force((_n, store) in arb_store()) {
        let vars: Vec<BoxVar> = store.vars().into_iter().collect();
        let bound = 3;
        let all = brute(&store, bound);
        let en = enumerate(&store, bound, 4);
        match &en.outcome {
            SolveOutcome::Sat(_) => {
                // the bound caps free variables only, so enumeration may
                // reach past the brute-force box but never skip inside it
                let got: Vec<Vec<u64>> = en.solutions.iter().map(|x| full(x, &vars)).collect();
                let key = |v: &Vec<u64>| (v.iter().sum::<u64>(), v.clone());
                for w in got.windows(2) {
                    prop_assert!(key(&w[0]) < key(&w[1]));
                }
                let last = key(got.last().unwrap());
                for s in &all {
                    if got.len() < 4 || key(s) <= last {
                        prop_assert!(got.contains(s), "{:?} skipped, got {:?}", s, got);
                    }
                }
            }
            _ => prop_assert!(all.is_empty()),
        }
    }
}

#[test]
fn corpus_stores_are_decided_at_the_default_bound() {
    let mut terms: Vec<_> = common::CORPUS.iter().map(|s| common::term(s)).collect();
    terms.push(common::term(common::UNTYPABLE));
    for n in 1..=6 {
        terms.extend(common::closed_terms(n));
    }
    for t in terms {
        let Ok(inf) = infer(&t, None, Options::default()) else { continue };
        let out = enumerate(&inf.store, 8, 1).outcome;
        assert!(!matches!(out, SolveOutcome::Unknown(_)), "{t}");
    }
}
