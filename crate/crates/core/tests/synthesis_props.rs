mod common;

use std::collections::{BTreeSet, HashMap};

use ealinfer::eal::Valuation;
use ealinfer::lambda::{OccId, Term};
use ealinfer::simple::{annotate, parse_simple_type, principal_type, SimpleType, TypedNode, TypedTree};
use ealinfer::solver::{check_solution, enumerate};
use ealinfer::synthesis::{infer, Options, Session};

fn samples(max: usize) -> Vec<Term> {
    let mut out: Vec<Term> = common::CORPUS.iter().map(|s| common::term(s)).collect();
    out.push(common::term(common::UNTYPABLE));
    for n in 1..=max {
        out.extend(common::closed_terms(n).into_iter().filter(|t| principal_type(t).is_ok()));
    }
    out
}

fn tree_types(t: &TypedTree, out: &mut HashMap<OccId, SimpleType>) {
    out.insert(t.path.clone(), t.ty.clone());
    match &t.node {
        TypedNode::Var { .. } => {}
        TypedNode::Abs { body, .. } => tree_types(body, out),
        TypedNode::App { fun, arg } => {
            tree_types(fun, out);
            tree_types(arg, out);
        }
    }
}

#[test]
fn synthesis_keeps_skeletons_and_paths() {
    let opts = Options { check_invariants: true, ..Options::default() };
    for t in samples(7) {
        let inf = infer(&t, None, opts).unwrap();
        assert!(inf.diagnostics.violations.is_empty(), "{t}: {:?}", inf.diagnostics.violations);
        assert_eq!(inf.ty.erase(), inf.sigma, "{t}");
        let mut want = HashMap::new();
        tree_types(&inf.tree, &mut want);
        assert_eq!(inf.node_types.len(), want.len());
        for (p, ty) in &inf.node_types {
            assert_eq!(&ty.erase(), &want[p], "{t} at {p}");
        }
        let fv = t.free_vars();
        assert_eq!(inf.base.iter().map(|(v, _)| v.clone()).collect::<BTreeSet<_>>(), fv);
        for (v, ty) in &inf.base {
            assert_eq!(ty.erase(), inf.tree.free_var_types()[v]);
        }
    }
}

/// Sets of proper application subterms that can be cut out of `t` as a
/// simultaneous substitution: pairwise disjoint, no variable captured.
fn decompositions(t: &Term) -> BTreeSet<BTreeSet<OccId>> {
    let binders = t.binders();
    let nodes = t.nodes();
    let spots: Vec<OccId> = nodes
        .iter()
        .filter(|(p, s)| s.is_app() && p.depth() > 0)
        .filter(|(p, _)| {
            nodes.iter().all(|(q, s)| match (s.is_var() && p.is_prefix_of(q), binders.get(q)) {
                (true, Some(Some(b))) => p.is_prefix_of(b),
                _ => true,
            })
        })
        .map(|(p, _)| p.clone())
        .collect();
    let mut out = BTreeSet::new();
    for mask in 1u32..(1 << spots.len()) {
        let chosen: Vec<&OccId> = (0..spots.len()).filter(|i| mask >> i & 1 == 1).map(|i| &spots[i]).collect();
        let disjoint = chosen.iter().all(|a| chosen.iter().all(|b| a == b || !a.is_prefix_of(b)));
        if disjoint {
            out.insert(chosen.into_iter().cloned().collect());
        }
    }
    out
}

#[test]
fn slices_match_decompositions_unless_partial() {
    let mut checked = 0;
    let mut partial = Vec::new();
    let mut terms: Vec<Term> = (1..=7).flat_map(common::closed_terms).collect();
    terms.extend(common::CORPUS.iter().map(|s| common::term(s)).filter(|t| t.size() <= 7));
    terms.extend(["(f (g x))", "((f x) (g y))", "\\x.((f x) (g y))", "\\x.(f (g (h y)))"].map(common::term));
    for t in terms {
        let Ok((_, tree)) = principal_type(&t) else { continue };
        let mut s = Session::new(Options::default());
        let r = s.synth(&tree);
        let slices: BTreeSet<BTreeSet<OccId>> = r.cpts.iter().map(|sl| sl.iter().map(|cp| cp.root.clone()).collect()).collect();
        let decs = decompositions(&t);
        assert!(decs.is_subset(&slices), "{t}");
        if s.diagnostics.partial_slices == 0 {
            assert_eq!(slices, decs, "{t}");
        } else {
            partial.push(t.to_string());
        }
        checked += 1;
    }
    assert!(checked > 100);
    assert_eq!(partial, ["\\x.((f x) (g y))"]);
}

#[test]
fn boxing_extends_solutions_by_zero() {
    let opts = Options { record_boxing: true, ..Options::default() };
    let mut events = 0;
    for t in samples(5) {
        let inf = infer(&t, None, opts).unwrap();
        for ev in &inf.boxing_events {
            for x in enumerate(&ev.store_before, 3, 3).solutions {
                let mut y: Valuation = x.clone();
                for v in &ev.fresh {
                    y.insert(*v, 0);
                }
                assert!(check_solution(&ev.store_after, &y), "{t}");
                assert_eq!(ev.gamma_after.instantiate(&y).unwrap(), ev.gamma_before.instantiate(&x).unwrap());
                assert_eq!(ev.base_after.len(), ev.base_before.len());
                for (a, b) in ev.base_after.iter().zip(&ev.base_before) {
                    assert_eq!(a.occ, b.occ);
                    assert_eq!(a.ty.instantiate(&y).unwrap(), b.ty.instantiate(&x).unwrap());
                }
                events += 1;
            }
        }
    }
    assert!(events > 50);
}

#[test]
fn the_principal_type_is_never_worse() {
    let instances = [("a", "o"), ("a", "o -> o"), ("a", "(o -> o) -> o"), ("b", "o")];
    for t in samples(6) {
        if !t.free_vars().is_empty() {
            continue;
        }
        let (principal, _) = principal_type(&t).unwrap();
        let at_principal = enumerate(&infer(&t, None, Options::default()).unwrap().store, 8, 1).outcome.is_sat();
        for (v, s) in instances {
            if !principal.vars().contains(v) {
                continue;
            }
            let m = [(v.to_string(), parse_simple_type(s).unwrap())].into();
            let sigma = principal.apply(&m);
            annotate(&t, &sigma).unwrap();
            let inf = infer(&t, Some(&sigma), Options::default()).unwrap();
            if enumerate(&inf.store, 8, 1).outcome.is_sat() {
                assert!(at_principal, "{t} typable at {sigma} but not at {principal}");
            }
        }
    }
}

#[test]
fn untypable_trace_matches_the_golden_file() {
    let t = common::term(common::UNTYPABLE);
    let inf = infer(&t, None, Options { trace: true, ..Options::default() }).unwrap();
    let got = common::canonicalize(&(inf.trace.join("\n") + "\n"));
    let want = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/untypable_trace.txt")).unwrap();
    assert_eq!(got, want);
    for fact in [
        "P((a -> a) -> a) = p1(p2(!^{p3}a -o !^{p4}a) -o !^{p5}a)",
        "U(p7(!^{p8}a -o !^{p9}a), b1(!^{p12}a -o !^{p11}a)) = {C1: p7-b1 = 0, C2: p8-p12 = 0, C3: p9-p11 = 0}",
        "C9: b4+p1 >= 1",
    ] {
        assert!(got.contains(fact), "missing {fact}");
    }
    let outcome = enumerate(&inf.store, 8, 1).outcome;
    assert_eq!(outcome.label(), "unsat");
}
