mod common;

use common::gen::{generated, normal_form_shape, redexes, sk_basis};

use std::collections::BTreeMap;

use ealinfer::eal::Formula;
use ealinfer::lambda::{alpha_eq, parse_term};
use ealinfer::neal::{
    build_witness, check_legal, erase_star, is_candidate, neal_check, neal_infer, neal_typecheck, normalize_nonbeta,
    parse_neal, reduce_step, skolemize, subst, verified_witness, Basis, NealError, NealTerm, Rule, Unifier,
};
use ealinfer::solver::enumerate;
use ealinfer::synthesis::{infer, Options};

#[test]
fn reductions_preserve_erasure_and_type() {
    let terms = generated(250, 11);
    let mut steps = 0;
    let mut with_redex = 0;
    for t in &terms {
        let (basis, ty) = neal_infer(&Basis::new(), t).unwrap();
        let (basis, ty) = (sk_basis(&basis), skolemize(&ty));
        let erased = erase_star(t).unwrap();
        let nb = redexes(t, &Rule::NON_BETA);
        if !nb.is_empty() {
            with_redex += 1;
        }
        for (rule, pos) in nb {
            let r = reduce_step(t, rule, &pos).unwrap_or_else(|e| panic!("{} at {pos:?} of {t}: {e}", rule.name()));
            check_legal(&r).unwrap();
            assert!(alpha_eq(&erase_star(&r).unwrap(), &erased), "{} changed the erasure of {t}", rule.name());
            neal_check(&basis, &r, &ty).unwrap_or_else(|e| panic!("{} on {t} gives {r}: {e}", rule.name()));
            steps += 1;
        }
        for (_, pos) in redexes(t, &[Rule::Beta]) {
            let Ok(r) = reduce_step(t, Rule::Beta, &pos) else { continue };
            neal_check(&basis, &r, &ty).unwrap_or_else(|e| panic!("beta on {t} gives {r}: {e}"));
        }
        let n = normalize_nonbeta(t).unwrap();
        assert!(redexes(&n, &Rule::NON_BETA).is_empty(), "{n}");
        normal_form_shape(&n).unwrap_or_else(|e| panic!("{n}: {e}"));
        assert!(alpha_eq(&erase_star(&n).unwrap(), &erased));
        neal_check(&basis, &n, &ty).unwrap();
    }
    assert!(terms.len() >= 200);
    assert!(with_redex >= 50, "only {with_redex} terms with non-beta redexes");
    assert!(steps >= 100);
}

fn shift(f: &Formula, by: u32) -> Formula {
    let s: BTreeMap<u32, Formula> = f.metas().into_iter().map(|m| (m, Formula::Meta(m + by))).collect();
    f.subst_metas(&s)
}

fn max_meta(fs: &[&Formula]) -> u32 {
    fs.iter().flat_map(|f| f.metas()).max().map_or(0, |m| m + 1)
}

/// Positions where a subterm can be cut out and named: application
/// arguments and box arguments whose variables are all free in the term.
fn cut_points(t: &NealTerm) -> Vec<Vec<usize>> {
    let fv = t.free_vars();
    let mut out = Vec::new();
    for (pos, s) in t.positions() {
        let kids: Vec<usize> = match s {
            NealTerm::App(..) => vec![1],
            NealTerm::Promote(_, subs) => (1..=subs.len()).collect(),
            _ => vec![],
        };
        for i in kids {
            let mut p = pos.clone();
            p.push(i);
            if t.at(&p).unwrap().free_vars().is_subset(&fv) {
                out.push(p);
            }
        }
    }
    out
}

fn replace(t: &NealTerm, pos: &[usize], with: NealTerm) -> NealTerm {
    let mut t = t.clone();
    let mut s = &mut t;
    for &i in pos {
        s = s.child_mut(i).unwrap();
    }
    *s = with;
    t
}

#[test]
fn substitution_preserves_typing() {
    let mut checked = 0;
    for t in generated(400, 5) {
        for pos in cut_points(&t) {
            let n = t.at(&pos).unwrap().clone();
            let m = replace(&t, &pos, NealTerm::var("zz"));
            let Ok((gm, tm)) = neal_infer(&Basis::new(), &m) else { continue };
            let (gn, tn) = neal_infer(&Basis::new(), &n).unwrap();
            let mut all: Vec<&Formula> = gm.values().collect();
            all.push(&tm);
            let off = max_meta(&all);
            let tn = shift(&tn, off);
            let gn: Basis = gn.into_iter().map(|(k, f)| (k, shift(&f, off))).collect();
            let mut u = Unifier::default();
            for f in gm.values().chain(gn.values()).chain([&tm, &tn]) {
                u.reserve(f);
            }
            u.unify(&gm["zz"], &tn).unwrap_or_else(|e| panic!("{t}: {e}"));
            let mut basis: Basis = gm.iter().filter(|(k, _)| *k != "zz").map(|(k, f)| (k.clone(), skolemize(&u.resolve(f)))).collect();
            for (k, f) in &gn {
                assert!(!basis.contains_key(k));
                basis.insert(k.clone(), skolemize(&u.resolve(f)));
            }
            let mut used = t.all_names();
            used.insert("zz".into());
            let r = subst(&m, "zz", &n, &mut used);
            neal_check(&basis, &r, &skolemize(&u.resolve(&tm))).unwrap_or_else(|e| panic!("{m} with {n}: {e}"));
            checked += 1;
        }
    }
    assert!(checked > 200, "{checked}");
}

fn neal(s: &str) -> NealTerm {
    parse_neal(s).unwrap()
}

#[test]
fn erasure_examples() {
    assert!(alpha_eq(&erase_star(&neal("!(x)[(f y)/x]")).unwrap(), &parse_term("(f y)").unwrap()));
    assert_eq!(erase_star(&neal("x")).unwrap().to_string(), "x");
    assert!(alpha_eq(&erase_star(&neal("(a b)[y/a,b]")).unwrap(), &parse_term("(y y)").unwrap()));
}

#[test]
fn typing_examples() {
    let id = neal_typecheck(&Basis::new(), &neal("\\x.x")).unwrap();
    assert_eq!(id.canonical().to_string(), "A -o A");
    let two = neal("\\x.!(\\y.(a (b y)))[x1/a, x2/b][x/x1,x2]");
    assert_eq!(neal_typecheck(&Basis::new(), &two).unwrap().canonical().to_string(), "!(A -o A) -o !(A -o A)");
    assert!(matches!(neal_typecheck(&Basis::new(), &neal("(x x)")), Err(NealError::NotLegal(_))));
    assert!(is_candidate(&two).ok());
}

#[test]
fn reduction_examples() {
    assert_eq!(reduce_step(&neal("(\\x.x y)"), Rule::Beta, &[]).unwrap().to_string(), "y");
    assert!(reduce_step(&neal("\\x.(a b)[x/a,b]"), Rule::LamC, &[]).is_err());
    let l = reduce_step(&neal("\\x.(x (a b))[y/a,b]"), Rule::LamC, &[]).unwrap();
    assert!(matches!(l, NealTerm::Contract(..)));
    assert!(alpha_eq(&erase_star(&l).unwrap(), &parse_term("\\x.(x (y y))").unwrap()));
    let d = reduce_step(&neal("(x y)[!(\\w.w)/x,y]"), Rule::Dup, &[]).unwrap();
    assert!(alpha_eq(&erase_star(&d).unwrap(), &parse_term("(\\w.w \\w.w)").unwrap()));
    let cc = neal("(a b)[(d e)[u/d,e]/a,b]");
    let r = reduce_step(&cc, Rule::CC, &[]).unwrap();
    let NealTerm::Contract(inner, shared, _, _) = &r else { panic!("{r}") };
    assert_eq!(**shared, NealTerm::var("u"));
    assert!(matches!(&**inner, NealTerm::Contract(_, n, _, _) if matches!(**n, NealTerm::App(..))));
    assert!(alpha_eq(&erase_star(&r).unwrap(), &erase_star(&cc).unwrap()));
    assert_eq!(normalize_nonbeta(&cc).unwrap(), r);
    let two = neal("\\x.!(\\y.(a (b y)))[x1/a, x2/b][x/x1,x2]");
    assert_eq!(normalize_nonbeta(&two).unwrap(), two);
}

#[test]
fn candidate_examples() {
    assert!(!is_candidate(&neal("(a b)[(f g)/a,b]")).ok());
    assert!(!is_candidate(&neal("!(x)[(f y)/x]")).ok());
}

#[test]
fn witness_examples() {
    let t = common::term("\\x.x");
    let inf = infer(&t, None, Options::default()).unwrap();
    let x = inf.store.vars().into_iter().chain(inf.ty.vars()).map(|v| (v, u64::from(v.tag == ealinfer::eal::Tag::B))).collect();
    let w = build_witness(&inf, &x).unwrap();
    assert!(matches!(w, NealTerm::Promote(..)));
    assert_eq!(neal_typecheck(&Basis::new(), &w).unwrap().canonical().to_string(), "!(A -o A)");

    let two = common::term(common::TWO);
    let inf = infer(&two, None, Options::default()).unwrap();
    let sols = enumerate(&inf.store, 8, 5).solutions;
    let found = sols.iter().any(|x| {
        let w = verified_witness(&inf, x, 8).unwrap();
        w.ty.to_string() == "!(a -o a) -o !(a -o a)"
            && matches!(&w.term, NealTerm::Abs(_, b) if matches!(**b, NealTerm::Contract(..)))
    });
    assert!(found);

    let sec = common::term(common::SHARED_ID);
    let oo = ealinfer::simple::parse_simple_type("o -> o").unwrap();
    let inf = infer(&sec, Some(&oo), Options::default()).unwrap();
    for x in enumerate(&inf.store, 8, 20).solutions {
        let w = verified_witness(&inf, &x, 8).unwrap();
        assert_eq!(w.ty, inf.ty.instantiate(&x).unwrap());
        neal_check(&Basis::new(), &w.term, &w.ty).unwrap();
    }
}
