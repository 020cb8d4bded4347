mod common;

use ealinfer::lambda::alpha_eq;
use ealinfer::neal::{erase_star, is_candidate, neal_check, verified_witness};
use ealinfer::solver::enumerate;
use ealinfer::synthesis::{infer, Options};

#[test]
fn every_solution_has_a_candidate_witness() {
    let mut witnesses = 0;
    for s in common::CORPUS {
        let t = common::term(s);
        let inf = infer(&t, None, Options::default()).unwrap();
        let en = enumerate(&inf.store, 8, 5);
        assert!(en.outcome.is_sat(), "{s}");
        for x in en.solutions {
            let w = verified_witness(&inf, &x, 8).unwrap_or_else(|e| panic!("{s} at {x:?}: {e}"));
            assert!(alpha_eq(&erase_star(&w.term).unwrap(), &t));
            assert!(is_candidate(&w.term).ok());
            let ty = inf.ty.instantiate(&x).unwrap();
            let basis = inf.base.iter().map(|(v, b)| (v.clone(), b.instantiate(&x).unwrap())).collect();
            neal_check(&basis, &w.term, &ty).unwrap();
            witnesses += 1;
        }
    }
    assert!(witnesses >= 40);
}
