mod common;

use ealinfer::neal::{neal_infer, Basis};
use ealinfer::oracle::{enumerate_judgments, within, DecorationBudget, Judgment};
use ealinfer::pipeline::{ground, pinned_outcome, run, Request};
use ealinfer::simple::principal_type;
use ealinfer::synthesis::{infer, Options};

#[test]
fn oracle_and_pipeline_agree_on_small_terms() {
    let budget = DecorationBudget::uniform(2);
    let mut judgments = 0;
    for n in 1..=6 {
        for t in common::closed_terms(n) {
            if principal_type(&t).is_err() {
                continue;
            }
            let js = enumerate_judgments(&t, budget).unwrap();
            let inf = infer(&t, None, Options::default()).unwrap();
            for j in &js {
                let (basis, ty) = ground(&inf, j).unwrap_or_else(|| panic!("{t}: {j} does not match the simple type"));
                let out = pinned_outcome(&inf, &ty, Some(&basis), 8).unwrap();
                assert!(out.is_sat(), "{t}: oracle judgment {j} rejected by the pipeline");
                judgments += 1;
            }
            let r = run(&t, &Request { solutions: 8, ..Request::default() }).unwrap();
            for sol in &r.solutions {
                let w = sol.witness.as_ref().unwrap();
                if !within(&w.term, budget) {
                    continue;
                }
                let (b, ty) = neal_infer(&Basis::new(), &w.term).unwrap();
                let j = Judgment::new(&b, &ty);
                assert!(js.contains(&j), "{t}: witness {} with {j} missing from the oracle", w.term);
            }
            if js.is_empty() {
                assert!(!r.outcome.is_sat() || r.solutions.iter().all(|s| !within(&s.witness.as_ref().unwrap().term, budget)));
            }
        }
    }
    assert!(judgments > 300);
}
