use std::collections::BTreeSet;

use ealinfer::lambda::parse_term;
use ealinfer::neal::{reduce_step, skolemize, Basis, NealTerm, Rule};
use ealinfer::pipeline::{run, Request};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const POOL: &[&str] = &[
    "\\x.x",
    super::TWO,
    "\\f.\\x.(f (f (f x)))",
    "\\f.\\x.(f x)",
    "\\f.\\x.x",
    "\\x.\\y.x",
    "\\f.\\g.\\x.(f (g x))",
    "\\n.\\f.\\x.(f ((n f) x))",
    "\\x.\\f.(f x)",
];

pub fn redexes(t: &NealTerm, rules: &[Rule]) -> Vec<(Rule, Vec<usize>)> {
    let mut out = Vec::new();
    for (pos, s) in t.positions() {
        for r in rules {
            if r.matches(s) {
                out.push((*r, pos.clone()));
            }
        }
    }
    out
}

pub fn sk_basis(b: &Basis) -> Basis {
    b.iter().map(|(k, f)| (k.clone(), skolemize(f))).collect()
}

/// Typed terms obtained from witnesses of small applicative programs by
/// random reduction sequences.
pub fn generated(n: usize, seed: u64) -> Vec<NealTerm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < n {
        attempts += 1;
        assert!(attempts < 5000, "generator starved at {}", out.len());
        let mut pick = || super::term(POOL.choose(&mut rng).unwrap()).to_string();
        let (a, b, c) = (pick(), pick(), pick());
        let src = match attempts % 4 {
            0 => format!("({a} {b})"),
            1 => format!("(({a} {b}) {c})"),
            2 => format!("({a} ({b} {c}))"),
            _ => format!("\\z.({a} ({b} z))"),
        };
        let t = parse_term(&src).unwrap();
        let Ok(r) = run(&t, &Request { solutions: 3, ..Request::default() }) else { continue };
        for sol in r.solutions {
            let Ok(w) = sol.witness else { continue };
            let mut cur = w.term;
            for _ in 0..10 {
                if seen.insert(cur.to_string()) {
                    out.push(cur.clone());
                }
                let all: Vec<NealTerm> =
                    redexes(&cur, &Rule::ALL).into_iter().filter_map(|(r, p)| reduce_step(&cur, r, &p).ok()).collect();
                let Some(next) = all.choose(&mut rng).cloned() else { break };
                cur = next;
            }
        }
        let _ = rng.gen::<u8>();
    }
    out
}

pub fn normal_form_shape(t: &NealTerm) -> Result<(), String> {
    let mut bad = None;
    t.walk(&mut |s| match s {
        NealTerm::Contract(_, n, _, _) if !matches!(**n, NealTerm::Var(_) | NealTerm::App(..)) => {
            bad = Some(format!("contraction shares {n}"))
        }
        NealTerm::Promote(_, subs) => {
            for (a, _) in subs {
                if !matches!(a, NealTerm::Var(_) | NealTerm::App(..)) {
                    bad = Some(format!("box argument {a}"));
                }
            }
        }
        _ => {}
    });
    bad.map_or(Ok(()), Err)
}

