use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::{erase_star, rename_free, subst, term_length, NealError, NealTerm};
use crate::lambda::fresh_name;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Beta,
    Dup,
    BangBang,
    AppC,
    BangC,
    CC,
    LamC,
}

impl Rule {
    pub const ALL: [Rule; 7] = [Rule::Beta, Rule::Dup, Rule::BangBang, Rule::AppC, Rule::BangC, Rule::CC, Rule::LamC];
    pub const NON_BETA: [Rule; 6] = [Rule::Dup, Rule::BangBang, Rule::AppC, Rule::BangC, Rule::CC, Rule::LamC];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Beta => "beta",
            Rule::Dup => "dup",
            Rule::BangBang => "!-!",
            Rule::AppC => "@-c",
            Rule::BangC => "!-c",
            Rule::CC => "c-c",
            Rule::LamC => "lambda-c",
        }
    }

    pub fn matches(self, t: &NealTerm) -> bool {
        match (self, t) {
            (Rule::Beta, NealTerm::App(m, _)) => matches!(**m, NealTerm::Abs(..)),
            (Rule::Dup, NealTerm::Contract(_, n, _, _)) => matches!(**n, NealTerm::Promote(..)),
            (Rule::BangBang, NealTerm::Promote(_, subs)) => subs.iter().any(|(a, _)| matches!(a, NealTerm::Promote(..))),
            (Rule::AppC, NealTerm::App(m, n)) => {
                matches!(**m, NealTerm::Contract(..)) || matches!(**n, NealTerm::Contract(..))
            }
            (Rule::BangC, NealTerm::Promote(_, subs)) => subs.iter().any(|(a, _)| matches!(a, NealTerm::Contract(..))),
            (Rule::CC, NealTerm::Contract(_, n, _, _)) => matches!(**n, NealTerm::Contract(..)),
            (Rule::LamC, NealTerm::Abs(x, m)) => match &**m {
                NealTerm::Contract(_, n, _, _) => !n.free_vars().contains(x),
                _ => false,
            },
            _ => false,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "beta" | "β" => Rule::Beta,
            "dup" => Rule::Dup,
            "!-!" | "bang-bang" => Rule::BangBang,
            "@-c" | "app-c" => Rule::AppC,
            "!-c" | "bang-c" => Rule::BangC,
            "c-c" => Rule::CC,
            "lambda-c" | "λ-c" | "lam-c" => Rule::LamC,
            _ => return Err(format!("unknown rule {s}")),
        })
    }
}

fn fresh(base: &str, used: &mut BTreeSet<String>) -> String {
    let n = fresh_name(base, used);
    used.insert(n.clone());
    n
}

fn var(x: &str) -> NealTerm {
    NealTerm::Var(x.to_string())
}

/// Rewrites a redex at the root; `None` if the rule does not match.
fn rewrite(rule: Rule, t: &NealTerm, used: &mut BTreeSet<String>) -> Option<NealTerm> {
    if !rule.matches(t) {
        return None;
    }
    Some(match (rule, t) {
        (Rule::Beta, NealTerm::App(m, n)) => {
            let NealTerm::Abs(x, body) = &**m else { unreachable!() };
            subst(body, x, n, used)
        }
        (Rule::Dup, NealTerm::Contract(n, p, x, y)) => {
            let NealTerm::Promote(m, subs) = &**p else { unreachable!() };
            let xs: Vec<String> = subs.iter().map(|(_, b)| fresh(b, used)).collect();
            let ys: Vec<String> = subs.iter().map(|(_, b)| fresh(b, used)).collect();
            let inner: Vec<String> = subs.iter().map(|(_, b)| fresh(b, used)).collect();
            let ren: Vec<(String, String)> = subs.iter().map(|(_, b)| b.clone()).zip(inner.iter().cloned()).collect();
            let m2 = rename_free(m, &ren, used);
            let left = NealTerm::promote((**m).clone(), xs.iter().zip(subs).map(|(a, (_, b))| (var(a), b.clone())).collect());
            let right = NealTerm::promote(m2, ys.iter().zip(&inner).map(|(a, b)| (var(a), b.clone())).collect());
            let core = subst(n, x, &left, used);
            let mut r = subst(&core, y, &right, used);
            for i in (0..subs.len()).rev() {
                r = NealTerm::Contract(Box::new(r), Box::new(subs[i].0.clone()), xs[i].clone(), ys[i].clone());
            }
            r
        }
        (Rule::BangBang, NealTerm::Promote(m, subs)) => {
            let i = subs.iter().position(|(a, _)| matches!(a, NealTerm::Promote(..))).unwrap();
            let NealTerm::Promote(n, inner) = &subs[i].0 else { unreachable!() };
            let xi = &subs[i].1;
            let others: BTreeSet<String> =
                subs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, (_, b))| b.clone()).collect();
            let mut n2 = (**n).clone();
            let mut spliced = Vec::new();
            for (p, yj) in inner {
                if others.contains(yj) || spliced.iter().any(|(_, z): &(NealTerm, String)| z == yj) {
                    let z = fresh(yj, used);
                    n2 = rename_free(&n2, &[(yj.clone(), z.clone())], used);
                    spliced.push((p.clone(), z));
                } else {
                    spliced.push((p.clone(), yj.clone()));
                }
            }
            let body = subst(m, xi, &n2, used);
            let mut new_subs: Vec<(NealTerm, String)> = subs[..i].to_vec();
            new_subs.extend(spliced);
            new_subs.extend(subs[i + 1..].iter().cloned());
            NealTerm::promote(body, new_subs)
        }
        (Rule::AppC, NealTerm::App(m, n)) => {
            if let NealTerm::Contract(body, shared, x1, x2) = &**m {
                let (a, b) = (fresh(x1, used), fresh(x2, used));
                let body = rename_free(body, &[(x1.clone(), a.clone()), (x2.clone(), b.clone())], used);
                NealTerm::Contract(Box::new(NealTerm::app(body, (**n).clone())), shared.clone(), a, b)
            } else {
                let NealTerm::Contract(body, shared, x1, x2) = &**n else { unreachable!() };
                let (a, b) = (fresh(x1, used), fresh(x2, used));
                let body = rename_free(body, &[(x1.clone(), a.clone()), (x2.clone(), b.clone())], used);
                NealTerm::Contract(Box::new(NealTerm::app((**m).clone(), body)), shared.clone(), a, b)
            }
        }
        (Rule::BangC, NealTerm::Promote(m, subs)) => {
            let i = subs.iter().position(|(a, _)| matches!(a, NealTerm::Contract(..))).unwrap();
            let NealTerm::Contract(mi, n, y, z) = &subs[i].0 else { unreachable!() };
            let (a, b) = (fresh(y, used), fresh(z, used));
            let mi = rename_free(mi, &[(y.clone(), a.clone()), (z.clone(), b.clone())], used);
            let mut new_subs = subs.clone();
            new_subs[i].0 = mi;
            NealTerm::Contract(Box::new(NealTerm::Promote(m.clone(), new_subs)), n.clone(), a, b)
        }
        (Rule::CC, NealTerm::Contract(m, inner, x1, x2)) => {
            let NealTerm::Contract(n, p, y1, y2) = &**inner else { unreachable!() };
            let (a, b) = (fresh(y1, used), fresh(y2, used));
            let n = rename_free(n, &[(y1.clone(), a.clone()), (y2.clone(), b.clone())], used);
            let outer = NealTerm::Contract(m.clone(), Box::new(n), x1.clone(), x2.clone());
            NealTerm::Contract(Box::new(outer), p.clone(), a, b)
        }
        (Rule::LamC, NealTerm::Abs(x, c)) => {
            let NealTerm::Contract(m, n, y, z) = &**c else { unreachable!() };
            let (mut m, mut y, mut z) = ((**m).clone(), y.clone(), z.clone());
            if &y == x {
                let w = fresh(&y, used);
                m = rename_free(&m, &[(y.clone(), w.clone())], used);
                y = w;
            }
            if &z == x {
                let w = fresh(&z, used);
                m = rename_free(&m, &[(z.clone(), w.clone())], used);
                z = w;
            }
            NealTerm::Contract(Box::new(NealTerm::abs(x, m)), n.clone(), y, z)
        }
        _ => unreachable!(),
    })
}

/// Leftmost-outermost position of a redex for `rule`.
pub fn find_redex(t: &NealTerm, rule: Rule) -> Option<Vec<usize>> {
    t.positions().into_iter().find(|(_, s)| rule.matches(s)).map(|(p, _)| p)
}

/// One rewrite at `pos`. A beta step that discards an argument inside a
/// box leaves an unused box binder; that result is reported as not legal.
pub fn reduce_step(t: &NealTerm, rule: Rule, pos: &[usize]) -> Result<NealTerm, NealError> {
    let mut used = t.all_names();
    let mut out = t.clone();
    let mut slot = &mut out;
    for &i in pos {
        slot = slot.child_mut(i).ok_or(NealError::NoRedex)?;
    }
    *slot = rewrite(rule, slot, &mut used).ok_or(NealError::NoRedex)?;
    if rule == Rule::Beta {
        super::check_legal(&out)?;
    }
    Ok(out)
}

const STEP_LIMIT: usize = 100_000;

/// Applies non-beta rules leftmost-outermost until none applies.
pub fn normalize_nonbeta(t: &NealTerm) -> Result<NealTerm, NealError> {
    let mut cur = t.clone();
    for _ in 0..STEP_LIMIT {
        let hit = cur
            .positions()
            .into_iter()
            .find_map(|(p, s)| Rule::NON_BETA.iter().find(|r| r.matches(s)).map(|r| (p, *r)));
        match hit {
            None => return Ok(cur),
            Some((p, r)) => cur = reduce_step(&cur, r, &p)?,
        }
    }
    Err(NealError::InternalInvariantViolation(format!("no normal form within {STEP_LIMIT} steps")))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CandidateReport {
    pub failures: Vec<String>,
}

impl CandidateReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks the candidate conditions and lists every violation.
pub fn is_candidate(t: &NealTerm) -> CandidateReport {
    let mut failures = Vec::new();
    for (p, s) in t.positions() {
        for r in Rule::NON_BETA {
            if r.matches(s) {
                failures.push(format!("{r} redex at {p:?}"));
            }
        }
        match s {
            NealTerm::Contract(m, n, x, y) => {
                if !matches!(**n, NealTerm::Var(_)) {
                    match erase_star(n) {
                        Ok(e) if e.is_var() => {}
                        _ => failures.push(format!("contraction of non-variable {n}")),
                    }
                }
                let fv = m.free_vars();
                if !fv.contains(x) || !fv.contains(y) {
                    failures.push(format!("contracted names {x},{y} not both free in {m}"));
                }
            }
            NealTerm::Promote(m, _) if matches!(**m, NealTerm::Var(_)) => {
                failures.push(format!("box around a variable at {p:?}"));
            }
            _ => {}
        }
    }
    match erase_star(t) {
        Ok(e) => {
            if t.length() != term_length(&e) {
                failures.push(format!("length {} differs from erased length {}", t.length(), term_length(&e)));
            }
        }
        Err(e) => failures.push(e.to_string()),
    }
    CandidateReport { failures }
}

#[cfg(test)]
mod tests {
    use super::super::{neal_typecheck, parse_neal, Basis};
    use super::*;
    use crate::lambda::alpha_eq;

    #[test]
    fn dup_without_arguments() {
        let p = parse_neal("(x y)[!(\\w.w)[]/x,y]").unwrap();
        let pos = find_redex(&p, Rule::Dup).unwrap();
        let q = reduce_step(&p, Rule::Dup, &pos).unwrap();
        assert_eq!(q.to_string(), "(!(\\w.w)[] !(\\w.w)[])");
    }

    #[test]
    fn dup_keeps_type_and_erasure() {
        let p = parse_neal("\\f.!(\\y.(c (d y)))[a/c, b/d][!((g h))[f/g, k/h]/a,b]").unwrap();
        let q = reduce_step(&p, Rule::Dup, &find_redex(&p, Rule::Dup).unwrap()).unwrap();
        assert!(alpha_eq(&erase_star(&p).unwrap(), &erase_star(&q).unwrap()));
        let (t1, t2) = (neal_typecheck(&Basis::new(), &p).unwrap(), neal_typecheck(&Basis::new(), &q).unwrap());
        assert_eq!(t1.canonical(), t2.canonical());
    }

    #[test]
    fn commutations_reach_candidate() {
        let p = parse_neal("(!((a b))[u/a, v/b][w/u,v] z)").unwrap();
        let q = normalize_nonbeta(&p).unwrap();
        assert!(find_redex(&q, Rule::AppC).is_none());
        assert!(is_candidate(&q).ok(), "{:?}", is_candidate(&q));
    }

    #[test]
    fn boxed_variable_is_not_candidate() {
        let p = parse_neal("!(x)[y/x]").unwrap();
        assert!(!is_candidate(&p).ok());
    }
}
