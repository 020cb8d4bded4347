//! Brute-force enumeration of box and contraction decorations on small
//! terms, typed directly in the affine calculus.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::eal::Formula;
use crate::lambda::{fresh_name, OccId, Step, Term};
use crate::neal::{is_candidate, neal_infer, Basis, NealTerm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecorationBudget {
    pub max_boxes_per_edge: usize,
    pub max_total_boxes: usize,
}

impl DecorationBudget {
    pub fn uniform(n: usize) -> Self {
        DecorationBudget { max_boxes_per_edge: n, max_total_boxes: n }
    }
}

pub const NODE_LIMIT: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("more than {0} decorations")]
    BudgetExceeded(usize),
}

/// A typing judgment with metavariables numbered in order of appearance.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Judgment {
    pub basis: Vec<(String, Formula)>,
    pub ty: Formula,
}

impl Judgment {
    pub fn new(basis: &Basis, ty: &Formula) -> Judgment {
        let mut all = ty.clone();
        for f in basis.values().rev() {
            all = Formula::lolli(f.clone(), all);
        }
        let mut all = all.canonical();
        let mut out = Vec::new();
        for k in basis.keys() {
            let Formula::Lolli(a, b) = all else { unreachable!() };
            out.push((k.clone(), *a));
            all = *b;
        }
        Judgment { basis: out, ty: all }
    }
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b: Vec<String> = self.basis.iter().map(|(x, t)| format!("{x} : {t}")).collect();
        if b.is_empty() {
            write!(f, "|- {}", self.ty)
        } else {
            write!(f, "{} |- {}", b.join(", "), self.ty)
        }
    }
}

struct Gen {
    budget: DecorationBudget,
    names: HashMap<OccId, String>,
    occs: HashMap<OccId, Vec<String>>,
    used: BTreeSet<String>,
    produced: usize,
}

impl Gen {
    fn fresh(&mut self, base: &str) -> String {
        let n = fresh_name(base, &self.used);
        self.used.insert(n.clone());
        n
    }

    fn count(&mut self, n: usize) -> Result<(), OracleError> {
        self.produced += n;
        if self.produced > NODE_LIMIT {
            Err(OracleError::BudgetExceeded(NODE_LIMIT))
        } else {
            Ok(())
        }
    }

    fn chain(&mut self, m: NealTerm, shared: &str, names: &[String]) -> NealTerm {
        if names.len() == 2 {
            return NealTerm::contract(m, NealTerm::var(shared), &names[0], &names[1]);
        }
        let t = self.fresh(shared);
        let inner = self.chain(m, &t, &names[1..]);
        NealTerm::contract(inner, NealTerm::var(shared), &names[0], &t)
    }

    fn gen(&mut self, t: &Term, path: &OccId) -> Result<Vec<(NealTerm, usize)>, OracleError> {
        let bare: Vec<(NealTerm, usize)> = match t {
            Term::Var { .. } => return Ok(vec![(NealTerm::var(&self.names[path]), 0)]),
            Term::Abs { binder, body } => {
                let inner = self.gen(body, &path.child(Step::Body))?;
                let occs = self.occs.get(path).cloned().unwrap_or_default();
                let mut out = Vec::new();
                let x = self.fresh(binder);
                for (d, n) in inner {
                    let d = match occs.len() {
                        0 => d,
                        1 => crate::neal::rename_free(&d, &[(occs[0].clone(), x.clone())], &mut self.used),
                        _ => self.chain(d, &x, &occs),
                    };
                    out.push((NealTerm::abs(&x, d), n));
                }
                out
            }
            Term::App { fun, arg } => {
                let fs = self.gen(fun, &path.child(Step::Fun))?;
                let xs = self.gen(arg, &path.child(Step::Arg))?;
                let mut out = Vec::new();
                for (f, n) in &fs {
                    for (a, m) in &xs {
                        if n + m <= self.budget.max_total_boxes {
                            out.push((NealTerm::app(f.clone(), a.clone()), n + m));
                        }
                    }
                }
                out
            }
        };
        self.count(bare.len())?;
        let mut all = bare.clone();
        let mut layer = bare;
        for _ in 0..self.budget.max_boxes_per_edge {
            let mut next = Vec::new();
            for (d, n) in &layer {
                if *n < self.budget.max_total_boxes {
                    for w in self.wraps(d) {
                        next.push((w, n + 1));
                    }
                }
            }
            self.count(next.len())?;
            all.extend(next.iter().cloned());
            layer = next;
        }
        Ok(all)
    }

    /// Every way to put `d` in one box, choosing which applications stay
    /// outside as box arguments.
    fn wraps(&mut self, d: &NealTerm) -> Vec<NealTerm> {
        let fv = d.free_vars();
        let mut spots = Vec::new();
        collect_spots(d, &mut Vec::new(), &mut spots);
        spots.retain(|p| d.at(p).unwrap().free_vars().is_subset(&fv));
        let mut out = Vec::new();
        let n = spots.len();
        for mask in 0u32..(1 << n) {
            let chosen: Vec<&Vec<usize>> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| &spots[i]).collect();
            let nested = chosen.iter().any(|a| chosen.iter().any(|b| a != b && a.len() < b.len() && b.starts_with(a)));
            if nested {
                continue;
            }
            let mut body = d.clone();
            let mut subs = Vec::new();
            for p in &chosen {
                let h = self.fresh("h");
                let slot = slot_mut(&mut body, p);
                let arg = std::mem::replace(slot, NealTerm::var(&h));
                subs.push((arg, h));
            }
            let holes: BTreeSet<String> = subs.iter().map(|(_, h)| h.clone()).collect();
            for v in body.free_vars() {
                if !holes.contains(&v) {
                    let w = self.fresh(&v);
                    body = crate::neal::rename_free(&body, &[(v.clone(), w.clone())], &mut self.used);
                    subs.push((NealTerm::var(&v), w));
                }
            }
            if matches!(body, NealTerm::Var(_)) {
                continue;
            }
            out.push(NealTerm::promote(body, subs));
        }
        out
    }
}

fn collect_spots(t: &NealTerm, pos: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if !pos.is_empty() && matches!(t, NealTerm::App(..)) {
        out.push(pos.clone());
    }
    for (i, c) in t.children().into_iter().enumerate() {
        if matches!(t, NealTerm::Promote(..)) && i == 0 {
            continue;
        }
        pos.push(i);
        collect_spots(c, pos, out);
        pos.pop();
    }
}

fn slot_mut<'a>(t: &'a mut NealTerm, pos: &[usize]) -> &'a mut NealTerm {
    let mut s = t;
    for &i in pos {
        s = s.child_mut(i).unwrap();
    }
    s
}

/// All decorated terms erasing to `t` within the budget, in generation
/// order. Contractions sit directly under their binder, or at the top
/// for free variables.
pub fn decorations(t: &Term, budget: DecorationBudget) -> Result<Vec<NealTerm>, OracleError> {
    let t = t.clone().renumber();
    let binders = t.binders();
    let mut used = t.all_names();
    let mut names = HashMap::new();
    let mut occs: HashMap<OccId, Vec<String>> = HashMap::new();
    let mut free: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (p, s) in t.nodes() {
        if let Term::Var { name, .. } = s {
            let n = fresh_name(&format!("{name}_"), &used);
            used.insert(n.clone());
            names.insert(p.clone(), n.clone());
            match binders.get(&p).cloned().flatten() {
                Some(b) => occs.entry(b).or_default().push(n),
                None => free.entry(name.clone()).or_default().push(n),
            }
        }
    }
    let mut g = Gen { budget, names, occs, used, produced: 0 };
    let mut out = Vec::new();
    for (d, _) in g.gen(&t, &OccId::root())? {
        let mut p = d;
        for (x, ns) in &free {
            p = match ns.len() {
                1 => crate::neal::rename_free(&p, &[(ns[0].clone(), x.clone())], &mut g.used),
                _ => g.chain(p, x, ns),
            };
        }
        out.push(p);
    }
    Ok(out)
}

/// Distinct most general judgments of the well-typed candidate
/// decorations of `t`.
pub fn enumerate_judgments(t: &Term, budget: DecorationBudget) -> Result<BTreeSet<Judgment>, OracleError> {
    let mut out = BTreeSet::new();
    for p in decorations(t, budget)? {
        if let Ok((basis, ty)) = neal_infer(&Basis::new(), &p) {
            if is_candidate(&p).ok() {
                out.insert(Judgment::new(&basis, &ty));
            }
        }
    }
    Ok(out)
}

/// Boxes in a decorated term: total count and the longest run of
/// directly nested boxes.
pub fn box_usage(p: &NealTerm) -> (usize, usize) {
    fn run(p: &NealTerm) -> usize {
        match p {
            NealTerm::Promote(m, _) => 1 + run(m),
            _ => 0,
        }
    }
    let mut per_edge = 0;
    p.walk(&mut |s| per_edge = per_edge.max(run(s)));
    (p.promote_count(), per_edge)
}

pub fn within(p: &NealTerm, budget: DecorationBudget) -> bool {
    let (total, edge) = box_usage(p);
    total <= budget.max_total_boxes && edge <= budget.max_boxes_per_edge
}
