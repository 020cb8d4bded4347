use std::collections::{BTreeSet, HashMap};

use super::{erase_star, is_candidate, neal_check, Basis, NealError, NealTerm};
use crate::eal::{Formula, Valuation};
use crate::lambda::{alpha_eq, OccId, Step, Term};
use crate::solver::{enumerate, Kind};
use crate::synthesis::Inference;

/// Box depth of every node under a valuation.
pub fn levels(inf: &Inference, x: &Valuation) -> HashMap<OccId, u64> {
    inf.term
        .nodes()
        .into_iter()
        .map(|(p, _)| {
            let l = inf.boxes.iter().filter(|b| b.covers(&p)).map(|b| x.get(&b.var).copied().unwrap_or(0)).sum();
            (p, l)
        })
        .collect()
}

fn children(t: &Term, path: &OccId) -> Vec<(Term, OccId)> {
    match t {
        Term::Var { .. } => vec![],
        Term::Abs { body, .. } => vec![((**body).clone(), path.child(Step::Body))],
        Term::App { fun, arg } => {
            vec![((**fun).clone(), path.child(Step::Fun)), ((**arg).clone(), path.child(Step::Arg))]
        }
    }
}

enum Slot {
    Hole(Term),
    Pass,
}

struct Builder {
    level: HashMap<OccId, u64>,
    binders: HashMap<OccId, Option<OccId>>,
    occs: HashMap<OccId, Vec<OccId>>,
    taken: BTreeSet<String>,
}

fn bad(msg: String) -> NealError {
    NealError::InternalInvariantViolation(msg)
}

impl Builder {
    fn fresh(&mut self, base: &str) -> String {
        let stem = base.trim_end_matches(|c: char| c.is_ascii_digit() || c == '\'');
        let stem = if stem.is_empty() { "v" } else { stem };
        if !self.taken.contains(stem) {
            self.taken.insert(stem.to_string());
            return stem.to_string();
        }
        let mut i = 1;
        loop {
            let n = format!("{stem}{i}");
            if self.taken.insert(n.clone()) {
                return n;
            }
            i += 1;
        }
    }

    fn level(&self, p: &OccId) -> u64 {
        self.level[p]
    }

    fn chain(&mut self, m: NealTerm, shared: &str, names: &[String]) -> NealTerm {
        if names.len() == 2 {
            return NealTerm::contract(m, NealTerm::var(shared), &names[0], &names[1]);
        }
        let t = self.fresh(shared);
        let inner = self.chain(m, &t, &names[1..]);
        NealTerm::contract(inner, NealTerm::var(shared), &names[0], &t)
    }

    fn check_scope(&self, root: &OccId, hole: &Term, hp: &OccId) -> Result<(), NealError> {
        for (rel, s) in hole.nodes() {
            if let Term::Var { name, .. } = s {
                let mut p = hp.clone();
                p.0.extend(rel.0.iter().copied());
                if let Some(Some(b)) = self.binders.get(&p) {
                    if root.is_prefix_of(b) && !hp.is_prefix_of(b) {
                        return Err(bad(format!("{name} at {p} is bound inside the box at {root} but sits in the hole at {hp}")));
                    }
                }
            }
        }
        Ok(())
    }

    fn scan(
        &self,
        t: &Term,
        path: &OccId,
        root: &OccId,
        k: u64,
        names: &HashMap<OccId, String>,
        out: &mut Vec<(OccId, Slot)>,
    ) -> Result<(), NealError> {
        for (c, cp) in children(t, path) {
            if names.contains_key(&cp) {
                out.push((cp, Slot::Pass));
            } else if self.level(&cp) <= k {
                if !c.is_app() {
                    return Err(bad(format!("box at {root} leaves the non-application {c} at {cp}")));
                }
                self.check_scope(root, &c, &cp)?;
                out.push((cp, Slot::Hole(c)));
            } else if c.is_var() {
                match self.binders.get(&cp) {
                    Some(Some(b)) if root.is_prefix_of(b) => {}
                    _ => return Err(bad(format!("unnamed variable occurrence at {cp}"))),
                }
            } else {
                self.scan(&c, &cp, root, k, names, out)?;
            }
        }
        Ok(())
    }

    fn build(&mut self, t: &Term, path: &OccId, k: u64, names: &HashMap<OccId, String>) -> Result<NealTerm, NealError> {
        if let Some(n) = names.get(path) {
            return Ok(NealTerm::var(n));
        }
        let lv = self.level(path);
        if lv < k {
            return Err(bad(format!("node at {path} has depth {lv} inside depth {k}")));
        }
        if lv > k {
            if t.is_var() {
                return Err(bad(format!("box around the variable at {path}")));
            }
            let mut slots = Vec::new();
            self.scan(t, path, path, k, names, &mut slots)?;
            let mut inner = names.clone();
            let mut subs = Vec::new();
            for (cp, slot) in slots {
                let (arg, base) = match slot {
                    Slot::Pass => (NealTerm::var(&names[&cp]), names[&cp].clone()),
                    Slot::Hole(h) => (self.build(&h, &cp, k, names)?, "u".to_string()),
                };
                let n = self.fresh(&base);
                inner.insert(cp, n.clone());
                subs.push((arg, n));
            }
            let body = self.build(t, path, k + 1, &inner)?;
            return Ok(NealTerm::promote(body, subs));
        }
        match t {
            Term::Var { name, .. } => Err(bad(format!("unnamed variable {name} at {path}"))),
            Term::Abs { binder, body } => {
                let occs = self.occs.get(path).cloned().unwrap_or_default();
                let b = self.fresh(binder);
                let mut inner = names.clone();
                if occs.len() <= 1 {
                    for o in occs {
                        inner.insert(o, b.clone());
                    }
                    let m = self.build(body, &path.child(Step::Body), k, &inner)?;
                    return Ok(NealTerm::abs(&b, m));
                }
                let ns: Vec<String> = occs.iter().map(|_| self.fresh(binder)).collect();
                for (o, n) in occs.iter().zip(&ns) {
                    inner.insert(o.clone(), n.clone());
                }
                let m = self.build(body, &path.child(Step::Body), k, &inner)?;
                Ok(NealTerm::abs(&b, self.chain(m, &b, &ns)))
            }
            Term::App { fun, arg } => {
                let m = self.build(fun, &path.child(Step::Fun), k, names)?;
                let n = self.build(arg, &path.child(Step::Arg), k, names)?;
                Ok(NealTerm::app(m, n))
            }
        }
    }
}

/// Reads a term with explicit boxes and contractions off a solution.
pub fn build_witness(inf: &Inference, x: &Valuation) -> Result<NealTerm, NealError> {
    let term = &inf.term;
    let binders = term.binders();
    let mut occs: HashMap<OccId, Vec<OccId>> = HashMap::new();
    let mut free: Vec<(String, Vec<OccId>)> = Vec::new();
    for (p, s) in term.nodes() {
        if let Term::Var { name, .. } = s {
            match binders.get(&p).cloned().flatten() {
                Some(b) => occs.entry(b).or_default().push(p),
                None => match free.iter_mut().find(|(n, _)| n == name) {
                    Some((_, v)) => v.push(p),
                    None => free.push((name.clone(), vec![p])),
                },
            }
        }
    }
    let mut b = Builder {
        level: levels(inf, x),
        binders,
        occs,
        taken: free.iter().map(|(n, _)| n.clone()).collect(),
    };
    let mut names = HashMap::new();
    let mut chains = Vec::new();
    for (n, ps) in &free {
        if ps.len() == 1 {
            names.insert(ps[0].clone(), n.clone());
        } else {
            let ns: Vec<String> = ps.iter().map(|_| b.fresh(n)).collect();
            for (p, m) in ps.iter().zip(&ns) {
                names.insert(p.clone(), m.clone());
            }
            chains.push((n.clone(), ns));
        }
    }
    let mut p = b.build(term, &OccId::root(), 0, &names)?;
    for (n, ns) in chains.iter().rev() {
        p = b.chain(p, n, ns);
    }
    Ok(p)
}

#[derive(Debug, Clone)]
pub struct WitnessOutcome {
    pub term: NealTerm,
    pub valuation: Valuation,
    pub basis: Basis,
    pub ty: Formula,
    /// Set when the requested valuation had to be replaced by another
    /// one with the same concrete judgment.
    pub substituted: bool,
}

fn instantiate(inf: &Inference, x: &Valuation) -> Result<(Basis, Formula), NealError> {
    let e = |e: crate::eal::EalError| bad(e.to_string());
    let mut basis = Basis::new();
    for (v, t) in &inf.base {
        basis.insert(v.clone(), t.instantiate(x).map_err(e)?);
    }
    Ok((basis, inf.ty.instantiate(x).map_err(e)?))
}

fn check(inf: &Inference, x: &Valuation, basis: &Basis, ty: &Formula) -> Result<NealTerm, NealError> {
    let p = build_witness(inf, x)?;
    let erased = erase_star(&p)?;
    if !alpha_eq(&erased, &inf.term) {
        return Err(bad(format!("witness {p} erases to {erased}")));
    }
    let report = is_candidate(&p);
    if !report.ok() {
        return Err(bad(format!("witness {p} is not a candidate: {}", report.failures.join("; "))));
    }
    neal_check(basis, &p, ty)?;
    Ok(p)
}

const FALLBACK_TRIES: usize = 64;

/// Builds and checks a witness for `x`. When the box layout of `x` is
/// not realisable, other solutions with the same concrete judgment are
/// tried.
pub fn verified_witness(inf: &Inference, x: &Valuation, bound: u64) -> Result<WitnessOutcome, NealError> {
    let (basis, ty) = instantiate(inf, x)?;
    let first = match check(inf, x, &basis, &ty) {
        Ok(p) => return Ok(WitnessOutcome { term: p, valuation: x.clone(), basis, ty, substituted: false }),
        Err(e) => e,
    };
    let e = |e: crate::eal::EalError| bad(e.to_string());
    let mut rows: Vec<(crate::eal::LinExpr, Kind)> = Vec::new();
    for (r, k) in inf.ty.pin_rows(&ty).map_err(e)? {
        rows.push((r, Kind::Pin(k)));
    }
    for (v, t) in &inf.base {
        for (r, k) in t.pin_rows(&basis[v]).map_err(e)? {
            rows.push((r, Kind::Pin(k)));
        }
    }
    let pinned = inf.store.with_rows(&rows);
    for y in enumerate(&pinned, bound, FALLBACK_TRIES).solutions {
        if &y == x {
            continue;
        }
        if let Ok(p) = check(inf, &y, &basis, &ty) {
            return Ok(WitnessOutcome { term: p, valuation: y, basis, ty, substituted: true });
        }
    }
    Err(first)
}
