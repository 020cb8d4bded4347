//! Elementary affine terms: syntax, legality, erasure and typing.

mod reduce;
mod witness;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use reduce::{find_redex, is_candidate, normalize_nonbeta, reduce_step, CandidateReport, Rule};
pub use witness::{build_witness, levels, verified_witness, WitnessOutcome};

use crate::eal::{formula, Formula};
use crate::lambda::{fresh_name, is_ident_start, subst_many, Cursor, SyntaxError, Term};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NealTerm {
    Var(String),
    Abs(String, Box<NealTerm>),
    App(Box<NealTerm>, Box<NealTerm>),
    /// `!(M)[M1/x1, ..., Mn/xn]`
    Promote(Box<NealTerm>, Vec<(NealTerm, String)>),
    /// `M[N/x,y]`: body, shared term, the two names
    Contract(Box<NealTerm>, Box<NealTerm>, String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NealError {
    #[error("not legal: {0}")]
    NotLegal(String),
    #[error("ill-typed at {node}: {reason}")]
    IllTyped { node: String, reason: String },
    #[error("no redex for the requested rule")]
    NoRedex,
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("internal invariant violated: {0}")]
    InternalInvariantViolation(String),
}

pub type Basis = BTreeMap<String, Formula>;

impl NealTerm {
    pub fn var(x: &str) -> NealTerm {
        NealTerm::Var(x.to_string())
    }

    pub fn abs(x: &str, m: NealTerm) -> NealTerm {
        NealTerm::Abs(x.to_string(), Box::new(m))
    }

    pub fn app(m: NealTerm, n: NealTerm) -> NealTerm {
        NealTerm::App(Box::new(m), Box::new(n))
    }

    pub fn promote(m: NealTerm, subs: Vec<(NealTerm, String)>) -> NealTerm {
        NealTerm::Promote(Box::new(m), subs)
    }

    pub fn contract(m: NealTerm, n: NealTerm, x: &str, y: &str) -> NealTerm {
        NealTerm::Contract(Box::new(m), Box::new(n), x.to_string(), y.to_string())
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            NealTerm::Var(x) => BTreeSet::from([x.clone()]),
            NealTerm::Abs(x, m) => {
                let mut s = m.free_vars();
                s.remove(x);
                s
            }
            NealTerm::App(m, n) => {
                let mut s = m.free_vars();
                s.extend(n.free_vars());
                s
            }
            NealTerm::Promote(m, subs) => {
                let mut s = m.free_vars();
                for (_, x) in subs {
                    s.remove(x);
                }
                for (a, _) in subs {
                    s.extend(a.free_vars());
                }
                s
            }
            NealTerm::Contract(m, n, x, y) => {
                let mut s = m.free_vars();
                s.remove(x);
                s.remove(y);
                s.extend(n.free_vars());
                s
            }
        }
    }

    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |t| match t {
            NealTerm::Var(x) | NealTerm::Abs(x, _) => {
                out.insert(x.clone());
            }
            NealTerm::Promote(_, subs) => {
                out.extend(subs.iter().map(|(_, x)| x.clone()));
            }
            NealTerm::Contract(_, _, x, y) => {
                out.insert(x.clone());
                out.insert(y.clone());
            }
            NealTerm::App(..) => {}
        });
        out
    }

    /// Immediate subterms in position order: body first, then arguments.
    pub fn children(&self) -> Vec<&NealTerm> {
        match self {
            NealTerm::Var(_) => vec![],
            NealTerm::Abs(_, m) => vec![m],
            NealTerm::App(m, n) => vec![m, n],
            NealTerm::Promote(m, subs) => {
                let mut v: Vec<&NealTerm> = vec![m];
                v.extend(subs.iter().map(|(a, _)| a));
                v
            }
            NealTerm::Contract(m, n, _, _) => vec![m, n],
        }
    }

    pub fn child_mut(&mut self, i: usize) -> Option<&mut NealTerm> {
        match (self, i) {
            (NealTerm::Abs(_, m), 0) => Some(m),
            (NealTerm::App(m, _), 0) => Some(m),
            (NealTerm::App(_, n), 1) => Some(n),
            (NealTerm::Promote(m, _), 0) => Some(m),
            (NealTerm::Promote(_, subs), k) if k >= 1 && k <= subs.len() => Some(&mut subs[k - 1].0),
            (NealTerm::Contract(m, _, _, _), 0) => Some(m),
            (NealTerm::Contract(_, n, _, _), 1) => Some(n),
            _ => None,
        }
    }

    pub fn at(&self, pos: &[usize]) -> Option<&NealTerm> {
        let mut t = self;
        for &i in pos {
            t = *t.children().get(i)?;
        }
        Some(t)
    }

    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a NealTerm)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// Every subterm with its position, preorder.
    pub fn positions(&self) -> Vec<(Vec<usize>, &NealTerm)> {
        let mut out = Vec::new();
        fn go<'a>(t: &'a NealTerm, pos: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, &'a NealTerm)>) {
            out.push((pos.clone(), t));
            for (i, c) in t.children().into_iter().enumerate() {
                pos.push(i);
                go(c, pos, out);
                pos.pop();
            }
        }
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn promote_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |t| {
            if matches!(t, NealTerm::Promote(..)) {
                n += 1;
            }
        });
        n
    }

    /// Length as used by the simplicity condition.
    pub fn length(&self) -> usize {
        match self {
            NealTerm::Var(_) => 0,
            NealTerm::Abs(_, m) => 1 + m.length(),
            NealTerm::App(m, n) => 1 + m.length() + n.length(),
            NealTerm::Promote(m, subs) => m.length() + subs.iter().map(|(a, _)| a.length()).sum::<usize>(),
            NealTerm::Contract(m, n, _, _) => m.length() + n.length(),
        }
    }
}

pub fn term_length(t: &Term) -> usize {
    match t {
        Term::Var { .. } => 0,
        Term::Abs { body, .. } => 1 + term_length(body),
        Term::App { fun, arg } => 1 + term_length(fun) + term_length(arg),
    }
}

fn write_atomic(f: &mut fmt::Formatter<'_>, t: &NealTerm) -> fmt::Result {
    if matches!(t, NealTerm::Abs(..)) {
        write!(f, "({t})")
    } else {
        write!(f, "{t}")
    }
}

impl fmt::Display for NealTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NealTerm::Var(x) => write!(f, "{x}"),
            NealTerm::Abs(x, m) => write!(f, "\\{x}.{m}"),
            NealTerm::App(m, n) => write!(f, "({m} {n})"),
            NealTerm::Promote(m, subs) => {
                write!(f, "!({m})[")?;
                for (i, (a, x)) in subs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}/{x}")?;
                }
                write!(f, "]")
            }
            NealTerm::Contract(m, n, x, y) => {
                write_atomic(f, m)?;
                write!(f, "[{n}/{x},{y}]")
            }
        }
    }
}

struct Parser {
    cur: Cursor,
}

impl Parser {
    fn is_lambda(&mut self) -> bool {
        matches!(self.cur.peek(), Some('\\') | Some('λ'))
    }

    fn seq(&mut self, in_group: bool) -> Result<NealTerm, SyntaxError> {
        let mut items: Vec<NealTerm> = Vec::new();
        loop {
            match self.cur.peek() {
                None | Some(')') | Some('/') | Some(',') | Some(']') => break,
                Some('\\') | Some('λ') => {
                    if in_group && items.is_empty() {
                        items.push(self.lambda_atomic()?);
                    } else {
                        items.push(self.lambda_max()?);
                        break;
                    }
                }
                Some(_) => items.push(self.atom()?),
            }
        }
        let mut it = items.into_iter();
        let first = it.next().ok_or_else(|| self.cur.err("expected term"))?;
        Ok(it.fold(first, NealTerm::app))
    }

    fn binder(&mut self) -> Result<String, SyntaxError> {
        self.cur.pos += 1;
        let x = self.cur.ident()?;
        self.cur.expect('.')?;
        Ok(x)
    }

    fn lambda_max(&mut self) -> Result<NealTerm, SyntaxError> {
        let x = self.binder()?;
        Ok(NealTerm::abs(&x, self.seq(false)?))
    }

    fn lambda_atomic(&mut self) -> Result<NealTerm, SyntaxError> {
        let x = self.binder()?;
        let body = if self.is_lambda() { self.lambda_atomic()? } else { self.atom()? };
        Ok(NealTerm::abs(&x, body))
    }

    fn atom(&mut self) -> Result<NealTerm, SyntaxError> {
        let mut t = match self.cur.peek() {
            Some('(') => {
                self.cur.pos += 1;
                let t = self.seq(true)?;
                self.cur.expect(')')?;
                t
            }
            Some('!') => {
                self.cur.pos += 1;
                self.cur.expect('(')?;
                let body = self.seq(true)?;
                self.cur.expect(')')?;
                let mut subs = Vec::new();
                if self.cur.eat('[') && !self.cur.eat(']') {
                    loop {
                        let a = self.seq(false)?;
                        self.cur.expect('/')?;
                        let x = self.cur.ident()?;
                        subs.push((a, x));
                        if self.cur.eat(']') {
                            break;
                        }
                        self.cur.expect(',')?;
                    }
                }
                // identity substitutions may be left implicit
                let bound: BTreeSet<String> = subs.iter().map(|(_, x)| x.clone()).collect();
                for v in free_in_order(&body) {
                    if !bound.contains(&v) {
                        subs.push((NealTerm::Var(v.clone()), v));
                    }
                }
                NealTerm::promote(body, subs)
            }
            Some(c) if is_ident_start(c) => NealTerm::Var(self.cur.ident()?),
            Some(_) => return Err(self.cur.err("unexpected character")),
            None => return Err(self.cur.err("unexpected end of input")),
        };
        while self.cur.eat('[') {
            let n = self.seq(false)?;
            self.cur.expect('/')?;
            let x = self.cur.ident()?;
            self.cur.expect(',')?;
            let y = self.cur.ident()?;
            self.cur.expect(']')?;
            t = NealTerm::contract(t, n, &x, &y);
        }
        Ok(t)
    }
}

fn free_in_order(t: &NealTerm) -> Vec<String> {
    let fv = t.free_vars();
    let mut out = Vec::new();
    t.walk(&mut |s| {
        if let NealTerm::Var(x) = s {
            if fv.contains(x) && !out.contains(x) {
                out.push(x.clone());
            }
        }
    });
    out
}

pub fn parse_neal(text: &str) -> Result<NealTerm, SyntaxError> {
    let mut p = Parser { cur: Cursor::new(text) };
    let t = p.seq(false)?;
    if !p.cur.at_end() {
        return Err(p.cur.err("trailing input"));
    }
    Ok(t)
}

/// Parses `x : A, y : B |- TERM`, or a bare term with an empty basis.
pub fn parse_judgment(text: &str) -> Result<(Basis, NealTerm), SyntaxError> {
    let Some(idx) = text.find("|-") else {
        return Ok((Basis::new(), parse_neal(text)?));
    };
    let (head, tail) = text.split_at(idx);
    let mut basis = Basis::new();
    let mut c = Cursor::new(head);
    while !c.at_end() {
        let x = c.ident()?;
        c.expect(':')?;
        let f = formula(&mut c)?;
        basis.insert(x, f);
        if !c.eat(',') {
            break;
        }
    }
    if !c.at_end() {
        return Err(c.err("expected ',' or '|-'"));
    }
    let t = parse_neal(&tail[2..]).map_err(|e| SyntaxError { pos: e.pos + idx + 2, msg: e.msg })?;
    Ok((basis, t))
}

pub fn check_legal(t: &NealTerm) -> Result<(), NealError> {
    match t {
        NealTerm::Var(_) => Ok(()),
        NealTerm::Abs(_, m) => check_legal(m),
        NealTerm::App(m, n) => {
            check_legal(m)?;
            check_legal(n)?;
            let common: Vec<String> = m.free_vars().intersection(&n.free_vars()).cloned().collect();
            if common.is_empty() {
                Ok(())
            } else {
                Err(NealError::NotLegal(format!("{} shared by both sides of {t}", common.join(", "))))
            }
        }
        NealTerm::Promote(m, subs) => {
            check_legal(m)?;
            let binders: BTreeSet<String> = subs.iter().map(|(_, x)| x.clone()).collect();
            if binders.len() != subs.len() {
                return Err(NealError::NotLegal(format!("repeated binder in {t}")));
            }
            if m.free_vars() != binders {
                return Err(NealError::NotLegal(format!("box body free variables differ from its binders in {t}")));
            }
            let mut seen = BTreeSet::new();
            for (a, _) in subs {
                check_legal(a)?;
                for v in a.free_vars() {
                    if !seen.insert(v.clone()) {
                        return Err(NealError::NotLegal(format!("{v} occurs in two box arguments of {t}")));
                    }
                }
            }
            Ok(())
        }
        NealTerm::Contract(m, n, _, _) => {
            check_legal(m)?;
            check_legal(n)?;
            if m.free_vars().is_disjoint(&n.free_vars()) {
                Ok(())
            } else {
                Err(NealError::NotLegal(format!("contracted term shares variables with the body in {t}")))
            }
        }
    }
}

fn erase_raw(t: &NealTerm) -> Term {
    match t {
        NealTerm::Var(x) => Term::var(x),
        NealTerm::Abs(x, m) => Term::abs(x, erase_raw(m)),
        NealTerm::App(m, n) => Term::app(erase_raw(m), erase_raw(n)),
        NealTerm::Promote(m, subs) => {
            let s: Vec<(String, Term)> = subs.iter().map(|(a, x)| (x.clone(), erase_raw(a))).collect();
            subst_many(&erase_raw(m), &s)
        }
        NealTerm::Contract(m, n, x, y) => {
            let e = erase_raw(n);
            subst_many(&erase_raw(m), &[(x.clone(), e.clone()), (y.clone(), e)])
        }
    }
}

/// The lambda term obtained by forgetting boxes and contractions.
pub fn erase_star(t: &NealTerm) -> Result<Term, NealError> {
    check_legal(t)?;
    Ok(erase_raw(t).renumber())
}

/// First-order unification over formulas; atoms are rigid.
#[derive(Debug, Default, Clone)]
pub struct Unifier {
    bound: BTreeMap<u32, Formula>,
    next: u32,
}

impl Unifier {
    pub fn starting_after(f: &Formula) -> Self {
        let next = f.metas().into_iter().max().map_or(0, |m| m + 1);
        Unifier { bound: BTreeMap::new(), next }
    }

    pub fn reserve(&mut self, f: &Formula) {
        if let Some(m) = f.metas().into_iter().max() {
            self.next = self.next.max(m + 1);
        }
    }

    pub fn fresh(&mut self) -> Formula {
        self.next += 1;
        Formula::Meta(self.next - 1)
    }

    pub fn resolve(&self, f: &Formula) -> Formula {
        match f {
            Formula::Meta(m) => match self.bound.get(m) {
                Some(g) => self.resolve(g),
                None => f.clone(),
            },
            Formula::Atom(_) => f.clone(),
            Formula::Bang(g) => Formula::bang(self.resolve(g)),
            Formula::Lolli(a, b) => Formula::lolli(self.resolve(a), self.resolve(b)),
        }
    }

    fn occurs(&self, m: u32, f: &Formula) -> bool {
        self.resolve(f).metas().contains(&m)
    }

    pub fn unify(&mut self, a: &Formula, b: &Formula) -> Result<(), String> {
        let a = self.resolve(a);
        let b = self.resolve(b);
        match (&a, &b) {
            (Formula::Meta(m), Formula::Meta(n)) if m == n => Ok(()),
            (Formula::Meta(m), t) | (t, Formula::Meta(m)) => {
                if self.occurs(*m, t) {
                    return Err(format!("cannot unify {a} with {b}: cyclic"));
                }
                self.bound.insert(*m, t.clone());
                Ok(())
            }
            (Formula::Atom(x), Formula::Atom(y)) if x == y => Ok(()),
            (Formula::Bang(x), Formula::Bang(y)) => self.unify(x, y),
            (Formula::Lolli(a1, b1), Formula::Lolli(a2, b2)) => {
                self.unify(a1, a2)?;
                self.unify(b1, b2)
            }
            _ => Err(format!("cannot unify {a} with {b}")),
        }
    }
}

fn ill(t: &NealTerm, reason: String) -> NealError {
    NealError::IllTyped { node: t.to_string(), reason }
}

fn infer_in(u: &mut Unifier, env: &BTreeMap<String, Formula>, t: &NealTerm) -> Result<Formula, NealError> {
    match t {
        NealTerm::Var(x) => env.get(x).cloned().ok_or_else(|| ill(t, format!("{x} is not in the basis"))),
        NealTerm::Abs(x, m) => {
            let a = u.fresh();
            let mut env2 = env.clone();
            env2.insert(x.clone(), a.clone());
            let b = infer_in(u, &env2, m)?;
            Ok(Formula::lolli(a, b))
        }
        NealTerm::App(m, n) => {
            let f = infer_in(u, env, m)?;
            let a = infer_in(u, env, n)?;
            let r = u.fresh();
            u.unify(&f, &Formula::lolli(a, r.clone())).map_err(|e| ill(t, e))?;
            Ok(r)
        }
        NealTerm::Promote(m, subs) => {
            let mut inner = BTreeMap::new();
            for (a, x) in subs {
                let ta = infer_in(u, env, a)?;
                let alpha = u.fresh();
                u.unify(&ta, &Formula::bang(alpha.clone()))
                    .map_err(|e| ill(t, format!("box argument {a} is not of ! type ({e})")))?;
                inner.insert(x.clone(), alpha);
            }
            let b = infer_in(u, &inner, m)?;
            Ok(Formula::bang(b))
        }
        NealTerm::Contract(m, n, x, y) => {
            let tn = infer_in(u, env, n)?;
            let alpha = u.fresh();
            let shared = Formula::bang(alpha);
            u.unify(&tn, &shared).map_err(|e| ill(t, format!("contracted term {n} is not of ! type ({e})")))?;
            let mut env2 = env.clone();
            env2.insert(x.clone(), shared.clone());
            env2.insert(y.clone(), shared);
            infer_in(u, &env2, m)
        }
    }
}

/// Most general typing of a legal term. Free variables missing from the
/// basis receive fresh metavariables; the completed basis is returned.
pub fn neal_infer(basis: &Basis, t: &NealTerm) -> Result<(Basis, Formula), NealError> {
    check_legal(t)?;
    let mut u = Unifier::default();
    for f in basis.values() {
        u.reserve(f);
    }
    let mut env = basis.clone();
    for v in t.free_vars() {
        env.entry(v).or_insert_with(|| u.fresh());
    }
    let ty = infer_in(&mut u, &env, t)?;
    let env = env.into_iter().map(|(k, f)| (k, u.resolve(&f))).collect();
    Ok((env, u.resolve(&ty)))
}

/// Type of `t` under `basis`; unused basis entries are allowed.
pub fn neal_typecheck(basis: &Basis, t: &NealTerm) -> Result<Formula, NealError> {
    Ok(neal_infer(basis, t)?.1)
}

/// Checks `basis |- t : expected`. Metavariables in `basis` and
/// `expected` may be instantiated.
pub fn neal_check(basis: &Basis, t: &NealTerm, expected: &Formula) -> Result<(), NealError> {
    check_legal(t)?;
    let mut u = Unifier::default();
    for f in basis.values() {
        u.reserve(f);
    }
    u.reserve(expected);
    let env = basis.clone();
    for v in t.free_vars() {
        if !env.contains_key(&v) {
            return Err(ill(t, format!("{v} is not in the basis")));
        }
    }
    let ty = infer_in(&mut u, &env, t)?;
    u.unify(&ty, expected).map_err(|e| ill(t, format!("expected {expected}: {e}")))
}

/// Replaces metavariables by distinct atoms `_A`, `_B`, ... so that a
/// later check cannot specialise them.
pub fn skolemize(f: &Formula) -> Formula {
    let s = f.metas().into_iter().map(|m| (m, Formula::Atom(format!("_{}", crate::eal::meta_name(m))))).collect();
    f.subst_metas(&s)
}

/// Capture-avoiding `t{s/x}`; `used` collects names to avoid.
pub fn subst(t: &NealTerm, x: &str, s: &NealTerm, used: &mut BTreeSet<String>) -> NealTerm {
    let fv_s = s.free_vars();
    let fresh = |base: &str, used: &mut BTreeSet<String>| {
        let n = fresh_name(base, used);
        used.insert(n.clone());
        n
    };
    match t {
        NealTerm::Var(y) => {
            if y == x {
                s.clone()
            } else {
                t.clone()
            }
        }
        NealTerm::Abs(y, m) => {
            if y == x || !m.free_vars().contains(x) {
                return t.clone();
            }
            if fv_s.contains(y) {
                let z = fresh(y, used);
                let m2 = subst(m, y, &NealTerm::Var(z.clone()), used);
                NealTerm::Abs(z, Box::new(subst(&m2, x, s, used)))
            } else {
                NealTerm::Abs(y.clone(), Box::new(subst(m, x, s, used)))
            }
        }
        NealTerm::App(m, n) => NealTerm::app(subst(m, x, s, used), subst(n, x, s, used)),
        NealTerm::Promote(m, subs) => {
            let args: Vec<NealTerm> = subs.iter().map(|(a, _)| subst(a, x, s, used)).collect();
            if subs.iter().any(|(_, b)| b == x) || !m.free_vars().contains(x) {
                return NealTerm::Promote(m.clone(), args.into_iter().zip(subs.iter().map(|(_, b)| b.clone())).collect());
            }
            let mut body = (**m).clone();
            let mut names = Vec::new();
            for (_, b) in subs {
                if fv_s.contains(b) {
                    let z = fresh(b, used);
                    body = subst(&body, b, &NealTerm::Var(z.clone()), used);
                    names.push(z);
                } else {
                    names.push(b.clone());
                }
            }
            let body = subst(&body, x, s, used);
            NealTerm::Promote(Box::new(body), args.into_iter().zip(names).collect())
        }
        NealTerm::Contract(m, n, y, z) => {
            let n2 = subst(n, x, s, used);
            if y == x || z == x || !m.free_vars().contains(x) {
                return NealTerm::Contract(m.clone(), Box::new(n2), y.clone(), z.clone());
            }
            let mut body = (**m).clone();
            let ren = |v: &String, body: &mut NealTerm, used: &mut BTreeSet<String>| {
                if fv_s.contains(v) {
                    let w = fresh(v, used);
                    *body = subst(body, v, &NealTerm::Var(w.clone()), used);
                    w
                } else {
                    v.clone()
                }
            };
            let y2 = ren(y, &mut body, used);
            let z2 = ren(z, &mut body, used);
            NealTerm::Contract(Box::new(subst(&body, x, s, used)), Box::new(n2), y2, z2)
        }
    }
}

/// Renames free variables simultaneously through fresh intermediates.
pub fn rename_free(t: &NealTerm, map: &[(String, String)], used: &mut BTreeSet<String>) -> NealTerm {
    let mut tmp = Vec::new();
    let mut r = t.clone();
    for (x, _) in map {
        let k = fresh_name(&format!("{x}#"), used);
        used.insert(k.clone());
        r = subst(&r, x, &NealTerm::Var(k.clone()), used);
        tmp.push(k);
    }
    for ((_, y), k) in map.iter().zip(tmp) {
        r = subst(&r, &k, &NealTerm::Var(y.clone()), used);
    }
    r
}
