//! Type-free lambda terms with per-occurrence identities.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One branch choice on the way from the root to a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Step {
    Body,
    Fun,
    Arg,
}

/// Root-to-node path. Doubles as the identity of a variable occurrence.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OccId(pub Vec<Step>);

impl OccId {
    pub fn root() -> Self {
        OccId(Vec::new())
    }

    pub fn child(&self, step: Step) -> Self {
        let mut v = self.0.clone();
        v.push(step);
        OccId(v)
    }

    /// True when `self` is an ancestor of `other` or equal to it.
    pub fn is_prefix_of(&self, other: &OccId) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for OccId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "@");
        }
        for s in &self.0 {
            let c = match s {
                Step::Body => 'b',
                Step::Fun => 'f',
                Step::Arg => 'a',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var { name: String, occ: OccId },
    Abs { binder: String, body: Box<Term> },
    App { fun: Box<Term>, arg: Box<Term> },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at {pos}: {msg}")]
pub struct SyntaxError {
    pub pos: usize,
    pub msg: String,
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var { name: name.to_string(), occ: OccId::root() }
    }

    pub fn abs(binder: &str, body: Term) -> Term {
        Term::Abs { binder: binder.to_string(), body: Box::new(body) }
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App { fun: Box::new(fun), arg: Box::new(arg) }
    }

    pub fn is_app(&self) -> bool {
        matches!(self, Term::App { .. })
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var { .. })
    }

    /// Reassigns every occurrence id from its tree path.
    pub fn renumber(self) -> Term {
        fn go(t: Term, path: OccId) -> Term {
            match t {
                Term::Var { name, .. } => Term::Var { name, occ: path },
                Term::Abs { binder, body } => {
                    let body = go(*body, path.child(Step::Body));
                    Term::Abs { binder, body: Box::new(body) }
                }
                Term::App { fun, arg } => {
                    let fun = go(*fun, path.child(Step::Fun));
                    let arg = go(*arg, path.child(Step::Arg));
                    Term::App { fun: Box::new(fun), arg: Box::new(arg) }
                }
            }
        }
        go(self, OccId::root())
    }

    /// Number of syntax nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Var { .. } => 1,
            Term::Abs { body, .. } => 1 + body.size(),
            Term::App { fun, arg } => 1 + fun.size() + arg.size(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        fn go(t: &Term, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match t {
                Term::Var { name, .. } => {
                    if !bound.contains(name) {
                        out.insert(name.clone());
                    }
                }
                Term::Abs { binder, body } => {
                    bound.push(binder.clone());
                    go(body, bound, out);
                    bound.pop();
                }
                Term::App { fun, arg } => {
                    go(fun, bound, out);
                    go(arg, bound, out);
                }
            }
        }
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// All names used anywhere in the term, bound or free.
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |t| match t {
            Term::Var { name, .. } => {
                out.insert(name.clone());
            }
            Term::Abs { binder, .. } => {
                out.insert(binder.clone());
            }
            Term::App { .. } => {}
        });
        out
    }

    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        match self {
            Term::Var { .. } => {}
            Term::Abs { body, .. } => body.walk(f),
            Term::App { fun, arg } => {
                fun.walk(f);
                arg.walk(f);
            }
        }
    }

    /// Preorder list of (path, node).
    pub fn nodes(&self) -> Vec<(OccId, &Term)> {
        let mut out = Vec::new();
        fn go<'a>(t: &'a Term, path: OccId, out: &mut Vec<(OccId, &'a Term)>) {
            out.push((path.clone(), t));
            match t {
                Term::Var { .. } => {}
                Term::Abs { body, .. } => go(body, path.child(Step::Body), out),
                Term::App { fun, arg } => {
                    go(fun, path.child(Step::Fun), out);
                    go(arg, path.child(Step::Arg), out);
                }
            }
        }
        go(self, OccId::root(), &mut out);
        out
    }

    pub fn at(&self, path: &OccId) -> Option<&Term> {
        let mut t = self;
        for s in &path.0 {
            t = match (t, s) {
                (Term::Abs { body, .. }, Step::Body) => body,
                (Term::App { fun, .. }, Step::Fun) => fun,
                (Term::App { arg, .. }, Step::Arg) => arg,
                _ => return None,
            };
        }
        Some(t)
    }

    /// Maps each variable occurrence (by path) to the path of its binder,
    /// or `None` when free.
    pub fn binders(&self) -> HashMap<OccId, Option<OccId>> {
        let mut out = HashMap::new();
        fn go(t: &Term, path: OccId, scope: &mut Vec<(String, OccId)>, out: &mut HashMap<OccId, Option<OccId>>) {
            match t {
                Term::Var { name, .. } => {
                    let b = scope.iter().rev().find(|(n, _)| n == name).map(|(_, p)| p.clone());
                    out.insert(path, b);
                }
                Term::Abs { binder, body } => {
                    scope.push((binder.clone(), path.clone()));
                    go(body, path.child(Step::Body), scope, out);
                    scope.pop();
                }
                Term::App { fun, arg } => {
                    go(fun, path.child(Step::Fun), scope, out);
                    go(arg, path.child(Step::Arg), scope, out);
                }
            }
        }
        go(self, OccId::root(), &mut Vec::new(), &mut out);
        out
    }
}

/// Free variable occurrences, left to right.
pub fn fvo(t: &Term) -> Vec<(String, OccId)> {
    match t {
        Term::Var { name, occ } => vec![(name.clone(), occ.clone())],
        Term::Abs { binder, body } => fvo(body).into_iter().filter(|(n, _)| n != binder).collect(),
        Term::App { fun, arg } => {
            let mut v = fvo(fun);
            v.extend(fvo(arg));
            v
        }
    }
}

/// `base` followed by primes until it avoids `used`.
pub fn fresh_name(base: &str, used: &BTreeSet<String>) -> String {
    let mut s = base.to_string();
    while used.contains(&s) {
        s.push('\'');
    }
    s
}

fn subst_raw(t: &Term, x: &str, s: &Term, fv_s: &BTreeSet<String>) -> Term {
    match t {
        Term::Var { name, .. } => {
            if name == x {
                s.clone()
            } else {
                t.clone()
            }
        }
        Term::Abs { binder, body } => {
            if binder == x {
                return t.clone();
            }
            let body_fv = body.free_vars();
            if !body_fv.contains(x) {
                return t.clone();
            }
            if fv_s.contains(binder) {
                let mut used = fv_s.clone();
                used.extend(body.all_names());
                used.insert(x.to_string());
                let nb = fresh_name(binder, &used);
                let renamed = subst_raw(body, binder, &Term::var(&nb), &BTreeSet::from([nb.clone()]));
                Term::Abs { binder: nb, body: Box::new(subst_raw(&renamed, x, s, fv_s)) }
            } else {
                Term::Abs { binder: binder.clone(), body: Box::new(subst_raw(body, x, s, fv_s)) }
            }
        }
        Term::App { fun, arg } => Term::App {
            fun: Box::new(subst_raw(fun, x, s, fv_s)),
            arg: Box::new(subst_raw(arg, x, s, fv_s)),
        },
    }
}

/// Capture-avoiding `body{replacement/name}`.
pub fn subst(body: &Term, name: &str, replacement: &Term) -> Term {
    subst_raw(body, name, replacement, &replacement.free_vars()).renumber()
}

/// Simultaneous capture-avoiding substitution.
pub fn subst_many(body: &Term, subs: &[(String, Term)]) -> Term {
    if subs.is_empty() {
        return body.clone();
    }
    // route through fresh intermediates so replacements never interact
    let mut used = body.all_names();
    for (x, s) in subs {
        used.insert(x.clone());
        used.extend(s.all_names());
    }
    let mut tmp = Vec::new();
    let mut t = body.clone();
    for (x, _) in subs {
        let k = fresh_name(&format!("{x}#"), &used);
        used.insert(k.clone());
        t = subst_raw(&t, x, &Term::var(&k), &BTreeSet::from([k.clone()]));
        tmp.push(k);
    }
    for ((_, s), k) in subs.iter().zip(tmp) {
        t = subst_raw(&t, &k, s, &s.free_vars());
    }
    t.renumber()
}

/// Alpha-equivalence, free variables compared by name.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    fn go(a: &Term, b: &Term, sa: &mut Vec<String>, sb: &mut Vec<String>) -> bool {
        match (a, b) {
            (Term::Var { name: x, .. }, Term::Var { name: y, .. }) => {
                let ia = sa.iter().rposition(|n| n == x);
                let ib = sb.iter().rposition(|n| n == y);
                match (ia, ib) {
                    (Some(i), Some(j)) => sa.len() - i == sb.len() - j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (Term::Abs { binder: x, body: m }, Term::Abs { binder: y, body: n }) => {
                sa.push(x.clone());
                sb.push(y.clone());
                let r = go(m, n, sa, sb);
                sa.pop();
                sb.pop();
                r
            }
            (Term::App { fun: f1, arg: a1 }, Term::App { fun: f2, arg: a2 }) => {
                go(f1, f2, sa, sb) && go(a1, a2, sa, sb)
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new(), &mut Vec::new())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var { name, .. } => write!(f, "{name}"),
            Term::Abs { binder, body } => write!(f, "\\{binder}.{body}"),
            Term::App { fun, arg } => write!(f, "({fun} {arg})"),
        }
    }
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Character cursor shared by the term, type and NEAL parsers.
pub(crate) struct Cursor {
    pub chars: Vec<char>,
    pub pos: usize,
}

impl Cursor {
    pub fn new(text: &str) -> Self {
        Cursor { chars: text.chars().collect(), pos: 0 }
    }

    pub fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    pub fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    pub fn peek_str(&mut self, s: &str) -> bool {
        self.skip_ws();
        let n: Vec<char> = s.chars().collect();
        self.chars.len() >= self.pos + n.len() && self.chars[self.pos..self.pos + n.len()] == n[..]
    }

    pub fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn eat_str(&mut self, s: &str) -> bool {
        if self.peek_str(s) {
            self.pos += s.chars().count();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, c: char) -> Result<(), SyntaxError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{c}'")))
        }
    }

    pub fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(c) if is_ident_start(c) => {
                let start = self.pos;
                while self.pos < self.chars.len() && is_ident_char(self.chars[self.pos]) {
                    self.pos += 1;
                }
                Ok(self.chars[start..self.pos].iter().collect())
            }
            _ => Err(self.err("expected identifier")),
        }
    }

    pub fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    pub fn err(&self, msg: &str) -> SyntaxError {
        SyntaxError { pos: self.pos, msg: msg.to_string() }
    }
}

struct TermParser {
    cur: Cursor,
}

impl TermParser {
    fn is_lambda(&mut self) -> bool {
        matches!(self.cur.peek(), Some('\\') | Some('λ'))
    }

    // juxtaposition sequence up to ')' or end of input
    fn seq(&mut self, in_group: bool) -> Result<Term, SyntaxError> {
        let mut items: Vec<Term> = Vec::new();
        loop {
            match self.cur.peek() {
                None | Some(')') => break,
                Some('\\') | Some('λ') => {
                    if in_group && items.is_empty() {
                        // (\x.M N) reads as ((\x.M) N)
                        let t = self.lambda_atomic()?;
                        items.push(t);
                    } else {
                        let t = self.lambda_max()?;
                        items.push(t);
                        break;
                    }
                }
                Some(_) => {
                    let t = self.atom()?;
                    items.push(t);
                }
            }
        }
        let mut it = items.into_iter();
        let first = it.next().ok_or_else(|| self.cur.err("expected term"))?;
        Ok(it.fold(first, Term::app))
    }

    fn binder(&mut self) -> Result<String, SyntaxError> {
        self.cur.pos += 1;
        let x = self.cur.ident()?;
        self.cur.expect('.')?;
        Ok(x)
    }

    fn lambda_max(&mut self) -> Result<Term, SyntaxError> {
        let x = self.binder()?;
        let body = self.seq(false)?;
        Ok(Term::abs(&x, body))
    }

    fn lambda_atomic(&mut self) -> Result<Term, SyntaxError> {
        let x = self.binder()?;
        let body = if self.is_lambda() { self.lambda_atomic()? } else { self.atom()? };
        Ok(Term::abs(&x, body))
    }

    fn atom(&mut self) -> Result<Term, SyntaxError> {
        match self.cur.peek() {
            Some('(') => {
                self.cur.pos += 1;
                let t = self.seq(true)?;
                self.cur.expect(')')?;
                Ok(t)
            }
            Some(c) if is_ident_start(c) => Ok(Term::var(&self.cur.ident()?)),
            Some(_) => Err(self.cur.err("unexpected character")),
            None => Err(self.cur.err("unexpected end of input")),
        }
    }
}

/// Parses the surface syntax. Juxtaposition is left-associative, a body
/// extends maximally right, except that a lambda heading a parenthesized
/// application takes a single atom as body.
pub fn parse_term(text: &str) -> Result<Term, SyntaxError> {
    let mut p = TermParser { cur: Cursor::new(text) };
    let t = p.seq(false)?;
    if !p.cur.at_end() {
        return Err(p.cur.err("trailing input"));
    }
    Ok(t.renumber())
}
