//! EAL types: general types with symbolic exponents, concrete formulas,
//! and the P / U / C constraint generators.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lambda::{is_ident_char, is_ident_start, Cursor, SyntaxError};
use crate::simple::SimpleType;
use crate::solver::Kind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tag {
    /// fresh type variable from P
    P,
    /// boxing of a subterm
    B,
    /// slice box inside the boxing script
    C,
    /// box around a non-linear abstraction body
    N,
}

impl Tag {
    pub fn letter(self) -> char {
        match self {
            Tag::P => 'p',
            Tag::B => 'b',
            Tag::C => 'c',
            Tag::N => 'n',
        }
    }

    pub fn from_letter(c: char) -> Option<Tag> {
        match c {
            'p' => Some(Tag::P),
            'b' => Some(Tag::B),
            'c' => Some(Tag::C),
            'n' => Some(Tag::N),
            _ => None,
        }
    }
}

/// Decision variable. Indices come from one counter, so `p1` and `b1`
/// never coexist in a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BoxVar {
    pub idx: u32,
    pub tag: Tag,
}

impl fmt::Display for BoxVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.tag.letter(), self.idx)
    }
}

impl std::str::FromStr for BoxVar {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let mut it = s.chars();
        let tag = it.next().and_then(Tag::from_letter).ok_or_else(|| format!("bad variable {s}"))?;
        let idx = it.as_str().parse().map_err(|_| format!("bad variable {s}"))?;
        Ok(BoxVar { idx, tag })
    }
}

impl Serialize for BoxVar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BoxVar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Default, Clone)]
pub struct VarGen {
    next: u32,
}

impl VarGen {
    pub fn fresh(&mut self, tag: Tag) -> BoxVar {
        self.next += 1;
        BoxVar { idx: self.next, tag }
    }

    pub fn count(&self) -> u32 {
        self.next
    }
}

pub type Valuation = BTreeMap<BoxVar, u64>;

/// Integer linear combination of box variables without constant term.
/// Zero coefficients are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinExpr(BTreeMap<BoxVar, i64>);

impl LinExpr {
    pub fn zero() -> Self {
        LinExpr::default()
    }

    pub fn var(v: BoxVar) -> Self {
        LinExpr(BTreeMap::from([(v, 1)]))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeff(&self, v: BoxVar) -> i64 {
        self.0.get(&v).copied().unwrap_or(0)
    }

    pub fn add_term(&mut self, v: BoxVar, c: i64) {
        let e = self.0.entry(v).or_insert(0);
        *e += c;
        if *e == 0 {
            self.0.remove(&v);
        }
    }

    pub fn plus(&self, other: &LinExpr) -> LinExpr {
        let mut r = self.clone();
        for (v, c) in &other.0 {
            r.add_term(*v, *c);
        }
        r
    }

    pub fn minus(&self, other: &LinExpr) -> LinExpr {
        self.plus(&other.scale(-1))
    }

    pub fn scale(&self, k: i64) -> LinExpr {
        if k == 0 {
            return LinExpr::zero();
        }
        LinExpr(self.0.iter().map(|(v, c)| (*v, c * k)).collect())
    }

    pub fn terms(&self) -> impl Iterator<Item = (BoxVar, i64)> + '_ {
        self.0.iter().map(|(v, c)| (*v, *c))
    }

    pub fn vars(&self) -> impl Iterator<Item = BoxVar> + '_ {
        self.0.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Missing variables count as 0.
    pub fn eval(&self, x: &Valuation) -> i64 {
        self.0.iter().map(|(v, c)| c * x.get(v).copied().unwrap_or(0) as i64).sum()
    }

    /// Positive terms first, each group in descending index order.
    fn desc(&self) -> Vec<(BoxVar, i64)> {
        let mut v: Vec<_> = self.terms().collect();
        v.sort_by(|a, b| (b.1 > 0).cmp(&(a.1 > 0)).then(b.0.cmp(&a.0)));
        v
    }

    /// Signed, space-separated form used in constraint dumps.
    pub fn dump(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.desc()
            .iter()
            .map(|(v, c)| match c {
                1 => format!("+{v}"),
                -1 => format!("-{v}"),
                k if *k > 0 => format!("+{k}{v}"),
                k => format!("{k}{v}"),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (v, c)) in self.desc().into_iter().enumerate() {
            let sign = if c < 0 { "-" } else if i > 0 { "+" } else { "" };
            let k = c.abs();
            if k == 1 {
                write!(f, "{sign}{v}")?;
            } else {
                write!(f, "{sign}{k}{v}")?;
            }
        }
        Ok(())
    }
}

/// Parses `b3+b2-2p9`, `+n1 -n2`, or `0`.
pub fn parse_lin_expr(text: &str) -> Result<LinExpr, SyntaxError> {
    let mut c = Cursor::new(text);
    let e = lin_expr(&mut c)?;
    if !c.at_end() {
        return Err(c.err("trailing input"));
    }
    Ok(e)
}

fn lin_expr(c: &mut Cursor) -> Result<LinExpr, SyntaxError> {
    let mut e = LinExpr::zero();
    if c.peek() == Some('0') {
        c.pos += 1;
        return Ok(e);
    }
    let mut first = true;
    loop {
        let sign = if c.eat('+') {
            1
        } else if c.eat('-') {
            -1
        } else if first {
            1
        } else {
            break;
        };
        c.skip_ws();
        let start = c.pos;
        while c.pos < c.chars.len() && c.chars[c.pos].is_ascii_digit() {
            c.pos += 1;
        }
        let k: i64 = if c.pos > start { c.chars[start..c.pos].iter().collect::<String>().parse().unwrap() } else { 1 };
        let tag = c.chars.get(c.pos).copied().and_then(Tag::from_letter).ok_or_else(|| c.err("expected box variable"))?;
        c.pos += 1;
        let s = c.pos;
        while c.pos < c.chars.len() && c.chars[c.pos].is_ascii_digit() {
            c.pos += 1;
        }
        if c.pos == s {
            return Err(c.err("expected variable index"));
        }
        let idx = c.chars[s..c.pos].iter().collect::<String>().parse().map_err(|_| c.err("index too large"))?;
        e.add_term(BoxVar { idx, tag }, sign * k);
        first = false;
    }
    if first {
        return Err(c.err("expected linear expression"));
    }
    Ok(e)
}

/// General EAL type: a skeleton with a symbolic exponent on every node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EalType {
    Base { expo: LinExpr, atom: String },
    Arrow { expo: LinExpr, left: Box<EalType>, right: Box<EalType> },
}

impl EalType {
    pub fn expo(&self) -> &LinExpr {
        match self {
            EalType::Base { expo, .. } | EalType::Arrow { expo, .. } => expo,
        }
    }

    fn expo_mut(&mut self) -> &mut LinExpr {
        match self {
            EalType::Base { expo, .. } | EalType::Arrow { expo, .. } => expo,
        }
    }

    /// Adds `e` to the outermost exponent.
    pub fn bang(&self, e: &LinExpr) -> EalType {
        let mut t = self.clone();
        let ex = t.expo_mut();
        *ex = ex.plus(e);
        t
    }

    pub fn bang_var(&self, v: BoxVar) -> EalType {
        self.bang(&LinExpr::var(v))
    }

    pub fn strip_outer(&self) -> EalType {
        let mut t = self.clone();
        *t.expo_mut() = LinExpr::zero();
        t
    }

    pub fn lolli(left: EalType, right: EalType) -> EalType {
        EalType::Arrow { expo: LinExpr::zero(), left: Box::new(left), right: Box::new(right) }
    }

    pub fn erase(&self) -> SimpleType {
        match self {
            EalType::Base { atom, .. } => {
                if atom == "o" {
                    SimpleType::Base
                } else {
                    SimpleType::Var(atom.clone())
                }
            }
            EalType::Arrow { left, right, .. } => SimpleType::arrow(left.erase(), right.erase()),
        }
    }

    pub fn vars(&self) -> BTreeSet<BoxVar> {
        let mut out: BTreeSet<BoxVar> = self.expo().vars().collect();
        if let EalType::Arrow { left, right, .. } = self {
            out.extend(left.vars());
            out.extend(right.vars());
        }
        out
    }

    pub fn instantiate(&self, x: &Valuation) -> Result<Formula, EalError> {
        let n = self.expo().eval(x);
        if n < 0 {
            return Err(EalError::NegativeExponent(self.expo().to_string()));
        }
        let inner = match self {
            EalType::Base { atom, .. } => Formula::Atom(atom.clone()),
            EalType::Arrow { left, right, .. } => Formula::lolli(left.instantiate(x)?, right.instantiate(x)?),
        };
        Ok(Formula::bangs(n as usize, inner))
    }

    /// Rows fixing every exponent so that the type instantiates to `f`.
    pub fn pin_rows(&self, f: &Formula) -> Result<Vec<(LinExpr, i64)>, EalError> {
        let mut rows = Vec::new();
        self.pin_into(f, &mut rows)?;
        Ok(rows)
    }

    fn pin_into(&self, f: &Formula, rows: &mut Vec<(LinExpr, i64)>) -> Result<(), EalError> {
        let (k, core) = f.strip_bangs();
        rows.push((self.expo().clone(), k as i64));
        match (self, core) {
            (EalType::Base { atom, .. }, Formula::Atom(a)) if atom == a => Ok(()),
            (EalType::Arrow { left, right, .. }, Formula::Lolli(l, r)) => {
                left.pin_into(l, rows)?;
                right.pin_into(r, rows)
            }
            _ => Err(EalError::ShapeMismatch(self.to_string(), f.to_string())),
        }
    }

    /// Short notation used in traces: `b3+b2(b1(p8 -o p9) -o p10)`.
    pub fn short(&self) -> String {
        self.short_in(true)
    }

    fn short_in(&self, top: bool) -> String {
        match self {
            EalType::Base { expo, atom } => {
                if atom == "o" {
                    if expo.is_zero() { "o".into() } else { expo.to_string() }
                } else if expo.is_zero() {
                    atom.clone()
                } else {
                    format!("!^{{{expo}}}{atom}")
                }
            }
            EalType::Arrow { expo, left, right } => {
                let inner = format!("{} -o {}", left.short_in(false), right.short_in(true));
                if expo.is_zero() {
                    if top { inner } else { format!("({inner})") }
                } else {
                    format!("{expo}({inner})")
                }
            }
        }
    }
}

impl fmt::Display for EalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = |e: &LinExpr| if e.is_zero() { String::new() } else { format!("!^{{{e}}}") };
        match self {
            EalType::Base { expo, atom } => write!(f, "{}{atom}", prefix(expo)),
            EalType::Arrow { expo, left, right } => {
                let l = if matches!(**left, EalType::Arrow { ref expo, .. } if expo.is_zero()) {
                    format!("({left})")
                } else {
                    left.to_string()
                };
                if expo.is_zero() {
                    write!(f, "{l} -o {right}")
                } else {
                    write!(f, "{}({l} -o {right})", prefix(expo))
                }
            }
        }
    }
}

/// Parses the canonical text of a general type.
pub fn parse_eal_type(text: &str) -> Result<EalType, SyntaxError> {
    fn arrow(c: &mut Cursor) -> Result<EalType, SyntaxError> {
        let a = unary(c)?;
        if c.eat_str("-o") || c.eat('⊸') {
            Ok(EalType::lolli(a, arrow(c)?))
        } else {
            Ok(a)
        }
    }
    fn unary(c: &mut Cursor) -> Result<EalType, SyntaxError> {
        if c.eat_str("!^{") {
            let e = lin_expr(c)?;
            c.expect('}')?;
            let t = unary(c)?;
            return Ok(t.bang(&e));
        }
        if c.eat('(') {
            let t = arrow(c)?;
            c.expect(')')?;
            return Ok(t);
        }
        let id = c.ident()?;
        Ok(EalType::Base { expo: LinExpr::zero(), atom: id })
    }
    let mut c = Cursor::new(text);
    let t = arrow(&mut c)?;
    if !c.at_end() {
        return Err(c.err("trailing input"));
    }
    Ok(t)
}

/// Concrete EAL formula. `Meta` are unification variables printed A, B, ...
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    Meta(u32),
    Bang(Box<Formula>),
    Lolli(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn o() -> Formula {
        Formula::Atom("o".into())
    }

    pub fn bang(f: Formula) -> Formula {
        Formula::Bang(Box::new(f))
    }

    pub fn bangs(n: usize, mut f: Formula) -> Formula {
        for _ in 0..n {
            f = Formula::bang(f);
        }
        f
    }

    pub fn lolli(a: Formula, b: Formula) -> Formula {
        Formula::Lolli(Box::new(a), Box::new(b))
    }

    pub fn strip_bangs(&self) -> (usize, &Formula) {
        let mut n = 0;
        let mut f = self;
        while let Formula::Bang(g) = f {
            n += 1;
            f = g;
        }
        (n, f)
    }

    /// Erasure to a simple type. Metavariables become uppercase type variables.
    pub fn erase(&self) -> SimpleType {
        match self {
            Formula::Atom(a) if a == "o" => SimpleType::Base,
            Formula::Atom(a) => SimpleType::Var(a.clone()),
            Formula::Meta(m) => SimpleType::Var(meta_name(*m)),
            Formula::Bang(f) => f.erase(),
            Formula::Lolli(a, b) => SimpleType::arrow(a.erase(), b.erase()),
        }
    }

    pub fn metas(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let Formula::Meta(m) = f {
                out.insert(*m);
            }
        });
        out
    }

    pub fn walk(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Bang(g) => g.walk(f),
            Formula::Lolli(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            _ => {}
        }
    }

    pub fn subst_metas(&self, s: &BTreeMap<u32, Formula>) -> Formula {
        match self {
            Formula::Meta(m) => s.get(m).cloned().unwrap_or_else(|| self.clone()),
            Formula::Atom(_) => self.clone(),
            Formula::Bang(f) => Formula::bang(f.subst_metas(s)),
            Formula::Lolli(a, b) => Formula::lolli(a.subst_metas(s), b.subst_metas(s)),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::Bang(f) => 1 + f.size(),
            Formula::Lolli(a, b) => 1 + a.size() + b.size(),
            _ => 1,
        }
    }

    /// Renames metavariables to 0, 1, ... in order of first appearance.
    pub fn canonical(&self) -> Formula {
        let mut order = Vec::new();
        self.walk(&mut |f| {
            if let Formula::Meta(m) = f {
                if !order.contains(m) {
                    order.push(*m);
                }
            }
        });
        let s = order.iter().enumerate().map(|(i, m)| (*m, Formula::Meta(i as u32))).collect();
        self.subst_metas(&s)
    }
}

pub fn meta_name(m: u32) -> String {
    let c = (b'A' + (m % 26) as u8) as char;
    if m < 26 {
        c.to_string()
    } else {
        format!("{c}{}", m / 26)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Meta(m) => write!(f, "{}", meta_name(*m)),
            Formula::Bang(g) => {
                if matches!(**g, Formula::Lolli(..)) {
                    write!(f, "!({g})")
                } else {
                    write!(f, "!{g}")
                }
            }
            Formula::Lolli(a, b) => {
                if matches!(**a, Formula::Lolli(..)) {
                    write!(f, "({a}) -o {b}")
                } else {
                    write!(f, "{a} -o {b}")
                }
            }
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, SyntaxError> {
    let mut c = Cursor::new(text);
    let f = formula(&mut c)?;
    if !c.at_end() {
        return Err(c.err("trailing input"));
    }
    Ok(f)
}

pub(crate) fn formula(c: &mut Cursor) -> Result<Formula, SyntaxError> {
    let a = formula_unary(c)?;
    if c.eat_str("-o") || c.eat('⊸') {
        Ok(Formula::lolli(a, formula(c)?))
    } else {
        Ok(a)
    }
}

fn formula_unary(c: &mut Cursor) -> Result<Formula, SyntaxError> {
    if c.eat('!') {
        return Ok(Formula::bang(formula_unary(c)?));
    }
    if c.eat('(') {
        let f = formula(c)?;
        c.expect(')')?;
        return Ok(f);
    }
    match c.peek() {
        Some(ch) if is_ident_start(ch) => {
            let start = c.pos;
            while c.pos < c.chars.len() && is_ident_char(c.chars[c.pos]) {
                c.pos += 1;
            }
            let id: String = c.chars[start..c.pos].iter().collect();
            if ch.is_ascii_uppercase() {
                let k = (ch as u8 - b'A') as u32;
                let rest = &id[1..];
                let q: u32 = if rest.is_empty() { 0 } else { rest.parse().map_err(|_| c.err("bad metavariable"))? };
                Ok(Formula::Meta(k + 26 * q))
            } else {
                Ok(Formula::Atom(id))
            }
        }
        _ => Err(c.err("expected formula")),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EalError {
    #[error("type skeletons differ")]
    SkeletonMismatch,
    #[error("exponent {0} evaluates below zero")]
    NegativeExponent(String),
    #[error("{0} does not have the shape of {1}")]
    ShapeMismatch(String, String),
}

/// P: fresh general type over a simple type, outermost variable first.
pub fn proc_p(ty: &SimpleType, gen: &mut VarGen) -> EalType {
    let p = LinExpr::var(gen.fresh(Tag::P));
    match ty {
        SimpleType::Base => EalType::Base { expo: p, atom: "o".into() },
        SimpleType::Var(v) => EalType::Base { expo: p, atom: v.clone() },
        SimpleType::Arrow(a, b) => {
            let l = proc_p(a, gen);
            let r = proc_p(b, gen);
            EalType::Arrow { expo: p, left: Box::new(l), right: Box::new(r) }
        }
    }
}

/// U: rows equating the exponents of consecutive types position-wise.
/// Each returned expression is required to be 0.
pub fn unify_u(types: &[&EalType]) -> Result<Vec<LinExpr>, EalError> {
    let mut out = Vec::new();
    for w in types.windows(2) {
        if w[0].erase() != w[1].erase() {
            return Err(EalError::SkeletonMismatch);
        }
    }
    fn go(types: &[&EalType], out: &mut Vec<LinExpr>) {
        for w in types.windows(2) {
            out.push(w[0].expo().minus(w[1].expo()));
        }
        if let EalType::Arrow { .. } = types[0] {
            let lefts: Vec<&EalType> = types
                .iter()
                .map(|t| match t {
                    EalType::Arrow { left, .. } => &**left,
                    _ => unreachable!(),
                })
                .collect();
            let rights: Vec<&EalType> = types
                .iter()
                .map(|t| match t {
                    EalType::Arrow { right, .. } => &**right,
                    _ => unreachable!(),
                })
                .collect();
            go(&lefts, out);
            go(&rights, out);
        }
    }
    if types.len() >= 2 {
        go(types, &mut out);
    }
    Ok(out)
}

/// C: contraction of several occurrences of one variable.
pub fn contract_c(types: &[&EalType]) -> Result<Vec<(LinExpr, Kind)>, EalError> {
    if types.len() <= 1 {
        return Ok(Vec::new());
    }
    let mut out = vec![(types[0].expo().clone(), Kind::Ge1)];
    out.extend(unify_u(types)?.into_iter().map(|e| (e, Kind::Eq0)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simple::parse_simple_type;

    #[test]
    fn p_allocates_outer_first() {
        let mut g = VarGen::default();
        let t = proc_p(&parse_simple_type("(o -> o) -> o").unwrap(), &mut g);
        assert_eq!(t.short(), "p1(p2(p3 -o p4) -o p5)");
        assert_eq!(t.to_string(), "!^{p1}(!^{p2}(!^{p3}o -o !^{p4}o) -o !^{p5}o)");
    }

    #[test]
    fn general_types_round_trip() {
        for s in ["!^{n1+n5}(!^{p2}o -o !^{p3}o)", "!^{p1}o", "(o -o o) -o o", "!^{b3-p2}a"] {
            let t = parse_eal_type(s).unwrap();
            assert_eq!(parse_eal_type(&t.to_string()).unwrap(), t);
        }
    }

    #[test]
    fn u_emits_outer_then_left_then_right() {
        let a = parse_eal_type("!^{p1}(!^{p2}o -o !^{p3}o)").unwrap();
        let b = parse_eal_type("!^{p4}(!^{p5}o -o !^{p6}o)").unwrap();
        let rows: Vec<String> = unify_u(&[&a, &b]).unwrap().iter().map(|e| e.to_string()).collect();
        assert_eq!(rows, ["p1-p4", "p2-p5", "p3-p6"]);
    }

    #[test]
    fn formulas_print_and_parse() {
        for s in ["!(a -o a) -o !(a -o a)", "!!o", "(A -o B) -o !A", "!(!o -o !o)"] {
            assert_eq!(parse_formula(s).unwrap().to_string(), s);
        }
    }

    #[test]
    fn c_of_single_type_is_empty() {
        let a = parse_eal_type("!^{p1}o").unwrap();
        assert!(contract_c(&[&a]).unwrap().is_empty());
    }
}
