//! Simple types, principal typing and annotation at a chosen instance.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::lambda::{Cursor, OccId, Step, SyntaxError, Term};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SimpleType {
    Base,
    Var(String),
    Arrow(Box<SimpleType>, Box<SimpleType>),
}

impl SimpleType {
    pub fn arrow(a: SimpleType, b: SimpleType) -> SimpleType {
        SimpleType::Arrow(Box::new(a), Box::new(b))
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        fn go(t: &SimpleType, out: &mut BTreeSet<String>) {
            match t {
                SimpleType::Base => {}
                SimpleType::Var(v) => {
                    out.insert(v.clone());
                }
                SimpleType::Arrow(a, b) => {
                    go(a, out);
                    go(b, out);
                }
            }
        }
        go(self, &mut out);
        out
    }

    /// Variables in order of first appearance.
    pub fn vars_in_order(&self) -> Vec<String> {
        let mut out = Vec::new();
        fn go(t: &SimpleType, out: &mut Vec<String>) {
            match t {
                SimpleType::Base => {}
                SimpleType::Var(v) => {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
                SimpleType::Arrow(a, b) => {
                    go(a, out);
                    go(b, out);
                }
            }
        }
        go(self, &mut out);
        out
    }

    pub fn apply(&self, s: &BTreeMap<String, SimpleType>) -> SimpleType {
        match self {
            SimpleType::Base => SimpleType::Base,
            SimpleType::Var(v) => s.get(v).cloned().unwrap_or_else(|| self.clone()),
            SimpleType::Arrow(a, b) => SimpleType::arrow(a.apply(s), b.apply(s)),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            SimpleType::Arrow(a, b) => 1 + a.size() + b.size(),
            _ => 1,
        }
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::Base => write!(f, "o"),
            SimpleType::Var(v) => write!(f, "{v}"),
            SimpleType::Arrow(a, b) => {
                if matches!(**a, SimpleType::Arrow(..)) {
                    write!(f, "({a}) -> {b}")
                } else {
                    write!(f, "{a} -> {b}")
                }
            }
        }
    }
}

pub fn parse_simple_type(text: &str) -> Result<SimpleType, SyntaxError> {
    fn arrow(c: &mut Cursor) -> Result<SimpleType, SyntaxError> {
        let a = atom(c)?;
        if c.eat_str("->") || c.eat('→') {
            Ok(SimpleType::arrow(a, arrow(c)?))
        } else {
            Ok(a)
        }
    }
    fn atom(c: &mut Cursor) -> Result<SimpleType, SyntaxError> {
        if c.eat('(') {
            let t = arrow(c)?;
            c.expect(')')?;
            return Ok(t);
        }
        let id = c.ident()?;
        if id == "o" {
            Ok(SimpleType::Base)
        } else if id.chars().next().is_some_and(|ch| ch.is_ascii_lowercase()) {
            Ok(SimpleType::Var(id))
        } else {
            Err(c.err("type variables are lowercase"))
        }
    }
    let mut c = Cursor::new(text);
    let t = arrow(&mut c)?;
    if !c.at_end() {
        return Err(c.err("trailing input"));
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimpleTypeError {
    #[error("term is not simply typable: {0}")]
    NotSimplyTypable(String),
    #[error("{target} is not an instance of the principal type {principal}")]
    NotAnInstance { principal: SimpleType, target: SimpleType },
}

/// A term whose every node carries its simple type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedTree {
    pub node: TypedNode,
    pub ty: SimpleType,
    pub path: OccId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypedNode {
    Var { name: String },
    Abs { binder: String, binder_ty: SimpleType, body: Box<TypedTree> },
    App { fun: Box<TypedTree>, arg: Box<TypedTree> },
}

impl TypedTree {
    pub fn term(&self) -> Term {
        match &self.node {
            TypedNode::Var { name } => Term::Var { name: name.clone(), occ: self.path.clone() },
            TypedNode::Abs { binder, body, .. } => Term::Abs { binder: binder.clone(), body: Box::new(body.term()) },
            TypedNode::App { fun, arg } => Term::App { fun: Box::new(fun.term()), arg: Box::new(arg.term()) },
        }
    }

    pub fn is_app(&self) -> bool {
        matches!(self.node, TypedNode::App { .. })
    }

    pub fn is_var(&self) -> bool {
        matches!(self.node, TypedNode::Var { .. })
    }

    fn map_types(&self, f: &impl Fn(&SimpleType) -> SimpleType) -> TypedTree {
        let node = match &self.node {
            TypedNode::Var { name } => TypedNode::Var { name: name.clone() },
            TypedNode::Abs { binder, binder_ty, body } => TypedNode::Abs {
                binder: binder.clone(),
                binder_ty: f(binder_ty),
                body: Box::new(body.map_types(f)),
            },
            TypedNode::App { fun, arg } => {
                TypedNode::App { fun: Box::new(fun.map_types(f)), arg: Box::new(arg.map_types(f)) }
            }
        };
        TypedTree { node, ty: f(&self.ty), path: self.path.clone() }
    }

    /// Types of the free variable occurrences, by name.
    pub fn free_var_types(&self) -> BTreeMap<String, SimpleType> {
        let mut out = BTreeMap::new();
        fn go(t: &TypedTree, bound: &mut Vec<String>, out: &mut BTreeMap<String, SimpleType>) {
            match &t.node {
                TypedNode::Var { name } => {
                    if !bound.contains(name) {
                        out.insert(name.clone(), t.ty.clone());
                    }
                }
                TypedNode::Abs { binder, body, .. } => {
                    bound.push(binder.clone());
                    go(body, bound, out);
                    bound.pop();
                }
                TypedNode::App { fun, arg } => {
                    go(fun, bound, out);
                    go(arg, bound, out);
                }
            }
        }
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn all_types(&self) -> Vec<SimpleType> {
        let mut out = vec![self.ty.clone()];
        match &self.node {
            TypedNode::Var { .. } => {}
            TypedNode::Abs { binder_ty, body, .. } => {
                out.push(binder_ty.clone());
                out.extend(body.all_types());
            }
            TypedNode::App { fun, arg } => {
                out.extend(fun.all_types());
                out.extend(arg.all_types());
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Ty {
    Meta(usize),
    Arrow(Box<Ty>, Box<Ty>),
}

#[derive(Default)]
struct Unifier {
    subst: Vec<Option<Ty>>,
}

impl Unifier {
    fn fresh(&mut self) -> Ty {
        self.subst.push(None);
        Ty::Meta(self.subst.len() - 1)
    }

    fn resolve(&self, t: &Ty) -> Ty {
        match t {
            Ty::Meta(m) => match &self.subst[*m] {
                Some(u) => self.resolve(u),
                None => t.clone(),
            },
            Ty::Arrow(a, b) => Ty::Arrow(Box::new(self.resolve(a)), Box::new(self.resolve(b))),
        }
    }

    fn occurs(&self, m: usize, t: &Ty) -> bool {
        match self.resolve(t) {
            Ty::Meta(n) => n == m,
            Ty::Arrow(a, b) => self.occurs(m, &a) || self.occurs(m, &b),
        }
    }

    fn unify(&mut self, a: &Ty, b: &Ty) -> Result<(), String> {
        let a = self.resolve(a);
        let b = self.resolve(b);
        match (a, b) {
            (Ty::Meta(m), Ty::Meta(n)) if m == n => Ok(()),
            (Ty::Meta(m), t) | (t, Ty::Meta(m)) => {
                if self.occurs(m, &t) {
                    return Err("occurs check failed".into());
                }
                self.subst[m] = Some(t);
                Ok(())
            }
            (Ty::Arrow(a1, b1), Ty::Arrow(a2, b2)) => {
                self.unify(&a1, &a2)?;
                self.unify(&b1, &b2)
            }
        }
    }
}

enum RawNode {
    Var(String),
    Abs(String, Ty, Box<Raw>),
    App(Box<Raw>, Box<Raw>),
}

struct Raw {
    node: RawNode,
    ty: Ty,
    path: OccId,
}

fn infer(t: &Term, path: OccId, env: &mut Vec<(String, Ty)>, free: &mut HashMap<String, Ty>, u: &mut Unifier) -> Result<Raw, String> {
    match t {
        Term::Var { name, .. } => {
            let ty = match env.iter().rev().find(|(n, _)| n == name) {
                Some((_, ty)) => ty.clone(),
                None => free.entry(name.clone()).or_insert_with(|| u.fresh()).clone(),
            };
            Ok(Raw { node: RawNode::Var(name.clone()), ty, path })
        }
        Term::Abs { binder, body } => {
            let a = u.fresh();
            env.push((binder.clone(), a.clone()));
            let b = infer(body, path.child(Step::Body), env, free, u);
            env.pop();
            let b = b?;
            let ty = Ty::Arrow(Box::new(a.clone()), Box::new(b.ty.clone()));
            Ok(Raw { node: RawNode::Abs(binder.clone(), a, Box::new(b)), ty, path })
        }
        Term::App { fun, arg } => {
            let f = infer(fun, path.child(Step::Fun), env, free, u)?;
            let x = infer(arg, path.child(Step::Arg), env, free, u)?;
            let r = u.fresh();
            u.unify(&f.ty, &Ty::Arrow(Box::new(x.ty.clone()), Box::new(r.clone())))
                .map_err(|e| format!("{e} at ({} {})", fun, arg))?;
            Ok(Raw { node: RawNode::App(Box::new(f), Box::new(x)), ty: r, path })
        }
    }
}

fn letter_name(i: usize) -> String {
    let letters: Vec<char> = ('a'..='z').filter(|&c| c != 'o').collect();
    let n = letters.len();
    if i < n {
        letters[i].to_string()
    } else {
        format!("{}{}", letters[i % n], i / n)
    }
}

struct Namer {
    names: HashMap<usize, String>,
    avoid: BTreeSet<String>,
    next: usize,
}

impl Namer {
    fn name(&mut self, m: usize) -> String {
        if let Some(n) = self.names.get(&m) {
            return n.clone();
        }
        loop {
            let cand = letter_name(self.next);
            self.next += 1;
            if !self.avoid.contains(&cand) {
                self.names.insert(m, cand.clone());
                return cand;
            }
        }
    }

    fn conv(&mut self, t: &Ty) -> SimpleType {
        match t {
            Ty::Meta(m) => SimpleType::Var(self.name(*m)),
            Ty::Arrow(a, b) => {
                let a = self.conv(a);
                SimpleType::arrow(a, self.conv(b))
            }
        }
    }
}

fn finish(raw: &Raw, u: &Unifier, namer: &mut Namer) -> TypedTree {
    let ty = namer.conv(&u.resolve(&raw.ty));
    let node = match &raw.node {
        RawNode::Var(n) => TypedNode::Var { name: n.clone() },
        RawNode::Abs(x, a, b) => {
            let binder_ty = namer.conv(&u.resolve(a));
            TypedNode::Abs { binder: x.clone(), binder_ty, body: Box::new(finish(b, u, namer)) }
        }
        RawNode::App(f, x) => TypedNode::App { fun: Box::new(finish(f, u, namer)), arg: Box::new(finish(x, u, namer)) },
    };
    TypedTree { node, ty, path: raw.path.clone() }
}

/// Principal simple type with the full decorated tree. Variables of the
/// result type are named a, b, ... in order of appearance; free variables
/// of the term get types as if bound outside.
pub fn principal_type(t: &Term) -> Result<(SimpleType, TypedTree), SimpleTypeError> {
    let mut u = Unifier::default();
    let mut free = HashMap::new();
    let raw = infer(t, OccId::root(), &mut Vec::new(), &mut free, &mut u).map_err(SimpleTypeError::NotSimplyTypable)?;
    let mut namer = Namer { names: HashMap::new(), avoid: BTreeSet::new(), next: 0 };
    let top = namer.conv(&u.resolve(&raw.ty));
    let tree = finish(&raw, &u, &mut namer);
    Ok((top, tree))
}

/// First-order matching of `pattern` against `target`.
pub fn match_type(pattern: &SimpleType, target: &SimpleType, s: &mut BTreeMap<String, SimpleType>) -> bool {
    match (pattern, target) {
        (SimpleType::Var(v), t) => match s.get(v) {
            Some(prev) => prev == t,
            None => {
                s.insert(v.clone(), t.clone());
                true
            }
        },
        (SimpleType::Base, SimpleType::Base) => true,
        (SimpleType::Arrow(a1, b1), SimpleType::Arrow(a2, b2)) => match_type(a1, a2, s) && match_type(b1, b2, s),
        _ => false,
    }
}

pub fn is_instance(target: &SimpleType, of: &SimpleType) -> bool {
    match_type(of, target, &mut BTreeMap::new())
}

/// Decorates `t` so that its root carries `target`, failing when `target`
/// is not an instance of the principal type.
pub fn annotate(t: &Term, target: &SimpleType) -> Result<TypedTree, SimpleTypeError> {
    let mut u = Unifier::default();
    let mut free = HashMap::new();
    let raw = infer(t, OccId::root(), &mut Vec::new(), &mut free, &mut u).map_err(SimpleTypeError::NotSimplyTypable)?;
    let mut namer = Namer { names: HashMap::new(), avoid: BTreeSet::new(), next: 0 };
    let principal = namer.conv(&u.resolve(&raw.ty));
    let mut s = BTreeMap::new();
    if !match_type(&principal, target, &mut s) {
        return Err(SimpleTypeError::NotAnInstance { principal, target: target.clone() });
    }
    // internal variables are renamed away from the target's letters
    let mut namer2 = Namer { names: namer.names.clone(), avoid: target.vars(), next: namer.next };
    namer2.avoid.extend(namer.names.values().cloned());
    let tree = finish(&raw, &u, &mut namer2);
    Ok(tree.map_types(&|ty| ty.apply(&s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::parse_term;

    #[test]
    fn principal_of_church_two() {
        let t = parse_term("\\x.\\y.(x (x y))").unwrap();
        let (ty, _) = principal_type(&t).unwrap();
        assert_eq!(ty.to_string(), "(a -> a) -> a -> a");
    }

    #[test]
    fn self_application_is_untypable() {
        let t = parse_term("\\x.(x x)").unwrap();
        assert!(matches!(principal_type(&t), Err(SimpleTypeError::NotSimplyTypable(_))));
    }

    #[test]
    fn annotate_checks_instance() {
        let t = parse_term("\\x.x").unwrap();
        let tree = annotate(&t, &parse_simple_type("o -> o").unwrap()).unwrap();
        assert_eq!(tree.ty.to_string(), "o -> o");
        assert!(annotate(&t, &parse_simple_type("o -> a").unwrap()).is_err());
    }

    #[test]
    fn type_syntax_round_trips() {
        for s in ["o", "a -> b", "(a -> a) -> a -> a", "((o -> o) -> o) -> o"] {
            assert_eq!(parse_simple_type(s).unwrap().to_string(), s);
        }
    }
}
