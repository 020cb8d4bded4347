//! Decoration synthesis: the S rules, boxing, product union and the
//! top-level call.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::eal::{contract_c, proc_p, unify_u, BoxVar, EalType, LinExpr, Tag, VarGen};
use crate::lambda::{OccId, Term};
use crate::simple::{annotate, principal_type, SimpleType, SimpleTypeError, TypedNode, TypedTree};
use crate::solver::{ConstraintId, ConstraintStore, Kind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseEntry {
    pub var: String,
    pub occ: OccId,
    pub ty: EalType,
}

pub type Base = Vec<BaseEntry>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CriticalPoint {
    pub cid: ConstraintId,
    pub fvos: Vec<(String, OccId)>,
    /// root of the application the point sits on
    pub root: OccId,
}

pub type Slice = BTreeSet<CriticalPoint>;
/// Slices iterate ordered by their smallest constraint id.
pub type SliceSet = BTreeSet<Slice>;

#[derive(Debug, Clone)]
pub struct SynthResult {
    pub ty: EalType,
    pub base: Base,
    pub constraints: Vec<ConstraintId>,
    pub cpts: SliceSet,
}

/// One box introduced by boxing: covers the subtree at `at` except the
/// subtrees rooted at `excluded`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxRecord {
    pub var: BoxVar,
    pub at: OccId,
    pub excluded: Vec<OccId>,
}

impl BoxRecord {
    pub fn covers(&self, u: &OccId) -> bool {
        self.at.is_prefix_of(u) && !self.excluded.iter().any(|e| e.is_prefix_of(u))
    }
}

/// Snapshot around one boxing-wrapper call.
#[derive(Debug, Clone)]
pub struct BoxingEvent {
    pub store_before: ConstraintStore,
    pub store_after: ConstraintStore,
    pub base_before: Base,
    pub gamma_before: EalType,
    pub base_after: Base,
    pub gamma_after: EalType,
    pub fresh: Vec<BoxVar>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    pub trace: bool,
    pub record_boxing: bool,
    pub check_invariants: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    /// slices mentioning an abstracted variable in some but not all lists
    pub partial_slices: usize,
    pub violations: Vec<String>,
}

pub fn product_union(c1: &SliceSet, c2: &SliceSet) -> SliceSet {
    if c1.is_empty() {
        return c2.clone();
    }
    if c2.is_empty() {
        return c1.clone();
    }
    let mut out = SliceSet::new();
    let mut it = c1.iter();
    let first = it.next().unwrap();
    out.insert(first.clone());
    for s in c2 {
        out.insert(first.union(s).cloned().collect());
    }
    let rest: SliceSet = it.cloned().collect();
    out.extend(product_union(&rest, c2));
    out
}

pub struct Session {
    pub gen: VarGen,
    pub store: ConstraintStore,
    pub boxes: Vec<BoxRecord>,
    pub diagnostics: Diagnostics,
    pub trace: Vec<String>,
    pub boxing_events: Vec<BoxingEvent>,
    /// synthesized type of every subterm, before any enclosing boxing
    pub node_types: HashMap<OccId, EalType>,
    opts: Options,
    depth: usize,
}

fn fmt_base(base: &Base) -> String {
    let items: Vec<String> = base.iter().map(|e| format!("{}: {}", e.var, e.ty.short())).collect();
    format!("{{{}}}", items.join(", "))
}

pub fn fmt_slice(s: &Slice) -> String {
    let cps: Vec<String> = s
        .iter()
        .map(|cp| {
            let f: Vec<String> = cp.fvos.iter().map(|(n, o)| format!("{n}@{o}")).collect();
            format!("({}, [{}])", cp.cid, f.join(", "))
        })
        .collect();
    format!("{{{}}}", cps.join(", "))
}

fn fmt_cpts(c: &SliceSet) -> String {
    let v: Vec<String> = c.iter().map(fmt_slice).collect();
    format!("{{{}}}", v.join("; "))
}

struct Rel<'a>(&'a ConstraintStore, ConstraintId);

impl fmt::Display for Rel<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.0.get(self.1);
        match c.kind {
            Kind::Eq0 => write!(f, "{}: {} = 0", c.id, c.expr),
            Kind::Ge1 => write!(f, "{}: {} >= 1", c.id, c.expr),
            Kind::Pin(k) => write!(f, "{}: {} = {k}", c.id, c.expr),
        }
    }
}

impl Session {
    pub fn new(opts: Options) -> Self {
        Session {
            gen: VarGen::default(),
            store: ConstraintStore::new(),
            boxes: Vec::new(),
            diagnostics: Diagnostics::default(),
            trace: Vec::new(),
            boxing_events: Vec::new(),
            node_types: HashMap::new(),
            opts,
            depth: 0,
        }
    }

    fn log(&mut self, line: impl FnOnce(&Self) -> String) {
        if self.opts.trace {
            let s = line(self);
            self.trace.push(format!("{}{}", "  ".repeat(self.depth), s));
        }
    }

    fn fmt_ids(&self, ids: &[ConstraintId]) -> String {
        let v: Vec<String> = ids.iter().map(|i| Rel(&self.store, *i).to_string()).collect();
        format!("{{{}}}", v.join(", "))
    }

    fn fmt_result(&self, r: &SynthResult) -> String {
        format!("= <{}, {}, {}, {}>", r.ty.short(), fmt_base(&r.base), self.fmt_ids(&r.constraints), fmt_cpts(&r.cpts))
    }

    fn add_rows(&mut self, rows: Vec<(LinExpr, Kind)>) -> Vec<ConstraintId> {
        rows.into_iter().map(|(e, k)| self.store.add(e, k)).collect()
    }

    /// B: one fresh c per slice, banging every entry outside the slice and
    /// the type, and subtracting c from the slice's constraints.
    pub fn box_script(&mut self, at: &OccId, mut base: Base, mut gamma: EalType, cpts: &SliceSet) -> (Base, EalType) {
        let before = if self.opts.trace { Some((fmt_base(&base), gamma.short())) } else { None };
        for sl in cpts {
            let c = self.gen.fresh(Tag::C);
            let inside: BTreeSet<&OccId> = sl.iter().flat_map(|cp| cp.fvos.iter().map(|(_, o)| o)).collect();
            for e in base.iter_mut() {
                if !inside.contains(&e.occ) {
                    e.ty = e.ty.bang_var(c);
                }
            }
            gamma = gamma.bang_var(c);
            for cp in sl {
                self.store.subtract_var(cp.cid, c);
            }
            self.boxes.push(BoxRecord { var: c, at: at.clone(), excluded: sl.iter().map(|cp| cp.root.clone()).collect() });
        }
        if let Some((b, g)) = before {
            let (b2, g2) = (fmt_base(&base), gamma.short());
            self.log(|_| format!("B({b}, {g}, {}) = <{b2}, {g2}>", fmt_cpts(cpts)));
        }
        (base, gamma)
    }

    /// The boxing wrapper: identity on variables, otherwise B followed by
    /// a fresh outer box b.
    pub fn boxing_wrapper(&mut self, subject: &TypedTree, base: Base, gamma: EalType, cpts: &SliceSet) -> (Base, EalType) {
        let snapshot = if self.opts.record_boxing {
            Some((self.store.clone(), base.clone(), gamma.clone(), self.gen.count()))
        } else {
            None
        };
        let head = if self.opts.trace {
            format!("BB({}, {}, {}, {})", subject.term(), fmt_base(&base), gamma.short(), fmt_cpts(cpts))
        } else {
            String::new()
        };
        if subject.is_var() {
            self.log(|_| format!("{head} = <{}, {}>", fmt_base(&base), gamma.short()));
            if let Some((store, b, g, _)) = snapshot {
                self.boxing_events.push(BoxingEvent {
                    store_before: store,
                    store_after: self.store.clone(),
                    base_before: b.clone(),
                    gamma_before: g.clone(),
                    base_after: b,
                    gamma_after: g,
                    fresh: Vec::new(),
                });
            }
            return (base, gamma);
        }
        self.log(|_| head.clone());
        self.depth += 1;
        let (mut base, gamma) = self.box_script(&subject.path, base, gamma, cpts);
        self.depth -= 1;
        let b = self.gen.fresh(Tag::B);
        for e in base.iter_mut() {
            e.ty = e.ty.bang_var(b);
        }
        let gamma = gamma.bang_var(b);
        self.boxes.push(BoxRecord { var: b, at: subject.path.clone(), excluded: Vec::new() });
        self.log(|_| format!("= <{}, {}>", fmt_base(&base), gamma.short()));
        if let Some((store, b0, g0, count)) = snapshot {
            let fresh = (count + 1..=self.gen.count())
                .map(|i| {
                    let tag = if i == b.idx { Tag::B } else { Tag::C };
                    BoxVar { idx: i, tag }
                })
                .collect();
            self.boxing_events.push(BoxingEvent {
                store_before: store,
                store_after: self.store.clone(),
                base_before: b0,
                gamma_before: g0,
                base_after: base.clone(),
                gamma_after: gamma.clone(),
                fresh,
            });
        }
        (base, gamma)
    }

    pub fn synth(&mut self, t: &TypedTree) -> SynthResult {
        self.log(|_| format!("S {} : {}", t.term(), t.ty));
        self.depth += 1;
        let r = match &t.node {
            TypedNode::Var { name } => {
                let ty = proc_p(&t.ty, &mut self.gen);
                self.log(|_| format!("P({}) = {}", t.ty, ty.short()));
                SynthResult {
                    ty: ty.clone(),
                    base: vec![BaseEntry { var: name.clone(), occ: t.path.clone(), ty }],
                    constraints: Vec::new(),
                    cpts: SliceSet::new(),
                }
            }
            TypedNode::Abs { binder, binder_ty, body } => self.synth_abs(binder, binder_ty, body),
            TypedNode::App { fun, arg } => self.synth_app(fun, arg),
        };
        self.log(|s| s.fmt_result(&r));
        self.depth -= 1;
        self.node_types.insert(t.path.clone(), r.ty.clone());
        if self.opts.check_invariants {
            self.check_result(t, &r);
        }
        r
    }

    fn synth_abs(&mut self, x: &str, x_ty: &SimpleType, body: &TypedTree) -> SynthResult {
        let r = self.synth(body);
        let bound: BTreeSet<&OccId> = r.base.iter().filter(|e| e.var == x).map(|e| &e.occ).collect();
        if !bound.is_empty() {
            let mut consumed = SliceSet::new();
            for sl in &r.cpts {
                let hits = sl.iter().filter(|cp| cp.fvos.iter().any(|(_, o)| bound.contains(o))).count();
                if hits == sl.len() {
                    consumed.insert(sl.clone());
                } else if hits > 0 {
                    self.diagnostics.partial_slices += 1;
                }
            }
            let (b, gamma) = self.boxing_wrapper(body, r.base, r.ty, &r.cpts);
            let (xs, rest): (Vec<BaseEntry>, Vec<BaseEntry>) = b.into_iter().partition(|e| e.var == x);
            let tys: Vec<&EalType> = xs.iter().map(|e| &e.ty).collect();
            let rows = contract_c(&tys).expect("occurrences of one variable share a skeleton");
            let a3 = self.add_rows(rows);
            self.log(|s| format!("C({}) = {}", tys.iter().map(|t| t.short()).collect::<Vec<_>>().join(", "), s.fmt_ids(&a3)));
            let mut constraints = r.constraints;
            constraints.extend(a3);
            let cpts = r.cpts.difference(&consumed).cloned().collect();
            SynthResult { ty: EalType::lolli(xs[0].ty.clone(), gamma), base: rest, constraints, cpts }
        } else if body.is_app() {
            let fvos: Vec<(String, OccId)> = r.base.iter().map(|e| (e.var.clone(), e.occ.clone())).collect();
            let (b, g) = self.boxing_wrapper(body, r.base, r.ty, &r.cpts);
            let sigma_n = g.expo().clone();
            let gamma = g.strip_outer();
            let n = self.gen.fresh(Tag::N);
            let cid = self.store.add(sigma_n.minus(&LinExpr::var(n)), Kind::Eq0);
            let theta = proc_p(x_ty, &mut self.gen);
            self.log(|_| format!("P({x_ty}) = {}", theta.short()));
            let mut constraints = r.constraints;
            constraints.push(cid);
            let mut cpts = r.cpts;
            cpts.insert(Slice::from([CriticalPoint { cid, fvos, root: body.path.clone() }]));
            SynthResult { ty: EalType::lolli(theta, gamma.bang_var(n)), base: b, constraints, cpts }
        } else {
            let (b, g) = self.boxing_wrapper(body, r.base, r.ty, &r.cpts);
            let theta = proc_p(x_ty, &mut self.gen);
            self.log(|_| format!("P({x_ty}) = {}", theta.short()));
            SynthResult { ty: EalType::lolli(theta, g), base: b, constraints: r.constraints, cpts: r.cpts }
        }
    }

    fn synth_app(&mut self, fun: &TypedTree, arg: &TypedTree) -> SynthResult {
        let r1 = self.synth(fun);
        let r2 = self.synth(arg);
        let arg_fvos: Vec<(String, OccId)> = r2.base.iter().map(|e| (e.var.clone(), e.occ.clone())).collect();
        let fun_fvos: Vec<(String, OccId)> = r1.base.iter().map(|e| (e.var.clone(), e.occ.clone())).collect();
        let (b3, th3) = self.boxing_wrapper(arg, r2.base, r2.ty, &r2.cpts);
        let EalType::Arrow { expo: sigma_n, left: th1, right: gamma } = &r1.ty else {
            panic!("function position carries an arrow type");
        };
        let (first, second) = if arg.is_app() { (&th3, &**th1) } else { (&**th1, &th3) };
        let rows = unify_u(&[first, second]).expect("argument and domain share a skeleton");
        let a4 = self.add_rows(rows.into_iter().map(|e| (e, Kind::Eq0)).collect());
        self.log(|s| format!("U({}, {}) = {}", first.short(), second.short(), s.fmt_ids(&a4)));
        // a trivial 0 = 0 row is only kept when a critical point needs it
        let sn = if sigma_n.is_zero() && !fun.is_app() { None } else { Some(self.store.add(sigma_n.clone(), Kind::Eq0)) };
        let mut left = r1.cpts;
        if let (true, Some(sn)) = (fun.is_app(), sn) {
            left.insert(Slice::from([CriticalPoint { cid: sn, fvos: fun_fvos, root: fun.path.clone() }]));
        }
        let mut right = r2.cpts;
        if arg.is_app() {
            right.insert(Slice::from([CriticalPoint { cid: a4[0], fvos: arg_fvos, root: arg.path.clone() }]));
        }
        let mut constraints = r1.constraints;
        constraints.extend(r2.constraints);
        constraints.extend(a4);
        constraints.extend(sn);
        let mut base = r1.base;
        base.extend(b3);
        SynthResult { ty: (**gamma).clone(), base, constraints, cpts: product_union(&left, &right) }
    }

    fn check_result(&mut self, t: &TypedTree, r: &SynthResult) {
        if r.ty.erase() != t.ty {
            self.diagnostics.violations.push(format!("skeleton of {} differs at {}", r.ty, t.path));
        }
        let occ_types: std::collections::HashMap<OccId, SimpleType> = {
            let mut m = std::collections::HashMap::new();
            fn go(t: &TypedTree, m: &mut std::collections::HashMap<OccId, SimpleType>) {
                match &t.node {
                    TypedNode::Var { .. } => {
                        m.insert(t.path.clone(), t.ty.clone());
                    }
                    TypedNode::Abs { body, .. } => go(body, m),
                    TypedNode::App { fun, arg } => {
                        go(fun, m);
                        go(arg, m);
                    }
                }
            }
            go(t, &mut m);
            m
        };
        for e in &r.base {
            if occ_types.get(&e.occ) != Some(&e.ty.erase()) {
                self.diagnostics.violations.push(format!("base entry {} at {} has the wrong skeleton", e.var, e.occ));
            }
        }
        let fv = crate::lambda::fvo(&t.term());
        let got: Vec<(String, OccId)> = r.base.iter().map(|e| (e.var.clone(), e.occ.clone())).collect();
        if fv != got {
            self.diagnostics.violations.push(format!("base of {} is not its free occurrence list", t.path));
        }
        for sl in &r.cpts {
            let v: Vec<&CriticalPoint> = sl.iter().collect();
            for i in 0..v.len() {
                for j in i + 1..v.len() {
                    if v[i].root.is_prefix_of(&v[j].root) || v[j].root.is_prefix_of(&v[i].root) {
                        self.diagnostics.violations.push(format!(
                            "slice {} has two points on one path at {}",
                            fmt_slice(sl),
                            t.path
                        ));
                    }
                }
            }
        }
    }
}

/// Everything the top-level call produces.
#[derive(Debug, Clone)]
pub struct Inference {
    pub term: Term,
    pub sigma: SimpleType,
    pub tree: TypedTree,
    pub ty: EalType,
    /// one entry per free variable
    pub base: Vec<(String, EalType)>,
    /// one entry per free occurrence, after the final boxing
    pub occ_base: Base,
    pub store: ConstraintStore,
    pub boxes: Vec<BoxRecord>,
    pub diagnostics: Diagnostics,
    pub trace: Vec<String>,
    pub boxing_events: Vec<BoxingEvent>,
    pub node_types: HashMap<OccId, EalType>,
}

impl Session {
    pub fn synth_top(mut self, tree: &TypedTree) -> Inference {
        let r = self.synth(tree);
        let (b, ty) = self.boxing_wrapper(tree, r.base, r.ty, &r.cpts);
        let mut names: Vec<String> = Vec::new();
        for e in &b {
            if !names.contains(&e.var) {
                names.push(e.var.clone());
            }
        }
        let mut constraints = r.constraints;
        let mut base = Vec::new();
        for n in &names {
            let tys: Vec<&EalType> = b.iter().filter(|e| &e.var == n).map(|e| &e.ty).collect();
            let rows = contract_c(&tys).expect("occurrences of one variable share a skeleton");
            let ids = self.add_rows(rows);
            if tys.len() > 1 {
                self.log(|s| format!("C({}) = {}", tys.iter().map(|t| t.short()).collect::<Vec<_>>().join(", "), s.fmt_ids(&ids)));
            }
            constraints.extend(ids);
            base.push((n.clone(), tys[0].clone()));
        }
        let bs: Vec<BaseEntry> = base.iter().map(|(n, t)| BaseEntry { var: n.clone(), occ: OccId::root(), ty: t.clone() }).collect();
        self.log(|s| format!("= <{}, {}, {}>", ty.short(), fmt_base(&bs), s.fmt_ids(&constraints)));
        Inference {
            term: tree.term(),
            sigma: tree.ty.clone(),
            tree: tree.clone(),
            ty,
            base,
            occ_base: b,
            store: self.store,
            boxes: self.boxes,
            diagnostics: self.diagnostics,
            trace: self.trace,
            boxing_events: self.boxing_events,
            node_types: self.node_types,
        }
    }
}

/// Types the term (at `sigma` if given, else at its principal type) and
/// runs the top-level synthesis.
pub fn infer(term: &Term, sigma: Option<&SimpleType>, opts: Options) -> Result<Inference, SimpleTypeError> {
    let tree = match sigma {
        Some(s) => annotate(term, s)?,
        None => principal_type(term)?.1,
    };
    Ok(Session::new(opts).synth_top(&tree))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::parse_term;

    fn cp(id: u32) -> Slice {
        Slice::from([CriticalPoint { cid: ConstraintId(id), fvos: Vec::new(), root: OccId::root() }])
    }

    #[test]
    fn product_union_rules() {
        let a: SliceSet = [cp(1)].into();
        let b: SliceSet = [cp(2)].into();
        let c: SliceSet = [cp(3)].into();
        assert_eq!(product_union(&SliceSet::new(), &a), a);
        let ab = product_union(&a, &b);
        let union: Slice = cp(1).union(&cp(2)).cloned().collect();
        assert_eq!(ab, [cp(1), union, cp(2)].into());
        let two: SliceSet = [cp(1), cp(2)].into();
        assert_eq!(product_union(&two, &c).len(), 5);
    }

    #[test]
    fn identity_gets_one_outer_box() {
        let t = parse_term("\\x.x").unwrap();
        let inf = infer(&t, Some(&crate::simple::parse_simple_type("o -> o").unwrap()), Options::default()).unwrap();
        assert!(inf.store.is_empty());
        let EalType::Arrow { expo, left, right } = &inf.ty else { panic!() };
        assert_eq!(expo.len(), 1);
        assert_eq!(left, right);
    }
}
