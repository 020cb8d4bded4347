//! Constraint store and a small bounded integer solver.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::eal::{parse_lin_expr, BoxVar, LinExpr, Valuation};

pub const DEFAULT_BOUND: u64 = 8;
const NODE_LIMIT: u64 = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    /// expr = 0
    Eq0,
    /// expr >= 1
    Ge1,
    /// expr = k, used when pinning a type to a concrete formula
    Pin(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConstraintId(pub u32);

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub id: ConstraintId,
    pub expr: LinExpr,
    pub kind: Kind,
}

impl Constraint {
    pub fn rhs(&self) -> i64 {
        match self.kind {
            Kind::Eq0 => 0,
            Kind::Ge1 => 1,
            Kind::Pin(k) => k,
        }
    }

    pub fn is_eq(&self) -> bool {
        !matches!(self.kind, Kind::Ge1)
    }

    pub fn holds(&self, x: &Valuation) -> bool {
        let v = self.expr.eval(x);
        if self.is_eq() {
            v == self.rhs()
        } else {
            v >= self.rhs()
        }
    }

    pub fn relation(&self) -> String {
        match self.kind {
            Kind::Eq0 => format!("{} = 0", self.expr.dump()),
            Kind::Ge1 => format!("{} >= 1", self.expr.dump()),
            Kind::Pin(k) => format!("{} = {k}", self.expr.dump()),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.id, self.relation())
    }
}

/// Parses one dump line, `C3: +b2 -p1 = 0`.
pub fn parse_constraint(line: &str) -> Result<Constraint, String> {
    let (id, rest) = line.split_once(':').ok_or("missing ':'")?;
    let id = id.trim().strip_prefix('C').and_then(|n| n.parse().ok()).ok_or("bad constraint id")?;
    let (expr, kind) = if let Some((e, r)) = rest.split_once(">=") {
        if r.trim() != "1" {
            return Err("only >= 1 is supported".into());
        }
        (e, Kind::Ge1)
    } else {
        let (e, r) = rest.split_once('=').ok_or("missing relation")?;
        let k: i64 = r.trim().parse().map_err(|_| "bad right-hand side")?;
        (e, if k == 0 { Kind::Eq0 } else { Kind::Pin(k) })
    };
    let expr = parse_lin_expr(expr.trim()).map_err(|e| e.to_string())?;
    Ok(Constraint { id: ConstraintId(id), expr, kind })
}

/// Ordered constraints with stable ids. The only mutation after insertion
/// is subtracting a box variable from a row.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintStore {
    rows: Vec<Constraint>,
}

impl ConstraintStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, expr: LinExpr, kind: Kind) -> ConstraintId {
        let id = ConstraintId(self.rows.len() as u32 + 1);
        self.rows.push(Constraint { id, expr, kind });
        id
    }

    pub fn get(&self, id: ConstraintId) -> &Constraint {
        &self.rows[id.0 as usize - 1]
    }

    pub fn subtract_var(&mut self, id: ConstraintId, v: BoxVar) {
        self.rows[id.0 as usize - 1].expr.add_term(v, -1);
    }

    pub fn iter(&self) -> impl Iterator<Item = &Constraint> {
        self.rows.iter()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn vars(&self) -> BTreeSet<BoxVar> {
        self.rows.iter().flat_map(|c| c.expr.vars()).collect()
    }

    pub fn dump(&self) -> Vec<String> {
        self.rows.iter().map(|c| c.to_string()).collect()
    }

    /// Rebuilds a store from dump lines; ids must be 1, 2, ... in order.
    pub fn from_dump<S: AsRef<str>>(lines: &[S]) -> Result<Self, String> {
        let mut s = ConstraintStore::new();
        for l in lines {
            let c = parse_constraint(l.as_ref())?;
            if c.id.0 as usize != s.rows.len() + 1 {
                return Err(format!("unexpected id {}", c.id));
            }
            s.rows.push(c);
        }
        Ok(s)
    }

    pub fn with_rows(&self, extra: &[(LinExpr, Kind)]) -> ConstraintStore {
        let mut s = self.clone();
        for (e, k) in extra {
            s.add(e.clone(), *k);
        }
        s
    }
}

/// True iff every constraint holds; variables absent from `x` count as 0.
pub fn check_solution(store: &ConstraintStore, x: &Valuation) -> bool {
    store.iter().all(|c| c.holds(x))
}

pub type Combo = BTreeMap<ConstraintId, i64>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroStep {
    /// combination of equality rows summing to a same-sign expression = 0
    pub combo: Vec<(ConstraintId, i64)>,
    pub vars: Vec<BoxVar>,
}

/// Re-checkable proof that a store has no nonnegative solution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub zero_steps: Vec<ZeroStep>,
    /// row combination that becomes impossible once zeroed variables vanish
    pub clash: Vec<(ConstraintId, i64)>,
    /// the inequality in the clash, if any
    pub ge: Option<ConstraintId>,
    #[serde(with = "expr_text")]
    pub derived: LinExpr,
    pub rhs: i64,
}

mod expr_text {
    use super::*;
    pub fn serialize<S: serde::Serializer>(e: &LinExpr, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(e)
    }
    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<LinExpr, D::Error> {
        let s = String::deserialize(d)?;
        parse_lin_expr(&s).map_err(serde::de::Error::custom)
    }
}

impl Certificate {
    /// The equality derived from the zero steps that contradicts the
    /// inequality, as a (derived equality, inequality) pair.
    pub fn pair(&self, store: &ConstraintStore) -> (String, String) {
        let zeros: Vec<String> = self
            .zero_steps
            .iter()
            .map(|z| format!("{} = 0", combine(store, &z.combo).0))
            .collect();
        let other = match self.ge {
            Some(g) => store.get(g).to_string(),
            None => format!("{} = {}", self.derived, self.rhs),
        };
        (zeros.join(", "), other)
    }

    pub fn summary(&self, store: &ConstraintStore) -> String {
        let zeros: Vec<String> = self
            .zero_steps
            .iter()
            .map(|z| {
                let (e, _) = combine(store, &z.combo);
                format!("{e} = 0")
            })
            .collect();
        match self.ge {
            Some(g) => format!("{} contradicts {}", zeros.join(", "), store.get(g)),
            None => format!("{} with {} = {}", zeros.join(", "), self.derived, self.rhs),
        }
    }
}

fn combine(store: &ConstraintStore, combo: &[(ConstraintId, i64)]) -> (LinExpr, i64) {
    let mut e = LinExpr::zero();
    let mut k = 0;
    for (id, c) in combo {
        let row = store.get(*id);
        e = e.plus(&row.expr.scale(*c));
        k += row.rhs() * c;
    }
    (e, k)
}

/// Re-derives the contradiction from the store alone.
pub fn verify_certificate(store: &ConstraintStore, cert: &Certificate) -> bool {
    let mut zero: BTreeSet<BoxVar> = BTreeSet::new();
    let strip = |e: &LinExpr, zero: &BTreeSet<BoxVar>| {
        let mut r = e.clone();
        for v in zero {
            let c = r.coeff(*v);
            r.add_term(*v, -c);
        }
        r
    };
    let only_eq = |combo: &[(ConstraintId, i64)]| combo.iter().all(|(id, _)| (id.0 as usize) <= store.len() && store.get(*id).is_eq());
    for z in &cert.zero_steps {
        if !only_eq(&z.combo) {
            return false;
        }
        let (e, k) = combine(store, &z.combo);
        let e = strip(&e, &zero);
        if k != 0 || e.is_zero() {
            return false;
        }
        let pos = e.terms().all(|(_, c)| c > 0);
        let neg = e.terms().all(|(_, c)| c < 0);
        if !(pos || neg) {
            return false;
        }
        let vs: BTreeSet<BoxVar> = e.vars().collect();
        if vs != z.vars.iter().copied().collect() {
            return false;
        }
        zero.extend(vs);
    }
    if cert.clash.iter().any(|(id, _)| id.0 as usize > store.len() || id.0 == 0) {
        return false;
    }
    let (e, k) = combine(store, &cert.clash);
    let e = strip(&e, &zero);
    if e != cert.derived || k != cert.rhs {
        return false;
    }
    match cert.ge {
        Some(g) => {
            let ges: Vec<_> = cert.clash.iter().filter(|(id, _)| !store.get(*id).is_eq()).collect();
            ges.len() == 1 && ges[0] == &(g, 1) && k >= 1 && e.terms().all(|(_, c)| c <= 0)
        }
        None => {
            only_eq(&cert.clash)
                && ((e.terms().all(|(_, c)| c >= 0) && k < 0) || (e.terms().all(|(_, c)| c <= 0) && k > 0))
        }
    }
}

#[derive(Debug, Clone)]
struct Row {
    expr: LinExpr,
    rhs: i64,
    eq: bool,
    combo: Combo,
}

impl Row {
    fn add_scaled(&mut self, other: &Row, k: i64) {
        self.expr = self.expr.plus(&other.expr.scale(k));
        self.rhs += other.rhs * k;
        for (id, c) in &other.combo {
            let e = self.combo.entry(*id).or_insert(0);
            *e += c * k;
            if *e == 0 {
                self.combo.remove(id);
            }
        }
    }

    fn drop_var(&mut self, v: BoxVar) {
        let c = self.expr.coeff(v);
        self.expr.add_term(v, -c);
    }
}

/// Result of Gaussian elimination on the equality rows.
#[derive(Debug, Clone)]
pub struct Elimination {
    /// `v = expr + k`, expressed over free variables only
    pub substitution: Vec<(BoxVar, LinExpr, i64)>,
    pub zeroed: Vec<BoxVar>,
    /// residual rows: (expr, rhs, is_equality)
    pub residual: Vec<(LinExpr, i64, bool)>,
    pub contradiction: Option<Certificate>,
}

impl Elimination {
    pub fn free_vars(&self, store: &ConstraintStore) -> BTreeSet<BoxVar> {
        let mut all = store.vars();
        for (v, _, _) in &self.substitution {
            all.remove(v);
        }
        for v in &self.zeroed {
            all.remove(v);
        }
        all
    }

    /// Extends an assignment of the free variables to all variables.
    pub fn extend(&self, free: &Valuation) -> BTreeMap<BoxVar, i64> {
        let mut out: BTreeMap<BoxVar, i64> = free.iter().map(|(v, x)| (*v, *x as i64)).collect();
        for v in &self.zeroed {
            out.insert(*v, 0);
        }
        for (v, e, k) in &self.substitution {
            out.insert(*v, e.eval(free) + k);
        }
        out
    }
}

fn ordered_combo(c: &Combo) -> Vec<(ConstraintId, i64)> {
    c.iter().map(|(a, b)| (*a, *b)).collect()
}

pub fn eliminate_equalities(store: &ConstraintStore) -> Elimination {
    let mut rows: Vec<Row> = store
        .iter()
        .map(|c| Row { expr: c.expr.clone(), rhs: c.rhs(), eq: c.is_eq(), combo: BTreeMap::from([(c.id, 1)]) })
        .collect();
    let mut subst: Vec<(BoxVar, LinExpr, i64)> = Vec::new();
    let mut zeroed: Vec<BoxVar> = Vec::new();
    let mut zero_steps: Vec<ZeroStep> = Vec::new();
    let finish = |subst: Vec<(BoxVar, LinExpr, i64)>, zeroed: Vec<BoxVar>, rows: Vec<Row>, cert: Option<Certificate>| {
        let mut sub = subst;
        // back-substitute so every right-hand side mentions free variables only
        for i in (0..sub.len()).rev() {
            let (later, earlier) = (sub[i + 1..].to_vec(), &mut sub[i]);
            for (w, e, k) in later {
                let c = earlier.1.coeff(w);
                if c != 0 {
                    earlier.1.add_term(w, -c);
                    earlier.1 = earlier.1.plus(&e.scale(c));
                    earlier.2 += k * c;
                }
            }
        }
        Elimination {
            substitution: sub,
            zeroed,
            residual: rows.into_iter().map(|r| (r.expr, r.rhs, r.eq)).collect(),
            contradiction: cert,
        }
    };
    loop {
        // contradictions
        for r in &rows {
            let pos = r.expr.terms().all(|(_, c)| c >= 0);
            let neg = r.expr.terms().all(|(_, c)| c <= 0);
            let bad = if r.eq { (pos && r.rhs < 0) || (neg && r.rhs > 0) } else { neg && r.rhs >= 1 };
            if bad {
                let ge = if r.eq { None } else { r.combo.iter().find(|(id, _)| !store.get(**id).is_eq()).map(|(id, _)| *id) };
                let cert = Certificate {
                    zero_steps: zero_steps.clone(),
                    clash: ordered_combo(&r.combo),
                    ge,
                    derived: r.expr.clone(),
                    rhs: r.rhs,
                };
                return finish(subst, zeroed, rows, Some(cert));
            }
        }
        rows.retain(|r| !(r.eq && r.expr.is_zero() && r.rhs == 0));
        // zero forcing
        if let Some(i) = rows.iter().position(|r| {
            r.eq && r.rhs == 0
                && !r.expr.is_zero()
                && (r.expr.terms().all(|(_, c)| c > 0) || r.expr.terms().all(|(_, c)| c < 0))
        }) {
            let r = rows.remove(i);
            let vs: Vec<BoxVar> = r.expr.vars().collect();
            for v in &vs {
                for row in rows.iter_mut() {
                    row.drop_var(*v);
                }
                for (_, e, _) in subst.iter_mut() {
                    let c = e.coeff(*v);
                    e.add_term(*v, -c);
                }
            }
            zero_steps.push(ZeroStep { combo: ordered_combo(&r.combo), vars: vs.clone() });
            zeroed.extend(vs);
            continue;
        }
        // pivot on the largest variable with a unit coefficient
        let mut best: Option<(BoxVar, usize)> = None;
        for (i, r) in rows.iter().enumerate() {
            if !r.eq {
                continue;
            }
            for (v, c) in r.expr.terms() {
                if c.abs() == 1 && best.is_none_or(|(b, _)| v > b) {
                    best = Some((v, i));
                }
            }
        }
        let Some((v, i)) = best else { break };
        let piv = rows.remove(i);
        let c = piv.expr.coeff(v);
        for row in rows.iter_mut() {
            let a = row.expr.coeff(v);
            if a != 0 {
                row.add_scaled(&piv, -a * c);
            }
        }
        // v = c * (rhs - rest)
        let mut rest = piv.expr.clone();
        rest.add_term(v, -c);
        subst.push((v, rest.scale(-c), piv.rhs * c));
    }
    finish(subst, zeroed, rows, None)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Sat(Valuation),
    Unsat(Certificate),
    Unknown(u64),
}

impl SolveOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            SolveOutcome::Sat(_) => "sat",
            SolveOutcome::Unsat(_) => "unsat",
            SolveOutcome::Unknown(_) => "unknown",
        }
    }

    pub fn is_sat(&self) -> bool {
        matches!(self, SolveOutcome::Sat(_))
    }
}

/// sparse row: terms, right-hand side, equality
type SearchRow = (Vec<(usize, i64)>, i64, bool);

struct Search {
    vars: Vec<BoxVar>,
    rows: Vec<SearchRow>,
    var_rows: Vec<Vec<usize>>,
    nodes: u64,
    limit: u64,
}

fn div_floor(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i64, b: i64) -> i64 {
    -div_floor(-a, b)
}

impl Search {
    fn new(store: &ConstraintStore, extra: &[(LinExpr, i64, bool)]) -> Search {
        let vars: Vec<BoxVar> = store.vars().into_iter().collect();
        let index: BTreeMap<BoxVar, usize> = vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut rows: Vec<SearchRow> = Vec::new();
        for c in store.iter() {
            rows.push((c.expr.terms().map(|(v, k)| (index[&v], k)).collect(), c.rhs(), c.is_eq()));
        }
        for (e, k, eq) in extra {
            rows.push((e.terms().map(|(v, c)| (index[&v], c)).collect(), *k, *eq));
        }
        let mut var_rows = vec![Vec::new(); vars.len()];
        for (i, (t, _, _)) in rows.iter().enumerate() {
            for (v, _) in t {
                var_rows[*v].push(i);
            }
        }
        Search { vars, rows, var_rows, nodes: 0, limit: NODE_LIMIT }
    }

    fn propagate(&self, lo: &mut [i64], hi: &mut [i64], seed: Option<usize>) -> bool {
        let mut queue: VecDeque<usize> = match seed {
            Some(v) => self.var_rows[v].iter().copied().collect(),
            None => (0..self.rows.len()).collect(),
        };
        let mut queued = vec![false; self.rows.len()];
        for r in &queue {
            queued[*r] = true;
        }
        while let Some(r) = queue.pop_front() {
            queued[r] = false;
            let (terms, rhs, eq) = &self.rows[r];
            let (mut smin, mut smax) = (0i64, 0i64);
            for (v, c) in terms {
                if *c > 0 {
                    smin += c * lo[*v];
                    smax += c * hi[*v];
                } else {
                    smin += c * hi[*v];
                    smax += c * lo[*v];
                }
            }
            if smax < *rhs || (*eq && smin > *rhs) {
                return false;
            }
            for (v, c) in terms {
                let (tmin, tmax) = if *c > 0 { (c * lo[*v], c * hi[*v]) } else { (c * hi[*v], c * lo[*v]) };
                let rest_max = smax - tmax;
                let rest_min = smin - tmin;
                // c*x >= rhs - rest_max, and for equalities c*x <= rhs - rest_min
                let low = rhs - rest_max;
                let (mut nlo, mut nhi) = (lo[*v], hi[*v]);
                if *c > 0 {
                    nlo = nlo.max(div_ceil(low, *c));
                    if *eq {
                        nhi = nhi.min(div_floor(rhs - rest_min, *c));
                    }
                } else {
                    nhi = nhi.min(div_floor(low, *c));
                    if *eq {
                        nlo = nlo.max(div_ceil(rhs - rest_min, *c));
                    }
                }
                if nlo > nhi {
                    return false;
                }
                if nlo != lo[*v] || nhi != hi[*v] {
                    lo[*v] = nlo;
                    hi[*v] = nhi;
                    for &r2 in &self.var_rows[*v] {
                        if r2 != r && !queued[r2] {
                            queued[r2] = true;
                            queue.push_back(r2);
                        }
                    }
                }
            }
        }
        true
    }

    /// Depth-first in variable order, smallest values first. Returns false
    /// when the node limit is hit.
    fn dfs(&mut self, lo: Vec<i64>, hi: Vec<i64>, want: usize, out: &mut Vec<Valuation>) -> bool {
        self.nodes += 1;
        if self.nodes > self.limit {
            return false;
        }
        let Some(i) = (0..self.vars.len()).find(|&i| lo[i] < hi[i]) else {
            let x: Valuation = self.vars.iter().zip(&lo).map(|(v, k)| (*v, *k as u64)).collect();
            out.push(x);
            return true;
        };
        for val in lo[i]..=hi[i] {
            let (mut l, mut h) = (lo.clone(), hi.clone());
            l[i] = val;
            h[i] = val;
            if self.propagate(&mut l, &mut h, Some(i)) {
                if !self.dfs(l, h, want, out) {
                    return false;
                }
                if out.len() >= want {
                    return true;
                }
            }
        }
        true
    }
}

/// Upper bounds: free variables get `bound`, eliminated ones whatever their
/// defining expression can reach.
fn initial_bounds(search: &Search, elim: &Elimination, bound: u64) -> (Vec<i64>, Vec<i64>) {
    let b = bound as i64;
    let mut hi: BTreeMap<BoxVar, i64> = search.vars.iter().map(|v| (*v, b)).collect();
    for v in &elim.zeroed {
        hi.insert(*v, 0);
    }
    for (v, e, k) in &elim.substitution {
        let top: i64 = e.terms().filter(|(_, c)| *c > 0).map(|(_, c)| c * b).sum::<i64>() + k;
        hi.insert(*v, top.max(0));
    }
    let lo = vec![0; search.vars.len()];
    let hi = search.vars.iter().map(|v| hi[v]).collect();
    (lo, hi)
}

/// Solutions in order of increasing sum, then lexicographically by
/// variable id. Stops after `want` solutions.
#[derive(Debug, Clone)]
pub struct Enumeration {
    pub outcome: SolveOutcome,
    pub solutions: Vec<Valuation>,
}

pub fn enumerate(store: &ConstraintStore, bound: u64, want: usize) -> Enumeration {
    let bound = bound.max(1);
    let elim = eliminate_equalities(store);
    if let Some(c) = elim.contradiction {
        return Enumeration { outcome: SolveOutcome::Unsat(c), solutions: Vec::new() };
    }
    let mut search = Search::new(store, &[]);
    if search.vars.is_empty() {
        return Enumeration { outcome: SolveOutcome::Sat(Valuation::new()), solutions: vec![Valuation::new()] };
    }
    let (mut lo, mut hi) = initial_bounds(&search, &elim, bound);
    let unknown = Enumeration { outcome: SolveOutcome::Unknown(bound), solutions: Vec::new() };
    if !search.propagate(&mut lo, &mut hi, None) {
        return unknown;
    }
    let mut first = Vec::new();
    if !search.dfs(lo.clone(), hi.clone(), 1, &mut first) || first.is_empty() {
        return unknown;
    }
    let total = LinExpr::from_vars(&search.vars);
    let smin: i64 = lo.iter().sum();
    let smax: i64 = hi.iter().sum();
    let mut out: Vec<Valuation> = Vec::new();
    let mut s = smin;
    let upper = if want == 1 { first[0].values().map(|v| *v as i64).sum::<i64>() } else { smax };
    while s <= upper && out.len() < want {
        let mut sub = Search::new(store, &[(total.clone(), s, true)]);
        sub.limit = NODE_LIMIT.saturating_sub(search.nodes);
        let (mut l, mut h) = (lo.clone(), hi.clone());
        if sub.propagate(&mut l, &mut h, None) {
            let ok = sub.dfs(l, h, want, &mut out);
            search.nodes += sub.nodes;
            if !ok {
                break;
            }
        }
        s += 1;
    }
    if out.is_empty() {
        out = first;
    }
    Enumeration { outcome: SolveOutcome::Sat(out[0].clone()), solutions: out }
}

/// Sat with the Σ-minimal, then lexicographically least witness;
/// Unsat only from elimination; Unknown when the bounded search fails.
pub fn solve(store: &ConstraintStore, bound: u64, minimize: bool) -> SolveOutcome {
    if minimize {
        return enumerate(store, bound, 1).outcome;
    }
    let elim = eliminate_equalities(store);
    if let Some(c) = elim.contradiction {
        return SolveOutcome::Unsat(c);
    }
    let mut search = Search::new(store, &[]);
    let (mut lo, mut hi) = initial_bounds(&search, &elim, bound.max(1));
    if !search.propagate(&mut lo, &mut hi, None) {
        return SolveOutcome::Unknown(bound);
    }
    let mut out = Vec::new();
    if search.dfs(lo, hi, 1, &mut out) && !out.is_empty() {
        SolveOutcome::Sat(out.remove(0))
    } else {
        SolveOutcome::Unknown(bound)
    }
}

/// Bound from `EALINFER_BOUND`, falling back to the default.
pub fn default_bound() -> u64 {
    std::env::var("EALINFER_BOUND").ok().and_then(|s| s.parse().ok()).filter(|b| *b >= 1).unwrap_or(DEFAULT_BOUND)
}

impl LinExpr {
    pub fn from_vars(vs: &[BoxVar]) -> LinExpr {
        let mut e = LinExpr::zero();
        for v in vs {
            e.add_term(*v, 1);
        }
        e
    }
}
