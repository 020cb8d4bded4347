//! JSON reports and DOT renderings of decorated syntax trees.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eal::{parse_eal_type, parse_formula, Valuation};
use crate::lambda::{alpha_eq, parse_term, OccId, Step, Term};
use crate::neal::{erase_star, levels, neal_check, parse_neal, Basis};
use crate::pipeline::Run;
use crate::simple::parse_simple_type;
use crate::solver::{verify_certificate, Certificate, ConstraintStore, SolveOutcome};
use crate::synthesis::Inference;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseReport {
    pub var: String,
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateReport {
    /// equalities derived from the store
    pub equality: String,
    /// the constraint they contradict
    pub contradicts: String,
    pub proof: Certificate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub valuation: BTreeMap<String, u64>,
    pub concrete_type: String,
    pub basis: BTreeMap<String, String>,
    pub witness: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferenceReport {
    pub term: String,
    pub simple_type: String,
    pub eal_type: String,
    pub base: Vec<BaseReport>,
    pub constraints: Vec<String>,
    pub outcome: String,
    pub certificate: Option<CertificateReport>,
    pub bound: u64,
    pub solutions: Vec<SolutionReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("malformed report: {0}")]
    Json(String),
    #[error("field {field}: {msg}")]
    Field { field: String, msg: String },
}

fn field(field: &str, msg: impl ToString) -> LoadError {
    LoadError::Field { field: field.to_string(), msg: msg.to_string() }
}

impl InferenceReport {
    pub fn from_run(run: &Run, bound: u64) -> Self {
        let inf = &run.inference;
        let certificate = match &run.outcome {
            SolveOutcome::Unsat(c) => {
                let (equality, contradicts) = c.pair(&run.store);
                Some(CertificateReport { equality, contradicts, proof: c.clone() })
            }
            _ => None,
        };
        InferenceReport {
            term: inf.term.to_string(),
            simple_type: inf.sigma.to_string(),
            eal_type: inf.ty.to_string(),
            base: inf.base.iter().map(|(v, t)| BaseReport { var: v.clone(), ty: t.to_string() }).collect(),
            constraints: run.store.dump(),
            outcome: run.outcome.label().to_string(),
            certificate,
            bound,
            solutions: run
                .solutions
                .iter()
                .map(|s| SolutionReport {
                    valuation: s.valuation.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
                    concrete_type: s.concrete_type.to_string(),
                    basis: s.basis.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
                    witness: s.witness.as_ref().ok().map(|w| w.term.to_string()),
                    witness_error: s.witness.as_ref().err().map(|e| e.to_string()),
                })
                .collect(),
        }
    }
}

pub fn export_json(r: &InferenceReport) -> String {
    serde_json::to_string_pretty(r).expect("reports serialize")
}

/// Parses a report and re-checks everything it claims.
pub fn load(text: &str) -> Result<InferenceReport, LoadError> {
    let r: InferenceReport = serde_json::from_str(text).map_err(|e| LoadError::Json(e.to_string()))?;
    let term = parse_term(&r.term).map_err(|e| field("term", e))?;
    parse_simple_type(&r.simple_type).map_err(|e| field("simple_type", e))?;
    parse_eal_type(&r.eal_type).map_err(|e| field("eal_type", e))?;
    for b in &r.base {
        parse_eal_type(&b.ty).map_err(|e| field("base", e))?;
    }
    let store = ConstraintStore::from_dump(&r.constraints).map_err(|e| field("constraints", e))?;
    if !["sat", "unsat", "unknown"].contains(&r.outcome.as_str()) {
        return Err(field("outcome", format!("unknown outcome {}", r.outcome)));
    }
    if let Some(c) = &r.certificate {
        if !verify_certificate(&store, &c.proof) {
            return Err(field("certificate", "does not refute the constraints"));
        }
    }
    for (i, s) in r.solutions.iter().enumerate() {
        let name = format!("solutions[{i}]");
        let mut x = Valuation::new();
        for (k, v) in &s.valuation {
            x.insert(k.parse().map_err(|e| field(&name, e))?, *v);
        }
        if !crate::solver::check_solution(&store, &x) {
            return Err(field(&name, "valuation violates the constraints"));
        }
        let ty = parse_formula(&s.concrete_type).map_err(|e| field(&name, e))?;
        let mut basis = Basis::new();
        for (k, v) in &s.basis {
            basis.insert(k.clone(), parse_formula(v).map_err(|e| field(&name, e))?);
        }
        if let Some(w) = &s.witness {
            let p = parse_neal(w).map_err(|e| field(&name, e))?;
            neal_check(&basis, &p, &ty).map_err(|e| field(&name, e))?;
            let erased = erase_star(&p).map_err(|e| field(&name, e))?;
            if !alpha_eq(&erased, &term) {
                return Err(field(&name, "witness does not erase to the term"));
            }
        }
    }
    Ok(r)
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

struct Dot<'a> {
    term: &'a Term,
    ids: HashMap<OccId, usize>,
    level: HashMap<OccId, u64>,
    labels: HashMap<OccId, String>,
    out: String,
    clusters: usize,
}

impl Dot<'_> {
    fn node(&mut self, p: &OccId, indent: usize) {
        let label = match self.term.at(p).unwrap() {
            Term::Var { name, .. } => name.clone(),
            Term::Abs { binder, .. } => format!("λ{binder}"),
            Term::App { .. } => "@".to_string(),
        };
        let _ = writeln!(self.out, "{}n{} [label={}];", "  ".repeat(indent), self.ids[p], quote(&label));
    }

    fn children(&self, p: &OccId) -> Vec<OccId> {
        match self.term.at(p).unwrap() {
            Term::Var { .. } => vec![],
            Term::Abs { .. } => vec![p.child(Step::Body)],
            Term::App { .. } => vec![p.child(Step::Fun), p.child(Step::Arg)],
        }
    }

    /// Emits `p` inside `k` open clusters; returns nodes that belong to
    /// fewer boxes and must be emitted further out.
    fn emit(&mut self, p: &OccId, k: u64, indent: usize) -> Vec<OccId> {
        let lv = self.level[p];
        if lv > k {
            self.clusters += 1;
            let pad = "  ".repeat(indent);
            let _ = writeln!(self.out, "{pad}subgraph cluster_{} {{", self.clusters);
            let _ = writeln!(self.out, "{pad}  style=rounded;");
            let _ = writeln!(self.out, "{pad}  label={};", quote(&format!("!{}", k + 1)));
            let pending = self.emit(p, k + 1, indent + 1);
            let _ = writeln!(self.out, "{pad}}}");
            return self.settle(pending, k, indent);
        }
        self.node(p, indent);
        let mut out = Vec::new();
        for c in self.children(p) {
            if self.level[&c] < k {
                out.push(c);
            } else {
                out.extend(self.emit(&c, k, indent));
            }
        }
        out
    }

    fn settle(&mut self, pending: Vec<OccId>, k: u64, indent: usize) -> Vec<OccId> {
        let mut out = Vec::new();
        for q in pending {
            if self.level[&q] < k {
                out.push(q);
            } else {
                out.extend(self.emit(&q, k, indent));
            }
        }
        out
    }
}

/// DOT digraph of the syntax tree with boxes drawn as nested clusters.
/// Edges carry the instantiated type of the child.
pub fn export_dot(inf: &Inference, x: &Valuation) -> String {
    let nodes = inf.term.nodes();
    let ids: HashMap<OccId, usize> = nodes.iter().enumerate().map(|(i, (p, _))| (p.clone(), i)).collect();
    let labels = nodes
        .iter()
        .filter_map(|(p, _)| {
            let t = inf.node_types.get(p)?;
            Some((p.clone(), t.instantiate(x).map(|f| f.to_string()).unwrap_or_else(|_| t.short())))
        })
        .collect();
    let mut d = Dot { term: &inf.term, ids, level: levels(inf, x), labels, out: String::new(), clusters: 0 };
    d.out.push_str("digraph term {\n  node [shape=plaintext];\n");
    let rest = d.emit(&OccId::root(), 0, 1);
    debug_assert!(rest.is_empty());
    for (p, _) in &nodes {
        for c in d.children(p) {
            let label = d.labels.get(&c).cloned().unwrap_or_default();
            let _ = writeln!(d.out, "  n{} -> n{} [label={}];", d.ids[p], d.ids[&c], quote(&label));
        }
    }
    let top = inf.ty.instantiate(x).map(|f| f.to_string()).unwrap_or_default();
    let _ = writeln!(d.out, "  label={};", quote(&format!("{} : {top}", inf.term)));
    d.out.push_str("}\n");
    d.out
}
