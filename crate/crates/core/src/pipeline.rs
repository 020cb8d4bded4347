//! Inference, solving and witness extraction wired together.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::eal::{meta_name, EalError, Formula, LinExpr, Valuation};
use crate::lambda::Term;
use crate::neal::{verified_witness, Basis, NealError, WitnessOutcome};
use crate::oracle::Judgment;
use crate::simple::{match_type, SimpleType, SimpleTypeError};
use crate::solver::{enumerate, ConstraintStore, Kind, SolveOutcome};
use crate::synthesis::{infer, Inference, Options};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Simple(#[from] SimpleTypeError),
    #[error("cannot pin: {0}")]
    Pin(#[from] EalError),
}

/// The bang-free formula with the same skeleton.
pub fn formula_of(s: &SimpleType) -> Formula {
    match s {
        SimpleType::Base => Formula::o(),
        SimpleType::Var(a) => Formula::Atom(a.clone()),
        SimpleType::Arrow(a, b) => Formula::lolli(formula_of(a), formula_of(b)),
    }
}

/// The store with rows fixing the type, and optionally the base, to
/// concrete formulas.
pub fn pin(inf: &Inference, ty: &Formula, basis: Option<&Basis>) -> Result<ConstraintStore, EalError> {
    let mut rows: Vec<(LinExpr, Kind)> = inf.ty.pin_rows(ty)?.into_iter().map(|(e, k)| (e, Kind::Pin(k))).collect();
    if let Some(b) = basis {
        for (v, t) in &inf.base {
            if let Some(f) = b.get(v) {
                rows.extend(t.pin_rows(f)?.into_iter().map(|(e, k)| (e, Kind::Pin(k))));
            }
        }
    }
    Ok(inf.store.with_rows(&rows))
}

pub fn pinned_outcome(inf: &Inference, ty: &Formula, basis: Option<&Basis>, bound: u64) -> Result<SolveOutcome, EalError> {
    Ok(enumerate(&pin(inf, ty, basis)?, bound, 1).outcome)
}

/// Instantiates the metavariables of an affine judgment so that it
/// erases to the inference's simple types.
pub fn ground(inf: &Inference, j: &Judgment) -> Option<(Basis, Formula)> {
    let mut m = BTreeMap::new();
    if !match_type(&j.ty.erase(), &inf.sigma, &mut m) {
        return None;
    }
    for (v, f) in &j.basis {
        let t = inf.base.iter().find(|(n, _)| n == v)?;
        if !match_type(&f.erase(), &t.1.erase(), &mut m) {
            return None;
        }
    }
    let mut metas = j.ty.metas();
    for (_, f) in &j.basis {
        metas.extend(f.metas());
    }
    let s: BTreeMap<u32, Formula> =
        metas.into_iter().map(|k| (k, m.get(&meta_name(k)).map(formula_of).unwrap_or_else(Formula::o))).collect();
    let basis = j.basis.iter().map(|(v, f)| (v.clone(), f.subst_metas(&s))).collect();
    Some((basis, j.ty.subst_metas(&s)))
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub valuation: Valuation,
    pub basis: Basis,
    pub concrete_type: Formula,
    pub witness: Result<WitnessOutcome, NealError>,
}

#[derive(Debug, Clone)]
pub struct Run {
    pub inference: Inference,
    pub store: ConstraintStore,
    pub outcome: SolveOutcome,
    pub solutions: Vec<Solution>,
}

#[derive(Debug, Clone)]
pub struct Request<'a> {
    pub sigma: Option<&'a SimpleType>,
    pub pin: Option<&'a Formula>,
    pub solutions: usize,
    pub bound: u64,
    pub options: Options,
}

impl Default for Request<'_> {
    fn default() -> Self {
        Request { sigma: None, pin: None, solutions: 1, bound: crate::solver::DEFAULT_BOUND, options: Options::default() }
    }
}

pub fn run(term: &Term, req: &Request) -> Result<Run, PipelineError> {
    let inf = infer(term, req.sigma, req.options)?;
    let store = match req.pin {
        Some(f) => pin(&inf, f, None)?,
        None => inf.store.clone(),
    };
    let en = enumerate(&store, req.bound, req.solutions.max(1));
    let mut solutions = Vec::new();
    if en.outcome.is_sat() {
        for x in en.solutions {
            let concrete_type = inf.ty.instantiate(&x)?;
            let mut basis = Basis::new();
            for (v, t) in &inf.base {
                basis.insert(v.clone(), t.instantiate(&x)?);
            }
            let witness = verified_witness(&inf, &x, req.bound);
            solutions.push(Solution { valuation: x, basis, concrete_type, witness });
        }
    }
    Ok(Run { inference: inf, store, outcome: en.outcome, solutions })
}
