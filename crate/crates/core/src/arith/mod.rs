//! Decision procedures for linear integer and linear real arithmetic:
//! quantifier elimination, validity, model search and Skolem functions.

mod model;
mod project;
mod qe;
mod simplify;
mod skolem;

use thiserror::Error;

use crate::logic::{Formula, LogicError, Sort, SortEnv};

pub use model::find_model;
pub use skolem::{synthesize_skolem, SkolemFunction, SkolemTree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("unsupported fragment: {0}")]
    UnsupportedFragment(String),
    #[error("formula is not valid; no Skolem function exists: {0}")]
    Invalid(String),
    #[error("extracted witness for guard `{0}` does not satisfy the formula")]
    WitnessRejected(String),
    #[error("malformed Skolem artifact: {0}")]
    Artifact(String),
}

/// Quantifier-free equivalent of a formula.
#[derive(Debug, Clone, PartialEq)]
pub struct QeResult {
    pub formula: Formula,
    /// Bound variables, in elimination order (innermost first).
    pub eliminated: Vec<String>,
}

pub fn eliminate_quantifiers(f: &Formula) -> Result<QeResult, ArithError> {
    let f = f.uniquify_bound();
    let mut eliminated = Vec::new();
    collect_bound(&f, &mut eliminated);
    Ok(QeResult {
        formula: qe::qe(&f)?,
        eliminated,
    })
}

/// Equivalent quantifier-free formula with contradictory cells dropped and
/// redundant bounds pruned; formulas with a large DNF come back unchanged.
pub fn simplify(f: &Formula) -> Result<Formula, ArithError> {
    if !f.is_quantifier_free() {
        return Err(LogicError::Quantified.into());
    }
    Ok(qe::tidy(crate::logic::to_nnf(f)?))
}

fn collect_bound(f: &Formula, out: &mut Vec<String>) {
    match f {
        Formula::Not(g) => collect_bound(g, out),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| collect_bound(g, out)),
        Formula::Exists(v, _, b) | Formula::Forall(v, _, b) => {
            collect_bound(b, out);
            out.push(v.clone());
        }
        _ => {}
    }
}

/// Sorts of the free variables, read off the atoms that mention them.
/// Variables occurring in no atom default to `Int`.
pub fn infer_sorts(f: &Formula) -> SortEnv {
    let mut env = SortEnv::new();
    for a in f.atoms() {
        for v in a.term().vars() {
            env.entry(v.to_string()).or_insert(a.sort());
        }
    }
    f.free_vars()
        .into_iter()
        .map(|v| {
            let s = env.get(&v).copied().unwrap_or(Sort::Int);
            (v, s)
        })
        .collect()
}

/// Validity of the universal closure of `f`.
pub fn check_validity(f: &Formula) -> Result<bool, ArithError> {
    let free: Vec<(String, Sort)> = infer_sorts(f).into_iter().collect();
    let closed = Formula::forall_all(&free, f.clone());
    match qe::qe(&closed.uniquify_bound())? {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        other => Ok(other.eval(&crate::logic::Valuation::new())?),
    }
}
