//! Linear arithmetic over integer and rational sorts: terms, atoms,
//! formulas, valuations, normalization and the shared text syntax.

mod atom;
mod dnf;
mod formula;
pub mod text;
mod term;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use atom::{normalize_atom, Atom, Rel, Relation};
pub use dnf::{to_dnf, to_nnf, Cell, Lit, DEFAULT_CELL_BUDGET};
pub use formula::Formula;
pub use term::{rat, LinearTerm};
pub(crate) use dnf::cell_formula;
pub use term::fmt_rat;

/// Exact rational number; the only numeric type in the symbolic core.
pub type Rat = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("variable `{0}` has no value in the valuation")]
    MissingVariable(String),
    #[error("divisibility applied to a real-sorted term `{0}`")]
    SortMismatch(String),
    #[error("expected a quantifier-free formula")]
    Quantified,
    #[error("DNF expansion exceeded the budget of {0} cells")]
    CellBudgetExceeded(usize),
    #[error("parse error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sort {
    Int,
    Real,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Int => "int",
            Sort::Real => "real",
        })
    }
}

impl std::str::FromStr for Sort {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "int" => Ok(Sort::Int),
            "real" => Ok(Sort::Real),
            other => Err(format!("unknown sort `{other}` (expected int or real)")),
        }
    }
}

/// Assignment of exact rationals to variable names.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Valuation(BTreeMap<String, Rat>);

impl Valuation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, value: Rat) -> Self {
        self.0.insert(name.into(), value);
        self
    }

    pub fn from_ints<'a>(pairs: impl IntoIterator<Item = (&'a str, i64)>) -> Self {
        Self(
            pairs
                .into_iter()
                .map(|(k, v)| (k.to_string(), rat(v)))
                .collect(),
        )
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Rat) {
        self.0.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Result<&Rat, LogicError> {
        self.0
            .get(name)
            .ok_or_else(|| LogicError::MissingVariable(name.to_string()))
    }

    pub fn get_opt(&self, name: &str) -> Option<&Rat> {
        self.0.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Rat)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Union; entries of `other` win on conflicts.
    pub fn union(&self, other: &Valuation) -> Valuation {
        let mut out = self.clone();
        for (k, v) in &other.0 {
            out.0.insert(k.clone(), v.clone());
        }
        out
    }

    /// Keep only the listed variables.
    pub fn restrict<'a>(&self, vars: impl IntoIterator<Item = &'a str>) -> Valuation {
        Valuation(
            vars.into_iter()
                .filter_map(|v| self.0.get(v).map(|r| (v.to_string(), r.clone())))
                .collect(),
        )
    }

    /// Integer value of `name`, if present and integral.
    pub fn int(&self, name: &str) -> Option<BigInt> {
        self.0
            .get(name)
            .filter(|r| r.is_integer())
            .map(|r| r.to_integer())
    }
}

impl FromIterator<(String, Rat)> for Valuation {
    fn from_iter<T: IntoIterator<Item = (String, Rat)>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}:{}", fmt_rat(v))?;
        }
        f.write_str("}")
    }
}

/// Declared sorts for free variables.
pub type SortEnv = BTreeMap<String, Sort>;
