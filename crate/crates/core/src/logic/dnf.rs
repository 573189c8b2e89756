use std::fmt;

use super::{Atom, Formula, LogicError, Rel, Valuation};

pub const DEFAULT_CELL_BUDGET: usize = 4096;

/// A literal of a negation-normal formula. Only divisibility atoms ever
/// appear negated; every other negation folds into the atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit {
    pub atom: Atom,
    pub positive: bool,
}

impl Lit {
    pub fn pos(atom: Atom) -> Self {
        Self { atom, positive: true }
    }

    pub fn eval(&self, v: &Valuation) -> Result<bool, LogicError> {
        Ok(self.atom.eval(v)? == self.positive)
    }

    pub fn to_formula(&self) -> Formula {
        let a = Formula::Atom(self.atom.clone());
        if self.positive {
            a
        } else {
            Formula::Not(Box::new(a))
        }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "!({})", self.atom)
        }
    }
}

/// A conjunction of literals.
pub type Cell = Vec<Lit>;

/// Push negations down to atoms.
pub fn to_nnf(f: &Formula) -> Result<Formula, LogicError> {
    nnf(f, true)
}

fn nnf(f: &Formula, positive: bool) -> Result<Formula, LogicError> {
    Ok(match f {
        Formula::True => Formula::from_bool(positive),
        Formula::False => Formula::from_bool(!positive),
        Formula::Atom(a) => {
            if positive {
                Formula::Atom(a.clone())
            } else {
                a.negate()
            }
        }
        Formula::Not(g) => nnf(g, !positive)?,
        Formula::And(gs) | Formula::Or(gs) => {
            let parts = gs.iter().map(|g| nnf(g, positive)).collect::<Result<Vec<_>, _>>()?;
            let conj = matches!(f, Formula::And(_)) == positive;
            if conj {
                Formula::and(parts)
            } else {
                Formula::or(parts)
            }
        }
        Formula::Exists(..) | Formula::Forall(..) => return Err(LogicError::Quantified),
    })
}

/// Disjunctive normal form, cells in left-to-right expansion order.
pub fn to_dnf(f: &Formula, budget: usize) -> Result<Vec<Cell>, LogicError> {
    let n = to_nnf(f)?;
    let cells = expand(&n, budget)?;
    Ok(cells.into_iter().filter_map(tidy).collect())
}

fn expand(f: &Formula, budget: usize) -> Result<Vec<Cell>, LogicError> {
    match f {
        Formula::True => Ok(vec![Vec::new()]),
        Formula::False => Ok(Vec::new()),
        Formula::Atom(a) => Ok(vec![vec![Lit::pos(a.clone())]]),
        Formula::Not(g) => match g.as_ref() {
            Formula::Atom(a) if matches!(a.rel(), Rel::Dvd(_)) => Ok(vec![vec![Lit {
                atom: a.clone(),
                positive: false,
            }]]),
            _ => unreachable!("input is negation-normal"),
        },
        Formula::Or(gs) => {
            let mut out = Vec::new();
            for g in gs {
                out.extend(expand(g, budget)?);
                if out.len() > budget {
                    return Err(LogicError::CellBudgetExceeded(budget));
                }
            }
            Ok(out)
        }
        Formula::And(gs) => {
            let mut acc: Vec<Cell> = vec![Vec::new()];
            for g in gs {
                let part = expand(g, budget)?;
                if acc.len().saturating_mul(part.len()) > budget {
                    return Err(LogicError::CellBudgetExceeded(budget));
                }
                let mut next = Vec::with_capacity(acc.len() * part.len());
                for a in &acc {
                    for p in &part {
                        let mut c = a.clone();
                        c.extend(p.iter().cloned());
                        next.push(c);
                    }
                }
                acc = next;
            }
            Ok(acc)
        }
        Formula::Exists(..) | Formula::Forall(..) => Err(LogicError::Quantified),
    }
}

/// Remove duplicate literals; drop cells containing a literal and its complement.
fn tidy(cell: Cell) -> Option<Cell> {
    let mut out: Cell = Vec::with_capacity(cell.len());
    for l in cell {
        if out.contains(&l) {
            continue;
        }
        let clash = out.iter().any(|o| {
            o.atom == l.atom && o.positive != l.positive
                || (o.positive && l.positive && o.atom.negated_atom().as_ref() == Some(&l.atom))
        });
        if clash {
            return None;
        }
        out.push(l);
    }
    Some(out)
}

pub(crate) fn cell_formula(cell: &[Lit]) -> Formula {
    Formula::and(cell.iter().map(Lit::to_formula).collect())
}
