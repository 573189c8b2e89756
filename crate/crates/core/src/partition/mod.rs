//! Mapping concrete environment inputs to reaction letters.

use thiserror::Error;

use crate::abstraction::{characteristic_choice, AbstractionError, BooleanSpec, Choice, ValidReactionTable};
use crate::arith::check_validity;
use crate::logic::{Formula, LogicError, Valuation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("no region contains the input {0}")]
    NoRegion(String),
    #[error("input {input} lies in the regions of {letters:?}")]
    MultiRegion { input: String, letters: Vec<String> },
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// Quantifier-free region predicates in table order.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledPartitioner {
    pub entries: Vec<(String, Formula)>,
}

pub fn compile_partitioner(table: &ValidReactionTable) -> CompiledPartitioner {
    CompiledPartitioner {
        entries: table.entries.iter().map(|e| (e.letter.clone(), e.region.clone())).collect(),
    }
}

impl CompiledPartitioner {
    /// Index of the unique region containing `v`.
    pub fn partition(&self, v: &Valuation) -> Result<usize, PartitionError> {
        let mut hit: Option<usize> = None;
        for (i, (_, region)) in self.entries.iter().enumerate() {
            if region.eval(v)? {
                if let Some(j) = hit {
                    return Err(PartitionError::MultiRegion {
                        input: v.to_string(),
                        letters: vec![self.entries[j].0.clone(), self.entries[i].0.clone()],
                    });
                }
                hit = Some(i);
            }
        }
        hit.ok_or_else(|| PartitionError::NoRegion(v.to_string()))
    }
}

/// The reference partitioner: the letter whose characteristic formula
/// `f_r` becomes valid once the input is substituted. Every call runs
/// quantifier elimination, so this is only a cross-check.
pub fn partition_by_validity(b: &BooleanSpec, v: &Valuation) -> Result<Option<usize>, AbstractionError> {
    let n = b.num_props();
    let spec = &b.spec;
    for (k, e) in b.table.entries.iter().enumerate() {
        let mut parts = Vec::new();
        for c in Choice::all(n) {
            let fc = characteristic_choice(&c, spec).substitute(v);
            let feasible = Formula::exists_all(&spec.sys_vars, fc);
            parts.push(if e.reaction.contains(&c) {
                feasible
            } else {
                Formula::not(feasible)
            });
        }
        if check_validity(&Formula::and(parts))? {
            return Ok(Some(k));
        }
    }
    Ok(None)
}
