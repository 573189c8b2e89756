//! Providers: concrete outputs realizing the controller's chosen choice.

mod dynamic;
mod emit;
mod gamma;

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::{characteristic_choice, AbstractionError, BooleanSpec, Choice};
use crate::arith::{check_validity, synthesize_skolem, ArithError, SkolemFunction};
use crate::logic::{Formula, LogicError, Valuation};

pub use dynamic::{provide_dynamic, DynamicProvider};
pub use emit::{emit_provider_source, emit_source};
pub use gamma::{build_closest_constraint, AdaptiveDescription, ConstraintSource, GammaEntry, ZBinding, ZVar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Abstraction(#[from] AbstractionError),
    #[error("choice {choice} is not in the reaction of {letter}")]
    ChoiceNotInReaction { letter: String, choice: String },
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("adaptive provider formula for ({letter}, {choice}) is not valid; a different constraint is needed")]
    AdaptiveInvalid { letter: String, choice: String },
    #[error("choice {choice} is infeasible at input {input}")]
    InfeasibleChoice { input: String, choice: String },
    #[error("function `{0}` has real-sorted variables and cannot be emitted as C")]
    RealNotEmittable(String),
    #[error("real-sorted closest constraints need a positive epsilon")]
    MissingEpsilon,
    #[error("malformed adaptive description: {0}")]
    Gamma(String),
    #[error("malformed provider artifact: {0}")]
    Artifact(String),
}

impl From<LogicError> for ProviderError {
    fn from(e: LogicError) -> Self {
        ProviderError::Arith(e.into())
    }
}

fn letter_of(b: &BooleanSpec, letter: usize) -> Result<&crate::abstraction::ReactionEntry, ProviderError> {
    b.table
        .entries
        .get(letter)
        .ok_or_else(|| ProviderError::UnknownLetter(format!("#{letter}")))
}

fn check_pair(b: &BooleanSpec, letter: usize, c: &Choice) -> Result<(), ProviderError> {
    let e = letter_of(b, letter)?;
    if !e.reaction.contains(c) {
        return Err(ProviderError::ChoiceNotInReaction {
            letter: e.letter.clone(),
            choice: c.to_string(),
        });
    }
    Ok(())
}

/// `∀x̄. ∃ȳ. region → f_c` for a letter and a choice of its reaction.
pub fn build_basic_formula(b: &BooleanSpec, letter: usize, c: &Choice) -> Result<Formula, ProviderError> {
    check_pair(b, letter, c)?;
    let region = letter_of(b, letter)?.region.clone();
    let body = Formula::implies(region, characteristic_choice(c, &b.spec));
    Ok(Formula::forall_all(
        &b.spec.env_vars,
        Formula::exists_all(&b.spec.sys_vars, body),
    ))
}

/// `∀x̄, z̄. ∃ȳ. region → (f_c ∧ ψ⁺)`.
pub fn build_adaptive_formula(
    b: &BooleanSpec,
    gamma: &AdaptiveDescription,
    letter: usize,
    c: &Choice,
    psi_plus: &Formula,
) -> Result<Formula, ProviderError> {
    check_pair(b, letter, c)?;
    let region = letter_of(b, letter)?.region.clone();
    let body = Formula::implies(region, Formula::and(vec![characteristic_choice(c, &b.spec), psi_plus.clone()]));
    let mut inputs = b.spec.env_vars.clone();
    inputs.extend(gamma.z_sorts());
    Ok(Formula::forall_all(&inputs, Formula::exists_all(&b.spec.sys_vars, body)))
}

/// Validity of `region ∧ path → f_c[ȳ ← leaf]` along every tree path.
pub fn verify_contract(b: &BooleanSpec, letter: usize, c: &Choice, h: &SkolemFunction) -> Result<bool, ProviderError> {
    let region = letter_of(b, letter)?.region.clone();
    let fc = characteristic_choice(c, &b.spec);
    for (conds, leaf) in h.tree.paths() {
        let mut hyp = vec![region.clone()];
        hyp.extend(conds.into_iter().map(|(g, taken)| if taken { g.clone() } else { Formula::not(g.clone()) }));
        let mut goal = fc.clone();
        for (y, t) in leaf {
            goal = goal.substitute_term(y, t);
        }
        if !check_validity(&Formula::implies(Formula::and(hyp), goal))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One synthesized provider function.
#[derive(Clone, Debug, PartialEq)]
pub struct ProviderEntry {
    pub function: SkolemFunction,
    pub adaptive: bool,
}

/// Skolem function for one pair: adaptive when Γ constrains it.
pub fn synthesize_pair(
    b: &BooleanSpec,
    gamma: Option<&AdaptiveDescription>,
    letter: usize,
    c: &Choice,
) -> Result<ProviderEntry, ProviderError> {
    let name = letter_of(b, letter)?.letter.clone();
    if let Some(g) = gamma {
        if let Some(psi_plus) = g.constraint_for(b, &name, c)? {
            let f = build_adaptive_formula(b, g, letter, c, &psi_plus)?;
            return match synthesize_skolem(&f) {
                Ok(h) => Ok(ProviderEntry {
                    function: h,
                    adaptive: true,
                }),
                Err(ArithError::Invalid(_)) => Err(ProviderError::AdaptiveInvalid {
                    letter: name,
                    choice: c.bitstring(),
                }),
                Err(e) => Err(e.into()),
            };
        }
    }
    let f = build_basic_formula(b, letter, c)?;
    Ok(ProviderEntry {
        function: synthesize_skolem(&f)?,
        adaptive: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthesisMode {
    /// Every pair of every reaction up front.
    Eager,
    /// Pairs synthesized on first use and memoized.
    Lazy,
}

type Memo = HashMap<(usize, Choice), Arc<ProviderEntry>>;

/// Provider backed by Skolem functions.
#[derive(Debug)]
pub struct StaticProvider {
    bspec: Arc<BooleanSpec>,
    gamma: Option<AdaptiveDescription>,
    mode: SynthesisMode,
    functions: RwLock<Memo>,
}

impl StaticProvider {
    pub fn new(bspec: Arc<BooleanSpec>, gamma: Option<AdaptiveDescription>, mode: SynthesisMode) -> Result<Self, ProviderError> {
        let p = StaticProvider {
            bspec,
            gamma,
            mode,
            functions: RwLock::new(HashMap::new()),
        };
        if mode == SynthesisMode::Eager {
            let pairs: Vec<(usize, Choice)> = p
                .bspec
                .table
                .entries
                .iter()
                .enumerate()
                .flat_map(|(k, e)| e.reaction.iter().map(move |c| (k, c.clone())))
                .collect();
            p.prepare(&pairs)?;
        }
        Ok(p)
    }

    /// Synthesize the given pairs now, typically the ones a machine can emit.
    pub fn prepare(&self, pairs: &[(usize, Choice)]) -> Result<(), ProviderError> {
        for (k, c) in pairs {
            self.entry(*k, c)?;
        }
        Ok(())
    }

    pub fn bspec(&self) -> &BooleanSpec {
        &self.bspec
    }

    pub fn gamma(&self) -> Option<&AdaptiveDescription> {
        self.gamma.as_ref()
    }

    pub fn mode(&self) -> SynthesisMode {
        self.mode
    }

    pub fn entry(&self, letter: usize, c: &Choice) -> Result<Arc<ProviderEntry>, ProviderError> {
        let key = (letter, c.clone());
        if let Some(e) = self.functions.read().expect("memo lock").get(&key) {
            return Ok(e.clone());
        }
        let e = Arc::new(synthesize_pair(&self.bspec, self.gamma.as_ref(), letter, c)?);
        self.functions.write().expect("memo lock").entry(key).or_insert_with(|| e.clone());
        Ok(e)
    }

    /// Synthesized pairs in (letter, choice) order.
    pub fn entries(&self) -> Vec<((usize, Choice), Arc<ProviderEntry>)> {
        let mut out: Vec<_> = self
            .functions
            .read()
            .expect("memo lock")
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// Outputs for inputs `v_x` (and auxiliary `v_z`) under a pair.
    pub fn provide(&self, v_x: &Valuation, v_z: &Valuation, letter: usize, c: &Choice) -> Result<Valuation, ProviderError> {
        let e = self.entry(letter, c)?;
        let input = if v_z.is_empty() { v_x.clone() } else { v_x.union(v_z) };
        Ok(e.function.eval(&input)?)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let doc = ProviderDoc {
            gamma: self.gamma.as_ref().map(|g| g.to_json()),
            functions: self
                .entries()
                .into_iter()
                .map(|((k, c), e)| FunctionEntryDoc {
                    letter: self.bspec.table.entries[k].letter.clone(),
                    choice: c.bitstring(),
                    adaptive: e.adaptive,
                    function: e.function.to_json(),
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("serializable")
    }

    /// Load a provider artifact; every function is re-checked against its
    /// contract. Missing pairs are synthesized lazily.
    pub fn from_json(value: &serde_json::Value, bspec: Arc<BooleanSpec>) -> Result<Self, ProviderError> {
        let doc: ProviderDoc =
            serde_json::from_value(value.clone()).map_err(|e| ProviderError::Artifact(e.to_string()))?;
        let gamma = match &doc.gamma {
            Some(g) => Some(AdaptiveDescription::from_json(g, &bspec)?),
            None => None,
        };
        let mut memo = Memo::new();
        for f in doc.functions {
            let k = bspec
                .table
                .letter_index(&f.letter)
                .ok_or_else(|| ProviderError::UnknownLetter(f.letter.clone()))?;
            let c = Choice::parse_bits(&f.choice)
                .filter(|c| c.len() == bspec.num_props())
                .ok_or_else(|| ProviderError::Artifact(format!("bad choice `{}`", f.choice)))?;
            check_pair(&bspec, k, &c)?;
            let h = SkolemFunction::from_json(&f.function)?;
            let outs: Vec<&String> = h.outputs.iter().map(|(v, _)| v).collect();
            let sys: Vec<&String> = bspec.spec.sys_vars.iter().map(|(v, _)| v).collect();
            if outs != sys {
                return Err(ProviderError::Artifact(format!("function for ({}, {}) has outputs {outs:?}", f.letter, f.choice)));
            }
            if !verify_contract(&bspec, k, &c, &h)? {
                return Err(ProviderError::Artifact(format!("function for ({}, {}) violates its contract", f.letter, f.choice)));
            }
            memo.insert(
                (k, c),
                Arc::new(ProviderEntry {
                    function: h,
                    adaptive: f.adaptive,
                }),
            );
        }
        Ok(StaticProvider {
            bspec,
            gamma,
            mode: SynthesisMode::Lazy,
            functions: RwLock::new(memo),
        })
    }
}

#[derive(Serialize, Deserialize)]
struct FunctionEntryDoc {
    letter: String,
    choice: String,
    adaptive: bool,
    function: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct ProviderDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<serde_json::Value>,
    functions: Vec<FunctionEntryDoc>,
}

#[cfg(test)]
mod tests;
