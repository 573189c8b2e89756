//! Adaptive descriptions: extra constraints shaping which witness a
//! provider returns.

use serde::{Deserialize, Serialize};

use super::ProviderError;
use crate::abstraction::{BooleanSpec, Choice};
use crate::arith::eliminate_quantifiers;
use crate::logic::text::{parse_formula, parse_rat};
use crate::logic::{fmt_rat, normalize_atom, Formula, LinearTerm, Rat, Relation, Sort, SortEnv};

/// Where an auxiliary variable gets its value at each step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZBinding {
    External,
    PrevInput(String),
    PrevOutput(String),
}

impl ZBinding {
    fn parse(s: &str) -> Option<ZBinding> {
        if s == "external" {
            return Some(ZBinding::External);
        }
        if let Some(v) = s.strip_prefix("prev_input:") {
            return Some(ZBinding::PrevInput(v.to_string()));
        }
        s.strip_prefix("prev_output:").map(|v| ZBinding::PrevOutput(v.to_string()))
    }

    fn render(&self) -> String {
        match self {
            ZBinding::External => "external".into(),
            ZBinding::PrevInput(v) => format!("prev_input:{v}"),
            ZBinding::PrevOutput(v) => format!("prev_output:{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZVar {
    pub name: String,
    pub sort: Sort,
    pub binding: ZBinding,
    pub default: Rat,
}

/// How an entry states its constraint.
#[derive(Clone, Debug, PartialEq)]
pub enum ConstraintSource {
    Text(String),
    /// Closest feasible output to the named z variable.
    Closest { target: String, epsilon: Option<Rat> },
}

/// One constraint; `None` for letter or choice matches every pair.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaEntry {
    pub letter: Option<String>,
    pub choice: Option<Choice>,
    pub source: ConstraintSource,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct AdaptiveDescription {
    pub z_vars: Vec<ZVar>,
    pub constraints: Vec<GammaEntry>,
}

impl AdaptiveDescription {
    pub fn z_sorts(&self) -> Vec<(String, Sort)> {
        self.z_vars.iter().map(|z| (z.name.clone(), z.sort)).collect()
    }

    fn sort_env(&self, b: &BooleanSpec) -> SortEnv {
        let mut env = b.spec.sorts();
        env.extend(self.z_sorts());
        env
    }

    /// Quantifier-free ψ⁺ for a pair: the conjunction of every matching
    /// entry, or `None` when no entry matches.
    pub fn constraint_for(&self, b: &BooleanSpec, letter: &str, c: &Choice) -> Result<Option<Formula>, ProviderError> {
        let mut parts = Vec::new();
        for e in &self.constraints {
            if e.letter.as_deref().is_some_and(|l| l != letter) || e.choice.as_ref().is_some_and(|ec| ec != c) {
                continue;
            }
            let f = match &e.source {
                ConstraintSource::Text(t) => parse_formula(t, &self.sort_env(b))?,
                ConstraintSource::Closest { target, epsilon } => {
                    let [(y, sort)] = b.spec.sys_vars.as_slice() else {
                        return Err(ProviderError::Gamma("closest constraints need exactly one output".into()));
                    };
                    let psi = crate::abstraction::characteristic_choice(c, &b.spec);
                    build_closest_constraint(&psi, y, target, *sort, epsilon.clone())?
                }
            };
            parts.push(f);
        }
        if parts.is_empty() {
            return Ok(None);
        }
        Ok(Some(eliminate_quantifiers(&Formula::and(parts))?.formula))
    }

    pub fn from_json(value: &serde_json::Value, b: &BooleanSpec) -> Result<Self, ProviderError> {
        let doc: GammaDoc = serde_json::from_value(value.clone()).map_err(|e| ProviderError::Gamma(e.to_string()))?;
        let mut z_vars = Vec::new();
        for z in doc.z {
            let binding = ZBinding::parse(&z.binding)
                .ok_or_else(|| ProviderError::Gamma(format!("unknown binding `{}`", z.binding)))?;
            let sort: Sort = z.sort.parse().map_err(ProviderError::Gamma)?;
            let bound_ok = match &binding {
                ZBinding::External => true,
                ZBinding::PrevInput(v) => b.spec.env_vars.iter().any(|(n, _)| n == v),
                ZBinding::PrevOutput(v) => b.spec.sys_vars.iter().any(|(n, _)| n == v),
            };
            if !bound_ok {
                return Err(ProviderError::Gamma(format!("binding `{}` names an unknown variable", z.binding)));
            }
            if b.spec.sorts().contains_key(&z.name) || z_vars.iter().any(|v: &ZVar| v.name == z.name) {
                return Err(ProviderError::Gamma(format!("z variable `{}` clashes with another variable", z.name)));
            }
            let default = match &z.default {
                Some(d) => parse_rat(d).ok_or_else(|| ProviderError::Gamma(format!("bad default `{d}`")))?,
                None => Rat::from_integer(0.into()),
            };
            z_vars.push(ZVar {
                name: z.name,
                sort,
                binding,
                default,
            });
        }
        let mut gamma = AdaptiveDescription {
            z_vars,
            constraints: Vec::new(),
        };
        let n = b.num_props();
        for e in doc.constraints {
            let letter = match e.letter.as_str() {
                "*" => None,
                l if b.table.letter_index(l).is_some() => Some(l.to_string()),
                l => return Err(ProviderError::UnknownLetter(l.to_string())),
            };
            let choice = match e.choice.as_str() {
                "*" => None,
                s => match Choice::parse_bits(s) {
                    Some(c) if c.len() == n => Some(c),
                    _ => return Err(ProviderError::Gamma(format!("bad choice bits `{s}`"))),
                },
            };
            let source = match (e.constraint, e.closest) {
                (Some(t), None) => {
                    let f = parse_formula(&t, &gamma.sort_env(b))?;
                    let allowed = gamma.sort_env(b);
                    if let Some(v) = f.free_vars().into_iter().find(|v| !allowed.contains_key(v)) {
                        return Err(ProviderError::Gamma(format!("constraint mentions unknown `{v}`")));
                    }
                    ConstraintSource::Text(t)
                }
                (None, Some(target)) => {
                    if !gamma.z_vars.iter().any(|z| z.name == target) {
                        return Err(ProviderError::Gamma(format!("closest target `{target}` is not a z variable")));
                    }
                    let epsilon = match e.epsilon {
                        Some(t) => Some(parse_rat(&t).ok_or_else(|| ProviderError::Gamma(format!("bad epsilon `{t}`")))?),
                        None => None,
                    };
                    ConstraintSource::Closest { target, epsilon }
                }
                _ => return Err(ProviderError::Gamma("each entry needs exactly one of `constraint` or `closest`".into())),
            };
            gamma.constraints.push(GammaEntry { letter, choice, source });
        }
        Ok(gamma)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let doc = GammaDoc {
            z: self
                .z_vars
                .iter()
                .map(|z| ZDoc {
                    name: z.name.clone(),
                    sort: z.sort.to_string(),
                    binding: z.binding.render(),
                    default: Some(fmt_rat(&z.default)),
                })
                .collect(),
            constraints: self
                .constraints
                .iter()
                .map(|e| {
                    let (constraint, closest, epsilon) = match &e.source {
                        ConstraintSource::Text(t) => (Some(t.clone()), None, None),
                        ConstraintSource::Closest { target, epsilon } => {
                            (None, Some(target.clone()), epsilon.as_ref().map(fmt_rat))
                        }
                    };
                    EntryDoc {
                        letter: e.letter.clone().unwrap_or_else(|| "*".into()),
                        choice: e.choice.as_ref().map(|c| c.bitstring()).unwrap_or_else(|| "*".into()),
                        constraint,
                        closest,
                        epsilon,
                    }
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("serializable")
    }
}

#[derive(Serialize, Deserialize)]
struct ZDoc {
    name: String,
    sort: String,
    binding: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    default: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct EntryDoc {
    letter: String,
    choice: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constraint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    closest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct GammaDoc {
    #[serde(default)]
    z: Vec<ZDoc>,
    constraints: Vec<EntryDoc>,
}

fn fresh(taken: &[&str], base: &str) -> String {
    let mut name = base.to_string();
    let mut i = 0;
    while taken.contains(&name.as_str()) {
        i += 1;
        name = format!("{base}{i}");
    }
    name
}

/// `∀w. ψ[y←w] → |y − z| ≤ |w − z| (+ ε)`, quantifier-free.
///
/// Absolute values are expanded as `|a| ≤ |b| + ε` iff
/// `(a ≤ b+ε ∧ −a ≤ b+ε) ∨ (a ≤ −b+ε ∧ −a ≤ −b+ε)`.
pub fn build_closest_constraint(
    psi: &Formula,
    y: &str,
    z: &str,
    sort: Sort,
    epsilon: Option<Rat>,
) -> Result<Formula, ProviderError> {
    let eps = match (sort, epsilon) {
        (Sort::Real, None) => return Err(ProviderError::MissingEpsilon),
        (_, Some(e)) if e <= Rat::from_integer(0.into()) => return Err(ProviderError::MissingEpsilon),
        (_, e) => e.unwrap_or_else(|| Rat::from_integer(0.into())),
    };
    let free = psi.free_vars();
    let mut taken: Vec<&str> = free.iter().map(|s| s.as_str()).collect();
    taken.extend([y, z]);
    let w = fresh(&taken, "w");
    let a = &LinearTerm::var(y) - &LinearTerm::var(z);
    let b = &LinearTerm::var(w.as_str()) - &LinearTerm::var(z);
    let le = |lhs: &LinearTerm, rhs: &LinearTerm| normalize_atom(&(lhs - rhs) - &LinearTerm::constant(eps.clone()), Relation::Le, sort);
    let neg_a = -&a;
    let neg_b = -&b;
    let closer = Formula::or(vec![
        Formula::and(vec![le(&a, &b)?, le(&neg_a, &b)?]),
        Formula::and(vec![le(&a, &neg_b)?, le(&neg_a, &neg_b)?]),
    ]);
    let body = Formula::implies(psi.substitute_term(y, &LinearTerm::var(w.as_str())), closer);
    Ok(eliminate_quantifiers(&Formula::forall(w, sort, body))?.formula)
}
