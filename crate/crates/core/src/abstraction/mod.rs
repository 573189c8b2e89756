//! Boolean abstraction: choices, valid reactions and the Boolean
//! specification `direct && G(legal -> extra)`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{check_validity, eliminate_quantifiers, find_model, simplify, ArithError};
use crate::logic::text::parse_formula;
use crate::logic::{Formula, LogicError, SortEnv, Valuation};
use crate::spec::{parse_spec, prop_name, LtlTSpec, SpecError};

pub const DEFAULT_MAX_LITERALS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AbstractionError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("{literals} literals give 2^{literals} choices; the limit is {limit} literals")]
    ChoiceBudgetExceeded { literals: usize, limit: usize },
    #[error("malformed abstraction artifact: {0}")]
    Artifact(String),
}

impl From<LogicError> for AbstractionError {
    fn from(e: LogicError) -> Self {
        AbstractionError::Arith(e.into())
    }
}

/// A valuation of the propositions; bit `i` set means literal `i` holds.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Choice {
    bits: Vec<bool>,
}

impl Choice {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Choice number `index` in the order where `c_0` sets every bit and
    /// the last choice sets none.
    pub fn from_index(index: usize, n: usize) -> Self {
        Self {
            bits: (0..n).map(|i| index >> (n - 1 - i) & 1 == 0).collect(),
        }
    }

    pub fn index(&self) -> usize {
        self.bits.iter().fold(0, |acc, b| acc << 1 | usize::from(!b))
    }

    pub fn all(n: usize) -> impl Iterator<Item = Choice> {
        (0..1usize << n).map(move |i| Choice::from_index(i, n))
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits[i]
    }

    /// `"110"` for `{s0, s1}` out of three propositions.
    pub fn bitstring(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn parse_bits(s: &str) -> Option<Choice> {
        s.chars()
            .map(|c| match c {
                '1' => Some(true),
                '0' => Some(false),
                _ => None,
            })
            .collect::<Option<Vec<bool>>>()
            .map(Choice::new)
    }

    /// Propositional cube, e.g. `(s0 && s1 && !(s2))`.
    pub fn cube(&self) -> String {
        let lits: Vec<String> = self
            .bits
            .iter()
            .enumerate()
            .map(|(i, &b)| if b { prop_name(i) } else { format!("!({})", prop_name(i)) })
            .collect();
        format!("({})", lits.join(" && "))
    }
}

impl Ord for Choice {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.len(), self.index()).cmp(&(other.len(), other.index()))
    }
}

impl PartialOrd for Choice {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set: Vec<String> = (0..self.len()).filter(|&i| self.bits[i]).map(prop_name).collect();
        write!(f, "c{}={{{}}}", self.index(), set.join(","))
    }
}

/// `f_c`: every literal in `c` true and every other literal false.
pub fn characteristic_choice(c: &Choice, spec: &LtlTSpec) -> Formula {
    Formula::and(
        (0..spec.literals.len())
            .map(|i| {
                let l = spec.literal_formula(i);
                if c.contains(i) {
                    l
                } else {
                    Formula::not(l)
                }
            })
            .collect(),
    )
}

/// Environment inputs from which the system can realize `c`: `∃ȳ. f_c`.
pub fn choice_region(c: &Choice, spec: &LtlTSpec) -> Result<Formula, AbstractionError> {
    let f = Formula::exists_all(&spec.sys_vars, characteristic_choice(c, spec));
    Ok(eliminate_quantifiers(&f)?.formula)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReactionEntry {
    pub letter: String,
    /// Sorted by choice index.
    pub reaction: Vec<Choice>,
    /// Quantifier-free region over the environment variables.
    pub region: Formula,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidReactionTable {
    pub entries: Vec<ReactionEntry>,
}

impl ValidReactionTable {
    pub fn letter_index(&self, letter: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.letter == letter)
    }

    pub fn letters(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.letter.clone()).collect()
    }

    /// Validity checks that the regions are exhaustive and pairwise disjoint.
    pub fn verify_partition(&self) -> Result<bool, AbstractionError> {
        let regions: Vec<Formula> = self.entries.iter().map(|e| e.region.clone()).collect();
        if !check_validity(&Formula::or(regions.clone()))? {
            return Ok(false);
        }
        for i in 0..regions.len() {
            for j in i + 1..regions.len() {
                let both = Formula::and(vec![regions[i].clone(), regions[j].clone()]);
                if !check_validity(&Formula::not(both))? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Discover the valid reactions by model search: each model of the inputs
/// not yet covered fixes the feasible choice set there, whose exact cell
/// is recorded and blocked.
pub fn enumerate_valid_reactions(spec: &LtlTSpec) -> Result<ValidReactionTable, AbstractionError> {
    enumerate_with_limit(spec, DEFAULT_MAX_LITERALS)
}

pub fn enumerate_with_limit(spec: &LtlTSpec, limit: usize) -> Result<ValidReactionTable, AbstractionError> {
    let n = spec.literals.len();
    if n > limit {
        return Err(AbstractionError::ChoiceBudgetExceeded { literals: n, limit });
    }
    let choices: Vec<Choice> = Choice::all(n).collect();
    let regions = choices
        .iter()
        .map(|c| choice_region(c, spec))
        .collect::<Result<Vec<_>, _>>()?;
    let env = spec.env_names();
    let mut entries: Vec<ReactionEntry> = Vec::new();
    loop {
        let uncovered = Formula::and(entries.iter().map(|e| Formula::not(e.region.clone())).collect());
        let Some(model) = find_model(&uncovered, &env)? else {
            break;
        };
        let mut reaction = Vec::new();
        let mut cell = Vec::new();
        for (c, r) in choices.iter().zip(&regions) {
            if r.eval(&model)? {
                reaction.push(c.clone());
                cell.push(r.clone());
            } else {
                cell.push(Formula::not(r.clone()));
            }
        }
        let region = simplify(&Formula::and(cell))?;
        entries.push(ReactionEntry {
            letter: format!("e{}", entries.len()),
            reaction,
            region,
        });
    }
    Ok(ValidReactionTable { entries })
}

/// The Boolean specification with its reaction table.
#[derive(Clone, Debug, PartialEq)]
pub struct BooleanSpec {
    pub spec: LtlTSpec,
    pub table: ValidReactionTable,
}

pub fn booleanize(spec: &LtlTSpec) -> Result<BooleanSpec, AbstractionError> {
    Ok(BooleanSpec {
        spec: spec.clone(),
        table: enumerate_valid_reactions(spec)?,
    })
}

#[derive(Serialize, Deserialize)]
struct EntryDoc {
    letter: String,
    region: String,
    choices: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct BooleanSpecDoc {
    spec: String,
    literals: Vec<String>,
    propositions: Vec<String>,
    letters: Vec<String>,
    direct: String,
    legal: String,
    extra: String,
    table: Vec<EntryDoc>,
}

impl BooleanSpec {
    pub fn props(&self) -> Vec<String> {
        (0..self.spec.literals.len()).map(prop_name).collect()
    }

    pub fn num_props(&self) -> usize {
        self.spec.literals.len()
    }

    /// The property over propositions.
    pub fn direct(&self) -> String {
        self.spec.direct_abstraction()
    }

    /// Exactly one letter holds.
    pub fn legal(&self) -> String {
        let ls = self.table.letters();
        match ls.len() {
            1 => ls[0].clone(),
            2 => format!("({} || {}) && ({} <-> !({}))", ls[0], ls[1], ls[0], ls[1]),
            _ => {
                let mut parts = vec![format!("({})", ls.join(" || "))];
                for i in 0..ls.len() {
                    for j in i + 1..ls.len() {
                        parts.push(format!("!({} && {})", ls[i], ls[j]));
                    }
                }
                parts.join(" && ")
            }
        }
    }

    /// Each letter implies the disjunction of its reaction's cubes.
    pub fn extra(&self) -> String {
        let parts: Vec<String> = self
            .table
            .entries
            .iter()
            .map(|e| {
                let cubes: Vec<String> = e.reaction.iter().map(|c| c.cube()).collect();
                format!("({} -> ({}))", e.letter, cubes.join(" || "))
            })
            .collect();
        parts.join(" && ")
    }

    pub fn full(&self) -> String {
        format!("{} && G(({}) -> ({}))", self.direct(), self.legal(), self.extra())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let doc = BooleanSpecDoc {
            spec: self.spec.render(),
            literals: self.spec.literals.iter().map(|l| l.to_string()).collect(),
            propositions: self.props(),
            letters: self.table.letters(),
            direct: self.direct(),
            legal: self.legal(),
            extra: self.extra(),
            table: self
                .table
                .entries
                .iter()
                .map(|e| EntryDoc {
                    letter: e.letter.clone(),
                    region: e.region.to_string(),
                    choices: e.reaction.iter().map(|c| c.bitstring()).collect(),
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("serializable")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, AbstractionError> {
        let bad = |m: String| AbstractionError::Artifact(m);
        let doc: BooleanSpecDoc = serde_json::from_value(value.clone()).map_err(|e| bad(e.to_string()))?;
        let spec = parse_spec(&doc.spec)?;
        let lits: Vec<String> = spec.literals.iter().map(|l| l.to_string()).collect();
        if lits != doc.literals {
            return Err(bad(format!("literal table {:?} differs from the parsed literals {lits:?}", doc.literals)));
        }
        let env: SortEnv = spec.env_vars.iter().cloned().collect();
        let n = spec.literals.len();
        let mut entries = Vec::new();
        for e in doc.table {
            let region = parse_formula(&e.region, &env)?;
            let mut reaction = Vec::new();
            for b in &e.choices {
                let c = Choice::parse_bits(b)
                    .filter(|c| c.len() == n)
                    .ok_or_else(|| bad(format!("choice `{b}` is not a {n}-bit string")))?;
                reaction.push(c);
            }
            reaction.sort();
            entries.push(ReactionEntry {
                letter: e.letter,
                reaction,
                region,
            });
        }
        let table = ValidReactionTable { entries };
        if table.letters() != doc.letters {
            return Err(bad("letter list does not match the table".into()));
        }
        Ok(BooleanSpec { spec, table })
    }

    /// Letter index and choice realized by a concrete input/output pair.
    pub fn observed_choice(&self, v: &Valuation) -> Result<Choice, LogicError> {
        Ok(Choice::new(self.spec.literal_values(v)?))
    }
}
