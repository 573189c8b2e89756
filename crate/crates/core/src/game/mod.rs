//! Safety games for the `G`/`X`-depth-one fragment and the Mealy machines
//! extracted from them.
//!
//! A game state is the set of valuations still allowed for the literals
//! that occur under `X`, encoded as a bit mask over those valuations.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::{BooleanSpec, Choice};
use crate::spec::{classify_fragment, Fragment, LtlNode};

/// More literals under `X` than this and the state masks no longer fit.
pub const MAX_NEXT_LITERALS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("property is outside the G/X safety fragment: {0}")]
    Fragment(String),
    #[error("malformed controller artifact: {0}")]
    Schema(String),
    #[error("controller output in state `{state}` for letter `{letter}` is not in the letter's reaction")]
    ExtraViolation { state: String, letter: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Obligation {
    /// Before the first step; top-level constraints still apply.
    Initial,
    Allowed(u64),
}

#[derive(Clone, Debug)]
pub struct SafetyGame {
    pub letters: Vec<String>,
    pub reactions: Vec<Vec<Choice>>,
    /// Literal indices under `X`.
    pub next_literals: Vec<usize>,
    pub states: Vec<Obligation>,
    pub initial: usize,
    /// `moves[q][e]`: legal (choice, successor) pairs in choice order.
    pub moves: Vec<Vec<Vec<(Choice, usize)>>>,
}

pub fn build_game(b: &BooleanSpec) -> Result<SafetyGame, GameError> {
    let property = &b.spec.property;
    if classify_fragment(property) != Fragment::GXSafety {
        return Err(GameError::Fragment(b.direct()));
    }
    let conjuncts: Vec<&LtlNode> = match property {
        LtlNode::And(ps) => ps.iter().collect(),
        other => vec![other],
    };
    let mut always = Vec::new();
    let mut first: Vec<LtlNode> = Vec::new();
    for c in conjuncts {
        match c {
            LtlNode::Globally(body) => always.push(body.as_ref().clone()),
            other => first.push(other.clone()),
        }
    }
    first.extend(always.iter().cloned());
    let xs = property.next_literals();
    if xs.len() > MAX_NEXT_LITERALS {
        return Err(GameError::Fragment(format!(
            "{} literals under X; at most {MAX_NEXT_LITERALS} are supported",
            xs.len()
        )));
    }
    let n = b.num_props();
    let m = xs.len();
    let all: u64 = if m == 6 { u64::MAX } else { (1u64 << (1 << m)) - 1 };
    let project = |c: &Choice| xs.iter().fold(0usize, |acc, &i| acc << 1 | usize::from(c.contains(i)));
    let next_of = |w: usize| {
        let mut bits = vec![false; n];
        for (k, &i) in xs.iter().enumerate() {
            bits[i] = w >> (m - 1 - k) & 1 == 1;
        }
        bits
    };
    let nexts: Vec<Vec<bool>> = (0..1usize << m).map(next_of).collect();

    let letters = b.table.letters();
    let reactions: Vec<Vec<Choice>> = b.table.entries.iter().map(|e| e.reaction.clone()).collect();
    let start = if first.len() == always.len() {
        Obligation::Allowed(all)
    } else {
        Obligation::Initial
    };
    let mut states = vec![start];
    let mut index: BTreeMap<Obligation, usize> = BTreeMap::from([(start, 0)]);
    let mut moves: Vec<Vec<Vec<(Choice, usize)>>> = Vec::new();
    let mut q = 0;
    while q < states.len() {
        let (allowed, constraints) = match states[q] {
            Obligation::Initial => (all, &first),
            Obligation::Allowed(a) => (a, &always),
        };
        let mut per_letter = Vec::new();
        for r in &reactions {
            let mut legal = Vec::new();
            for c in r {
                if allowed >> project(c) & 1 == 0 {
                    continue;
                }
                let mut next = 0u64;
                for (w, nb) in nexts.iter().enumerate() {
                    if constraints.iter().all(|k| k.eval_step(c.bits(), nb)) {
                        next |= 1 << w;
                    }
                }
                if next == 0 {
                    continue;
                }
                let key = Obligation::Allowed(next);
                let to = *index.entry(key).or_insert_with(|| {
                    states.push(key);
                    states.len() - 1
                });
                legal.push((c.clone(), to));
            }
            per_letter.push(legal);
        }
        moves.push(per_letter);
        q += 1;
    }
    Ok(SafetyGame {
        letters,
        reactions,
        next_literals: xs,
        states,
        initial: 0,
        moves,
    })
}

/// Outcome of solving a game.
#[derive(Clone, Debug, PartialEq)]
pub enum Synthesis {
    Realizable(MealyMachine),
    /// Letters that force a dead end against the least-choice system.
    Unrealizable(Vec<String>),
}

/// Build and solve the game of a Boolean specification.
pub fn synthesize(b: &BooleanSpec) -> Result<Synthesis, GameError> {
    Ok(build_game(b)?.solve())
}

impl SafetyGame {
    /// Greatest fixpoint of the states from which every letter has a move
    /// staying inside; `rank[q]` is the round in which a losing `q` fell.
    fn winning(&self) -> (Vec<bool>, Vec<usize>) {
        let k = self.states.len();
        let mut win = vec![true; k];
        let mut rank = vec![0; k];
        let mut round = 0;
        loop {
            round += 1;
            let lose: Vec<usize> = (0..k)
                .filter(|&q| win[q])
                .filter(|&q| self.moves[q].iter().any(|ms| !ms.iter().any(|(_, to)| win[*to])))
                .collect();
            if lose.is_empty() {
                return (win, rank);
            }
            for q in lose {
                win[q] = false;
                rank[q] = round;
            }
        }
    }

    /// Solve and extract the least-choice winning strategy.
    pub fn solve(&self) -> Synthesis {
        let (win, rank) = self.winning();
        if !win[self.initial] {
            return Synthesis::Unrealizable(self.counter_play(&win, &rank));
        }
        let mut ids: BTreeMap<usize, usize> = BTreeMap::from([(self.initial, 0)]);
        let mut order = vec![self.initial];
        let mut queue = VecDeque::from([self.initial]);
        let mut delta: Vec<Vec<(usize, Choice)>> = Vec::new();
        while let Some(q) = queue.pop_front() {
            let mut row = Vec::new();
            for ms in &self.moves[q] {
                let (c, to) = ms.iter().find(|(_, to)| win[*to]).expect("winning state");
                let id = *ids.entry(*to).or_insert_with(|| {
                    order.push(*to);
                    queue.push_back(*to);
                    order.len() - 1
                });
                row.push((id, c.clone()));
            }
            delta.push(row);
        }
        let n = self.reactions.iter().flatten().map(|c| c.len()).next().unwrap_or(0);
        Synthesis::Realizable(MealyMachine {
            letters: self.letters.clone(),
            props: (0..n).map(crate::spec::prop_name).collect(),
            states: (0..order.len()).map(|i| format!("q{i}")).collect(),
            initial: 0,
            delta,
        })
    }

    fn counter_play(&self, win: &[bool], rank: &[usize]) -> Vec<String> {
        let mut q = self.initial;
        let mut out = Vec::new();
        loop {
            let (e, ms) = self.moves[q]
                .iter()
                .enumerate()
                .find(|(_, ms)| ms.iter().all(|(_, to)| !win[*to] && rank[*to] < rank[q]))
                .expect("losing state has a forcing letter");
            out.push(self.letters[e].clone());
            match ms.first() {
                None => return out,
                Some((_, to)) => q = *to,
            }
        }
    }

    /// Follow `letters` with the least-choice system; true when some step
    /// leaves the system without a legal move.
    pub fn replay_dead_end(&self, letters: &[String]) -> bool {
        let mut q = self.initial;
        for l in letters {
            let Some(e) = self.letters.iter().position(|x| x == l) else {
                return false;
            };
            match self.moves[q][e].first() {
                None => return true,
                Some((_, to)) => q = *to,
            }
        }
        false
    }
}

/// A Boolean controller: `delta[q][e] = (q', output)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MealyMachine {
    pub letters: Vec<String>,
    pub props: Vec<String>,
    pub states: Vec<String>,
    pub initial: usize,
    pub delta: Vec<Vec<(usize, Choice)>>,
}

#[derive(Serialize, Deserialize)]
struct TransitionDoc {
    from: String,
    letter: String,
    to: String,
    output: String,
}

#[derive(Serialize, Deserialize)]
struct MealyDoc {
    letters: Vec<String>,
    propositions: Vec<String>,
    states: Vec<String>,
    initial: String,
    transitions: Vec<TransitionDoc>,
}

impl MealyMachine {
    pub fn step(&self, q: usize, letter: usize) -> (usize, &Choice) {
        let (to, c) = &self.delta[q][letter];
        (*to, c)
    }

    /// Every output a reachable transition can emit, as (letter, choice).
    pub fn emitted(&self) -> Vec<(usize, Choice)> {
        let mut out: Vec<(usize, Choice)> = self
            .delta
            .iter()
            .flat_map(|row| row.iter().enumerate().map(|(e, (_, c))| (e, c.clone())))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut transitions = Vec::new();
        for (q, row) in self.delta.iter().enumerate() {
            for (e, (to, c)) in row.iter().enumerate() {
                transitions.push(TransitionDoc {
                    from: self.states[q].clone(),
                    letter: self.letters[e].clone(),
                    to: self.states[*to].clone(),
                    output: c.bitstring(),
                });
            }
        }
        serde_json::to_value(MealyDoc {
            letters: self.letters.clone(),
            propositions: self.props.clone(),
            states: self.states.clone(),
            initial: self.states[self.initial].clone(),
            transitions,
        })
        .expect("serializable")
    }

    /// Load a machine and check it against the abstraction: same letters
    /// and propositions, a transition for every (state, letter) pair and
    /// every output inside its letter's reaction.
    pub fn from_json(value: &serde_json::Value, b: &BooleanSpec) -> Result<Self, GameError> {
        let schema = |m: String| GameError::Schema(m);
        let doc: MealyDoc = serde_json::from_value(value.clone()).map_err(|e| schema(e.to_string()))?;
        if doc.letters != b.table.letters() {
            return Err(schema(format!("letters {:?} do not match the abstraction", doc.letters)));
        }
        if doc.propositions != b.props() {
            return Err(schema(format!("propositions {:?} do not match the abstraction", doc.propositions)));
        }
        let find = |names: &[String], n: &str, what: &str| {
            names
                .iter()
                .position(|x| x == n)
                .ok_or_else(|| schema(format!("unknown {what} `{n}`")))
        };
        for (i, s) in doc.states.iter().enumerate() {
            if doc.states[..i].contains(s) {
                return Err(schema(format!("state `{s}` listed twice")));
            }
        }
        let initial = find(&doc.states, &doc.initial, "state")?;
        let mut delta: Vec<Vec<Option<(usize, Choice)>>> = vec![vec![None; doc.letters.len()]; doc.states.len()];
        for t in &doc.transitions {
            let q = find(&doc.states, &t.from, "state")?;
            let e = find(&doc.letters, &t.letter, "letter")?;
            let to = find(&doc.states, &t.to, "state")?;
            let c = Choice::parse_bits(&t.output)
                .filter(|c| c.len() == doc.propositions.len())
                .ok_or_else(|| schema(format!("output `{}` is not a valid bit string", t.output)))?;
            if !b.table.entries[e].reaction.contains(&c) {
                return Err(GameError::ExtraViolation {
                    state: t.from.clone(),
                    letter: t.letter.clone(),
                });
            }
            if delta[q][e].replace((to, c)).is_some() {
                return Err(schema(format!("two transitions from `{}` on `{}`", t.from, t.letter)));
            }
        }
        // Only pairs reachable from the initial state must be defined.
        let mut seen = vec![false; doc.states.len()];
        let mut stack = vec![initial];
        seen[initial] = true;
        while let Some(q) = stack.pop() {
            for (e, slot) in delta[q].iter().enumerate() {
                let Some((to, _)) = slot else {
                    return Err(schema(format!(
                        "no transition from `{}` on `{}`",
                        doc.states[q], doc.letters[e]
                    )));
                };
                if !seen[*to] {
                    seen[*to] = true;
                    stack.push(*to);
                }
            }
        }
        let filler = b.table.entries.iter().map(|e| (initial, e.reaction[0].clone()));
        let filler: Vec<(usize, Choice)> = filler.collect();
        let delta = delta
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .zip(&filler)
                    .map(|(slot, f)| slot.unwrap_or_else(|| f.clone()))
                    .collect()
            })
            .collect();
        Ok(MealyMachine {
            letters: doc.letters,
            props: doc.propositions,
            states: doc.states,
            initial,
            delta,
        })
    }
}
