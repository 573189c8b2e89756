use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::project::witness_cases;
use super::simplify::simplify_cell;
use super::{check_validity, infer_sorts, qe, ArithError};
use crate::logic::text::{parse_formula, parse_term};
use crate::logic::{
    cell_formula, to_dnf, Cell, Formula, LinearTerm, LogicError, Sort, SortEnv, Valuation,
    DEFAULT_CELL_BUDGET,
};

/// Guarded decision tree with one linear term per output at each leaf.
#[derive(Clone, Debug, PartialEq)]
pub enum SkolemTree {
    Leaf(BTreeMap<String, LinearTerm>),
    Node {
        guard: Formula,
        then: Box<SkolemTree>,
        otherwise: Box<SkolemTree>,
    },
}

impl SkolemTree {
    fn eval(&self, v: &Valuation) -> Result<&BTreeMap<String, LinearTerm>, LogicError> {
        let mut node = self;
        loop {
            match node {
                SkolemTree::Leaf(out) => return Ok(out),
                SkolemTree::Node {
                    guard,
                    then,
                    otherwise,
                } => node = if guard.eval_fast(v)? { then } else { otherwise },
            }
        }
    }

    /// Root-to-leaf paths as (conditions, leaf); a condition is a guard and
    /// the branch taken.
    pub fn paths(&self) -> Vec<(Vec<(&Formula, bool)>, &BTreeMap<String, LinearTerm>)> {
        let mut out = Vec::new();
        let mut stack = vec![(self, Vec::new())];
        while let Some((node, conds)) = stack.pop() {
            match node {
                SkolemTree::Leaf(leaf) => out.push((conds, leaf)),
                SkolemTree::Node {
                    guard,
                    then,
                    otherwise,
                } => {
                    let mut c_else = conds.clone();
                    c_else.push((guard, false));
                    stack.push((otherwise.as_ref(), c_else));
                    let mut c_then = conds;
                    c_then.push((guard, true));
                    stack.push((then.as_ref(), c_then));
                }
            }
        }
        out
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            SkolemTree::Leaf(_) => 1,
            SkolemTree::Node { then, otherwise, .. } => then.leaf_count() + otherwise.leaf_count(),
        }
    }
}

/// A total function from inputs to outputs witnessing `∀inputs. ∃outputs. ψ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SkolemFunction {
    pub inputs: Vec<(String, Sort)>,
    pub outputs: Vec<(String, Sort)>,
    pub tree: SkolemTree,
}

impl SkolemFunction {
    /// Output valuation for the given inputs; extra entries in `v` are ignored.
    pub fn eval(&self, v: &Valuation) -> Result<Valuation, LogicError> {
        let leaf = self.tree.eval(v)?;
        leaf.iter()
            .map(|(name, t)| Ok((name.clone(), t.eval(v)?)))
            .collect()
    }

    pub fn is_int(&self) -> bool {
        self.inputs.iter().chain(&self.outputs).all(|(_, s)| *s == Sort::Int)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(FunctionDoc::from(self)).expect("serializable")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, ArithError> {
        let doc: FunctionDoc =
            serde_json::from_value(value.clone()).map_err(|e| ArithError::Artifact(e.to_string()))?;
        doc.into_function()
    }
}

impl fmt::Display for SkolemFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(t: &SkolemTree, depth: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let pad = "  ".repeat(depth);
            match t {
                SkolemTree::Leaf(out) => {
                    let parts: Vec<String> = out.iter().map(|(k, v)| format!("{k} := {v}")).collect();
                    writeln!(f, "{pad}{}", parts.join(", "))
                }
                SkolemTree::Node {
                    guard,
                    then,
                    otherwise,
                } => {
                    writeln!(f, "{pad}if {guard}")?;
                    go(then, depth + 1, f)?;
                    writeln!(f, "{pad}else")?;
                    go(otherwise, depth + 1, f)
                }
            }
        }
        go(&self.tree, 0, f)
    }
}

#[derive(Serialize, Deserialize)]
struct VarDoc {
    name: String,
    sort: Sort,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NodeDoc {
    Node {
        guard: String,
        then: Box<NodeDoc>,
        #[serde(rename = "else")]
        otherwise: Box<NodeDoc>,
    },
    Leaf {
        outputs: BTreeMap<String, String>,
    },
}

#[derive(Serialize, Deserialize)]
struct FunctionDoc {
    inputs: Vec<VarDoc>,
    outputs: Vec<VarDoc>,
    tree: NodeDoc,
}

impl From<&SkolemFunction> for FunctionDoc {
    fn from(f: &SkolemFunction) -> Self {
        fn node(t: &SkolemTree) -> NodeDoc {
            match t {
                SkolemTree::Leaf(out) => NodeDoc::Leaf {
                    outputs: out.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
                },
                SkolemTree::Node {
                    guard,
                    then,
                    otherwise,
                } => NodeDoc::Node {
                    guard: guard.to_string(),
                    then: Box::new(node(then)),
                    otherwise: Box::new(node(otherwise)),
                },
            }
        }
        let vars = |vs: &[(String, Sort)]| {
            vs.iter()
                .map(|(n, s)| VarDoc {
                    name: n.clone(),
                    sort: *s,
                })
                .collect()
        };
        FunctionDoc {
            inputs: vars(&f.inputs),
            outputs: vars(&f.outputs),
            tree: node(&f.tree),
        }
    }
}

impl FunctionDoc {
    fn into_function(self) -> Result<SkolemFunction, ArithError> {
        let pairs = |vs: Vec<VarDoc>| -> Vec<(String, Sort)> { vs.into_iter().map(|v| (v.name, v.sort)).collect() };
        let inputs = pairs(self.inputs);
        let outputs = pairs(self.outputs);
        let env: SortEnv = inputs.iter().cloned().collect();
        fn node(d: NodeDoc, env: &SortEnv, outputs: &[(String, Sort)]) -> Result<SkolemTree, ArithError> {
            Ok(match d {
                NodeDoc::Leaf { outputs: out } => {
                    let mut leaf = BTreeMap::new();
                    for (name, _) in outputs {
                        let text = out
                            .get(name)
                            .ok_or_else(|| ArithError::Artifact(format!("leaf lacks output `{name}`")))?;
                        leaf.insert(name.clone(), parse_term(text, env)?);
                    }
                    if out.len() != outputs.len() {
                        return Err(ArithError::Artifact("leaf has undeclared outputs".into()));
                    }
                    SkolemTree::Leaf(leaf)
                }
                NodeDoc::Node {
                    guard,
                    then,
                    otherwise,
                } => SkolemTree::Node {
                    guard: parse_formula(&guard, env)?,
                    then: Box::new(node(*then, env, outputs)?),
                    otherwise: Box::new(node(*otherwise, env, outputs)?),
                },
            })
        }
        let tree = node(self.tree, &env, &outputs)?;
        Ok(SkolemFunction { inputs, outputs, tree })
    }
}

/// Split `∀x̄. ∃ȳ. ψ` into its blocks; free variables count as inputs.
fn prefix(f: &Formula) -> (Vec<(String, Sort)>, Vec<(String, Sort)>, Formula) {
    let mut inputs: Vec<(String, Sort)> = infer_sorts(f).into_iter().collect();
    let mut node = f;
    while let Formula::Forall(v, s, b) = node {
        inputs.push((v.clone(), *s));
        node = b;
    }
    let mut outputs = Vec::new();
    while let Formula::Exists(v, s, b) = node {
        outputs.push((v.clone(), *s));
        node = b;
    }
    (inputs, outputs, node.clone())
}

/// Guarded leaves for one cell: eliminate outputs innermost first, then
/// back-substitute so every leaf term mentions inputs only.
fn cell_leaves(cell: &[crate::logic::Lit], outputs: &[(String, Sort)]) -> Vec<(Cell, Vec<LinearTerm>)> {
    let Some(((last, sort), rest)) = outputs.split_last() else {
        return vec![(cell.to_vec(), Vec::new())];
    };
    let mut out = Vec::new();
    for case in witness_cases(cell, last, *sort) {
        for (guard, mut terms) in cell_leaves(&case.guard, rest) {
            let mut w = case.witness.clone();
            for ((o, _), t) in rest.iter().zip(&terms) {
                w = w.substitute(o, t);
            }
            terms.push(w);
            out.push((guard, terms));
        }
    }
    out
}

/// Skolem function for a valid `∀x̄. ∃ȳ. ψ`.
///
/// Inner quantifiers of ψ are eliminated first. Leaves come from the DNF
/// cells of ψ in order, cells that constrain an output ahead of the rest.
/// Every leaf is checked against ψ before the function is returned.
pub fn synthesize_skolem(f: &Formula) -> Result<SkolemFunction, ArithError> {
    let f = f.uniquify_bound();
    let (inputs, outputs, body) = prefix(&f);
    let psi = qe::qe(&body)?;
    let cells = to_dnf(&psi, DEFAULT_CELL_BUDGET)?;
    let mentions_output = |c: &Cell| c.iter().any(|l| outputs.iter().any(|(o, _)| l.atom.mentions(o)));
    let (mut ordered, rest): (Vec<Cell>, Vec<Cell>) = cells.into_iter().partition(|c| mentions_output(c));
    ordered.extend(rest);

    // Leaves whose guard is covered by earlier ones are dropped; once the
    // guards cover everything the last leaf becomes the default.
    let mut leaves: Vec<(Cell, Vec<LinearTerm>)> = Vec::new();
    let mut total = false;
    'cells: for cell in ordered.iter().filter_map(|c| simplify_cell(c)) {
        for (guard, terms) in cell_leaves(&cell, &outputs) {
            if leaves.iter().any(|(g, _)| *g == guard) {
                continue;
            }
            let earlier = Formula::or(leaves.iter().map(|(g, _)| cell_formula(g)).collect());
            if !leaves.is_empty() && check_validity(&Formula::implies(cell_formula(&guard), earlier.clone()))? {
                continue;
            }
            let g = cell_formula(&guard);
            leaves.push((guard, terms));
            if check_validity(&Formula::or(vec![earlier, g]))? {
                total = true;
                break 'cells;
            }
        }
    }
    if !total {
        return Err(ArithError::Invalid(f.to_string()));
    }
    for (guard, terms) in &leaves {
        let mut inst = psi.clone();
        for ((o, _), t) in outputs.iter().zip(terms) {
            inst = inst.substitute_term(o, t);
        }
        let g = cell_formula(guard);
        if !check_validity(&Formula::implies(g.clone(), inst))? {
            return Err(ArithError::WitnessRejected(g.to_string()));
        }
    }

    let leaf_of = |terms: Vec<LinearTerm>| SkolemTree::Leaf(outputs.iter().map(|(o, _)| o.clone()).zip(terms).collect());
    let (_, last) = leaves.pop().expect("a covering set is nonempty");
    let mut tree = leaf_of(last);
    for (guard, terms) in leaves.into_iter().rev() {
        let leaf = leaf_of(terms);
        tree = if leaf == tree {
            tree
        } else {
            SkolemTree::Node {
                guard: cell_formula(&guard),
                then: Box::new(leaf),
                otherwise: Box::new(tree),
            }
        };
    }
    Ok(SkolemFunction { inputs, outputs, tree })
}
