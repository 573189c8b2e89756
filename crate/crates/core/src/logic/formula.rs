use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{Atom, LinearTerm, LogicError, Sort, Valuation};

/// Boolean combinations of normalized atoms, optionally quantified.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(String, Sort, Box<Formula>),
    Forall(String, Sort, Box<Formula>),
}

impl Formula {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Formula::True
        } else {
            Formula::False
        }
    }

    /// Flattening conjunction with constant folding and duplicate removal.
    pub fn and(parts: Vec<Formula>) -> Self {
        let mut out: Vec<Formula> = Vec::with_capacity(parts.len());
        let mut seen = BTreeSet::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => {
                    for q in inner {
                        if seen.insert(q.clone()) {
                            out.push(q);
                        }
                    }
                }
                other => {
                    if seen.insert(other.clone()) {
                        out.push(other);
                    }
                }
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    /// Flattening disjunction with constant folding and duplicate removal.
    pub fn or(parts: Vec<Formula>) -> Self {
        let mut out: Vec<Formula> = Vec::with_capacity(parts.len());
        let mut seen = BTreeSet::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => {
                    for q in inner {
                        if seen.insert(q.clone()) {
                            out.push(q);
                        }
                    }
                }
                other => {
                    if seen.insert(other.clone()) {
                        out.push(other);
                    }
                }
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(inner) => *inner,
            Formula::Atom(a) if !matches!(a.rel(), super::Rel::Eq | super::Rel::Dvd(_)) => a.negate(),
            other => Formula::Not(Box::new(other)),
        }
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Self {
        Formula::or(vec![Formula::not(lhs), rhs])
    }

    pub fn exists(var: impl Into<String>, sort: Sort, body: Formula) -> Self {
        Formula::Exists(var.into(), sort, Box::new(body))
    }

    pub fn forall(var: impl Into<String>, sort: Sort, body: Formula) -> Self {
        Formula::Forall(var.into(), sort, Box::new(body))
    }

    /// Wrap `body` in a block of existential quantifiers (first var outermost).
    pub fn exists_all(vars: &[(String, Sort)], body: Formula) -> Self {
        vars.iter()
            .rev()
            .fold(body, |acc, (v, s)| Formula::exists(v.clone(), *s, acc))
    }

    /// Wrap `body` in a block of universal quantifiers (first var outermost).
    pub fn forall_all(vars: &[(String, Sort)], body: Formula) -> Self {
        vars.iter()
            .rev()
            .fold(body, |acc, (v, s)| Formula::forall(v.clone(), *s, acc))
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => true,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(Formula::is_quantifier_free),
            Formula::Exists(..) | Formula::Forall(..) => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                for v in a.term().vars() {
                    if !bound.iter().any(|b| b == v) {
                        out.insert(v.to_string());
                    }
                }
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_free(bound, out);
                }
            }
            Formula::Exists(v, _, f) | Formula::Forall(v, _, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn mentions(&self, var: &str) -> bool {
        match self {
            Formula::True | Formula::False => false,
            Formula::Atom(a) => a.mentions(var),
            Formula::Not(f) => f.mentions(var),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().any(|f| f.mentions(var)),
            Formula::Exists(v, _, f) | Formula::Forall(v, _, f) => v != var && f.mentions(var),
        }
    }

    /// All atoms in syntactic order.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |a| out.push(a));
        out
    }

    fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => f(a),
            Formula::Not(g) => g.visit_atoms(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_atoms(f)),
            Formula::Exists(_, _, g) | Formula::Forall(_, _, g) => g.visit_atoms(f),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 1,
            Formula::Not(f) => 1 + f.size(),
            Formula::And(fs) | Formula::Or(fs) => 1 + fs.iter().map(Formula::size).sum::<usize>(),
            Formula::Exists(_, _, f) | Formula::Forall(_, _, f) => 1 + f.size(),
        }
    }

    /// Exact evaluation of a quantifier-free formula.
    ///
    /// Every free variable must be assigned, even ones a short-circuit would
    /// skip.
    pub fn eval(&self, v: &Valuation) -> Result<bool, LogicError> {
        if !self.is_quantifier_free() {
            return Err(LogicError::Quantified);
        }
        if let Some(missing) = self.free_vars().into_iter().find(|x| !v.contains(x)) {
            return Err(LogicError::MissingVariable(missing));
        }
        self.eval_fast(v)
    }

    /// Short-circuiting evaluation without the up-front variable check.
    pub(crate) fn eval_fast(&self, v: &Valuation) -> Result<bool, LogicError> {
        Ok(match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(a) => a.eval(v)?,
            Formula::Not(f) => !f.eval_fast(v)?,
            Formula::And(fs) => {
                for f in fs {
                    if !f.eval_fast(v)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(fs) => {
                for f in fs {
                    if f.eval_fast(v)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Exists(..) | Formula::Forall(..) => return Err(LogicError::Quantified),
        })
    }

    /// Replace free variables by the constants in `bindings`, folding ground atoms.
    pub fn substitute(&self, bindings: &Valuation) -> Formula {
        if bindings.is_empty() {
            return self.clone();
        }
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => a.substitute_values(bindings),
            Formula::Not(f) => Formula::not(f.substitute(bindings)),
            Formula::And(fs) => Formula::and(fs.iter().map(|f| f.substitute(bindings)).collect()),
            Formula::Or(fs) => Formula::or(fs.iter().map(|f| f.substitute(bindings)).collect()),
            Formula::Exists(v, s, f) | Formula::Forall(v, s, f) => {
                let inner = if bindings.contains(v) {
                    let shadowed: Valuation = bindings
                        .iter()
                        .filter(|(k, _)| k != v)
                        .map(|(k, r)| (k.to_string(), r.clone()))
                        .collect();
                    f.substitute(&shadowed)
                } else {
                    f.substitute(bindings)
                };
                self.rebuild_quant(v, *s, inner)
            }
        }
    }

    fn rebuild_quant(&self, v: &str, s: Sort, body: Formula) -> Formula {
        match self {
            Formula::Exists(..) => Formula::exists(v, s, body),
            _ => Formula::forall(v, s, body),
        }
    }

    /// Replace free `var` by a linear term. Bound variables that would
    /// capture a variable of `by` are renamed first.
    pub fn substitute_term(&self, var: &str, by: &LinearTerm) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => a.substitute(var, by),
            Formula::Not(f) => Formula::not(f.substitute_term(var, by)),
            Formula::And(fs) => Formula::and(fs.iter().map(|f| f.substitute_term(var, by)).collect()),
            Formula::Or(fs) => Formula::or(fs.iter().map(|f| f.substitute_term(var, by)).collect()),
            Formula::Exists(v, s, f) | Formula::Forall(v, s, f) => {
                if v == var {
                    return self.clone();
                }
                if by.mentions(v) {
                    let fresh = fresh_name(v, &|n| by.mentions(n) || f.mentions(n) || n == var);
                    let renamed = f.substitute_term(v, &LinearTerm::var(fresh.clone()));
                    return self.rebuild_quant(&fresh, *s, renamed.substitute_term(var, by));
                }
                self.rebuild_quant(v, *s, f.substitute_term(var, by))
            }
        }
    }

    /// Rename bound variables so each binder introduces a distinct name that
    /// does not clash with any free variable.
    pub fn uniquify_bound(&self) -> Formula {
        let mut taken: BTreeSet<String> = self.free_vars();
        self.uniquify(&mut taken, &BTreeMap::new())
    }

    fn uniquify(&self, taken: &mut BTreeSet<String>, renames: &BTreeMap<String, String>) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => {
                let mut f = Formula::Atom(a.clone());
                for (from, to) in renames {
                    if a.mentions(from) {
                        f = f.substitute_term(from, &LinearTerm::var(to.clone()));
                    }
                }
                f
            }
            Formula::Not(f) => Formula::not(f.uniquify(taken, renames)),
            Formula::And(fs) => Formula::and(fs.iter().map(|f| f.uniquify(taken, renames)).collect()),
            Formula::Or(fs) => Formula::or(fs.iter().map(|f| f.uniquify(taken, renames)).collect()),
            Formula::Exists(v, s, f) | Formula::Forall(v, s, f) => {
                let name = if taken.contains(v) {
                    fresh_name(v, &|n| taken.contains(n))
                } else {
                    v.clone()
                };
                taken.insert(name.clone());
                let mut inner = renames.clone();
                inner.retain(|k, _| k != v);
                if &name != v {
                    inner.insert(v.clone(), name.clone());
                }
                let body = f.uniquify(taken, &inner);
                self.rebuild_quant(&name, *s, body)
            }
        }
    }
}

/// `base_1`, `base_2`, ...: the first candidate not rejected by `clash`.
pub(crate) fn fresh_name(base: &str, clash: &dyn Fn(&str) -> bool) -> String {
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|n| !clash(n))
        .expect("infinite candidates")
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => write!(f, "!({g})"),
            Formula::And(gs) | Formula::Or(gs) => {
                let sep = if matches!(self, Formula::And(_)) { " && " } else { " || " };
                f.write_str("(")?;
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    write!(f, "{g}")?;
                }
                f.write_str(")")
            }
            Formula::Exists(v, s, g) => write!(f, "(exists {v}:{s}. {g})"),
            Formula::Forall(v, s, g) => write!(f, "(forall {v}:{s}. {g})"),
        }
    }
}
