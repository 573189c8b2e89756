//! LTL specifications whose atoms are linear-arithmetic literals.
//!
//! ```text
//! spec := decl* ["property" ":"] ltl
//! decl := ("env" | "sys") ident ":" ("int" | "real") ";"
//! ltl  := "G" ltl | "F" ltl | "X" ltl | ltl "U" ltl | ltl "R" ltl
//!       | ltl "&&" ltl | ltl "||" ltl | "!" ltl | ltl "->" ltl | ltl "<->" ltl
//!       | "(" ltl ")" | "true" | "false" | term rel term | k "|" term
//! ```

use std::fmt;

use thiserror::Error;

use crate::logic::text::{syntax, Expr, Parser, Scope, TemporalOp, Tok};
use crate::logic::{Atom, Formula, LogicError, Sort, SortEnv, Valuation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("variable `{0}` is declared twice")]
    DuplicateDeclaration(String),
}

/// Temporal syntax tree over the literal table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LtlNode {
    True,
    False,
    Literal(usize),
    Not(Box<LtlNode>),
    And(Vec<LtlNode>),
    Or(Vec<LtlNode>),
    Implies(Box<LtlNode>, Box<LtlNode>),
    Iff(Box<LtlNode>, Box<LtlNode>),
    Next(Box<LtlNode>),
    Until(Box<LtlNode>, Box<LtlNode>),
    Release(Box<LtlNode>, Box<LtlNode>),
    Eventually(Box<LtlNode>),
    Globally(Box<LtlNode>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fragment {
    /// Conjunction of `G(b)` and plain constraints, `X` only on literals.
    GXSafety,
    General,
}

impl LtlNode {
    fn and(parts: Vec<LtlNode>) -> LtlNode {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                LtlNode::And(ps) => flat.extend(ps),
                p => flat.push(p),
            }
        }
        LtlNode::And(flat)
    }

    fn or(parts: Vec<LtlNode>) -> LtlNode {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                LtlNode::Or(ps) => flat.extend(ps),
                p => flat.push(p),
            }
        }
        LtlNode::Or(flat)
    }

    pub fn is_temporal(&self) -> bool {
        match self {
            LtlNode::True | LtlNode::False | LtlNode::Literal(_) => false,
            LtlNode::Not(a) => a.is_temporal(),
            LtlNode::And(ps) | LtlNode::Or(ps) => ps.iter().any(|p| p.is_temporal()),
            LtlNode::Implies(a, b) | LtlNode::Iff(a, b) => a.is_temporal() || b.is_temporal(),
            _ => true,
        }
    }

    /// Boolean combination of literals and `X` applied to a literal, a
    /// negated literal or a constant.
    fn is_step(&self) -> bool {
        match self {
            LtlNode::True | LtlNode::False | LtlNode::Literal(_) => true,
            LtlNode::Not(a) => a.is_step(),
            LtlNode::And(ps) | LtlNode::Or(ps) => ps.iter().all(|p| p.is_step()),
            LtlNode::Implies(a, b) | LtlNode::Iff(a, b) => a.is_step() && b.is_step(),
            LtlNode::Next(a) => !a.is_temporal() && a.is_literal_like(),
            _ => false,
        }
    }

    fn is_literal_like(&self) -> bool {
        match self {
            LtlNode::True | LtlNode::False | LtlNode::Literal(_) => true,
            LtlNode::Not(a) => matches!(**a, LtlNode::Literal(_)),
            _ => false,
        }
    }

    /// Literal indices occurring directly under `X`, sorted.
    pub fn next_literals(&self) -> Vec<usize> {
        fn go(n: &LtlNode, under_next: bool, out: &mut Vec<usize>) {
            match n {
                LtlNode::True | LtlNode::False => {}
                LtlNode::Literal(i) => {
                    if under_next {
                        out.push(*i)
                    }
                }
                LtlNode::Next(a) => go(a, true, out),
                LtlNode::Not(a) | LtlNode::Eventually(a) | LtlNode::Globally(a) => go(a, under_next, out),
                LtlNode::And(ps) | LtlNode::Or(ps) => ps.iter().for_each(|p| go(p, under_next, out)),
                LtlNode::Implies(a, b) | LtlNode::Iff(a, b) | LtlNode::Until(a, b) | LtlNode::Release(a, b) => {
                    go(a, under_next, out);
                    go(b, under_next, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, false, &mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Truth of a step formula given the current proposition values and,
    /// for `X` literals, the next ones.
    pub fn eval_step(&self, now: &[bool], next: &[bool]) -> bool {
        match self {
            LtlNode::True => true,
            LtlNode::False => false,
            LtlNode::Literal(i) => now[*i],
            LtlNode::Not(a) => !a.eval_step(now, next),
            LtlNode::And(ps) => ps.iter().all(|p| p.eval_step(now, next)),
            LtlNode::Or(ps) => ps.iter().any(|p| p.eval_step(now, next)),
            LtlNode::Implies(a, b) => !a.eval_step(now, next) || b.eval_step(now, next),
            LtlNode::Iff(a, b) => a.eval_step(now, next) == b.eval_step(now, next),
            LtlNode::Next(a) => a.eval_step(next, next),
            other => panic!("not a step formula: {other:?}"),
        }
    }

    /// Render with `name(i)` for literal `i`.
    pub fn render(&self, name: &dyn Fn(usize) -> String) -> String {
        let join = |ps: &[LtlNode], sep: &str| {
            let parts: Vec<String> = ps.iter().map(|p| p.render(name)).collect();
            format!("({})", parts.join(sep))
        };
        match self {
            LtlNode::True => "true".into(),
            LtlNode::False => "false".into(),
            LtlNode::Literal(i) => name(*i),
            LtlNode::Not(a) => format!("!({})", a.render(name)),
            LtlNode::And(ps) if ps.is_empty() => "true".into(),
            LtlNode::Or(ps) if ps.is_empty() => "false".into(),
            LtlNode::And(ps) => join(ps, " && "),
            LtlNode::Or(ps) => join(ps, " || "),
            LtlNode::Implies(a, b) => format!("({} -> {})", a.render(name), b.render(name)),
            LtlNode::Iff(a, b) => format!("({} <-> {})", a.render(name), b.render(name)),
            LtlNode::Until(a, b) => format!("({} U {})", a.render(name), b.render(name)),
            LtlNode::Release(a, b) => format!("({} R {})", a.render(name), b.render(name)),
            LtlNode::Next(a) => format!("X({})", a.render(name)),
            LtlNode::Eventually(a) => format!("F({})", a.render(name)),
            LtlNode::Globally(a) => format!("G({})", a.render(name)),
        }
    }
}

/// A parsed specification: variable split, property and literal table.
#[derive(Clone, Debug, PartialEq)]
pub struct LtlTSpec {
    pub env_vars: Vec<(String, Sort)>,
    pub sys_vars: Vec<(String, Sort)>,
    pub property: LtlNode,
    pub literals: Vec<Atom>,
}

/// Proposition name abstracting literal `i`.
pub fn prop_name(i: usize) -> String {
    format!("s{i}")
}

impl LtlTSpec {
    pub fn sorts(&self) -> SortEnv {
        self.env_vars.iter().chain(&self.sys_vars).cloned().collect()
    }

    pub fn env_names(&self) -> Vec<String> {
        self.env_vars.iter().map(|(v, _)| v.clone()).collect()
    }

    pub fn sys_names(&self) -> Vec<String> {
        self.sys_vars.iter().map(|(v, _)| v.clone()).collect()
    }

    pub fn literal_formula(&self, i: usize) -> Formula {
        Formula::Atom(self.literals[i].clone())
    }

    /// Literal truth values under a valuation of all variables.
    pub fn literal_values(&self, v: &Valuation) -> Result<Vec<bool>, LogicError> {
        self.literals.iter().map(|l| l.eval(v)).collect()
    }

    /// Property with literal `i` replaced by proposition `s_i`.
    pub fn direct_abstraction(&self) -> String {
        self.property.render(&prop_name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (kw, vars) in [("env", &self.env_vars), ("sys", &self.sys_vars)] {
            for (v, s) in vars {
                out.push_str(&format!("{kw} {v}:{s};\n"));
            }
        }
        let lits = |i: usize| format!("({})", self.literals[i]);
        out.push_str(&format!("property: {}\n", self.property.render(&lits)));
        out
    }
}

impl fmt::Display for LtlTSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Classify the temporal shape of a property.
pub fn classify_fragment(property: &LtlNode) -> Fragment {
    let conjuncts: &[LtlNode] = match property {
        LtlNode::And(ps) => ps,
        other => std::slice::from_ref(other),
    };
    let ok = conjuncts.iter().all(|c| match c {
        LtlNode::Globally(b) => b.is_step(),
        other => other.is_step(),
    });
    if ok {
        Fragment::GXSafety
    } else {
        Fragment::General
    }
}

/// Parse a specification text.
pub fn parse_spec(text: &str) -> Result<LtlTSpec, SpecError> {
    parse_spec_as(text, None)
}

/// Parse a specification, optionally reinterpreting every variable in one sort.
pub fn parse_spec_as(text: &str, theory: Option<Sort>) -> Result<LtlTSpec, SpecError> {
    let mut p = Parser::new(text, true)?;
    let mut env_vars = Vec::new();
    let mut sys_vars = Vec::new();
    loop {
        let kw = match p.peek() {
            Tok::Ident(s) if s == "env" || s == "sys" => s.clone(),
            _ => break,
        };
        p.bump();
        let (name, _) = p.ident()?;
        p.expect(Tok::Colon, "`:`")?;
        let sort = p.sort()?;
        p.expect(Tok::Semi, "`;`")?;
        if env_vars.iter().chain(&sys_vars).any(|(v, _): &(String, Sort)| *v == name) {
            return Err(SpecError::DuplicateDeclaration(name));
        }
        let sort = theory.unwrap_or(sort);
        if kw == "env" {
            env_vars.push((name, sort));
        } else {
            sys_vars.push((name, sort));
        }
    }
    if matches!(p.peek(), Tok::Ident(s) if s == "property") {
        p.bump();
        p.expect(Tok::Colon, "`:`")?;
    }
    let e = p.expr(0)?;
    if !p.at_eof() {
        return Err(syntax(p.pos(), format!("trailing input {:?}", p.peek())).into());
    }
    let env: SortEnv = env_vars.iter().chain(&sys_vars).cloned().collect();
    let mut literals = Vec::new();
    let property = type_ltl(&e, &env, &mut literals)?;
    Ok(LtlTSpec {
        env_vars,
        sys_vars,
        property,
        literals,
    })
}

/// Literal-table lookup; an atom whose negation is already a literal is
/// stored as the negated literal.
fn intern(a: &Atom, literals: &mut Vec<Atom>) -> LtlNode {
    if let Some(i) = literals.iter().position(|l| l == a) {
        return LtlNode::Literal(i);
    }
    if let Some(n) = a.negated_atom() {
        if let Some(i) = literals.iter().position(|l| *l == n) {
            return LtlNode::Not(Box::new(LtlNode::Literal(i)));
        }
    }
    literals.push(a.clone());
    LtlNode::Literal(literals.len() - 1)
}

fn from_formula(f: &Formula, literals: &mut Vec<Atom>) -> LtlNode {
    match f {
        Formula::True => LtlNode::True,
        Formula::False => LtlNode::False,
        Formula::Atom(a) => intern(a, literals),
        Formula::Not(g) => LtlNode::Not(Box::new(from_formula(g, literals))),
        Formula::And(gs) => LtlNode::and(gs.iter().map(|g| from_formula(g, literals)).collect()),
        Formula::Or(gs) => LtlNode::or(gs.iter().map(|g| from_formula(g, literals)).collect()),
        Formula::Exists(..) | Formula::Forall(..) => unreachable!("atoms are quantifier-free"),
    }
}

fn type_ltl(e: &Expr, env: &SortEnv, literals: &mut Vec<Atom>) -> Result<LtlNode, LogicError> {
    let mut go = |e: &Expr| type_ltl(e, env, literals);
    Ok(match e {
        Expr::Bool(true) => LtlNode::True,
        Expr::Bool(false) => LtlNode::False,
        Expr::Rel(op, a, b, _) => {
            let f = e.atom(*op, a, b, &Scope::new(env))?;
            from_formula(&f, literals)
        }
        Expr::Dvd(..) => {
            let f = e.to_formula(&mut Scope::new(env))?;
            from_formula(&f, literals)
        }
        Expr::Not(a) => LtlNode::Not(Box::new(go(a)?)),
        Expr::And(a, b) => {
            let (a, b) = (go(a)?, go(b)?);
            LtlNode::and(vec![a, b])
        }
        Expr::Or(a, b) => {
            let (a, b) = (go(a)?, go(b)?);
            LtlNode::or(vec![a, b])
        }
        Expr::Implies(a, b) => {
            let (a, b) = (go(a)?, go(b)?);
            LtlNode::Implies(Box::new(a), Box::new(b))
        }
        Expr::Iff(a, b) => {
            let (a, b) = (go(a)?, go(b)?);
            LtlNode::Iff(Box::new(a), Box::new(b))
        }
        Expr::Unary(op, a) => {
            let a = Box::new(go(a)?);
            match op {
                TemporalOp::Globally => LtlNode::Globally(a),
                TemporalOp::Eventually => LtlNode::Eventually(a),
                _ => LtlNode::Next(a),
            }
        }
        Expr::Binary(op, a, b) => {
            let (a, b) = (Box::new(go(a)?), Box::new(go(b)?));
            match op {
                TemporalOp::Until => LtlNode::Until(a, b),
                _ => LtlNode::Release(a, b),
            }
        }
        Expr::Quant { .. } => return Err(syntax(Default::default(), "quantifier inside a specification")),
        Expr::Var(v, p) => return Err(syntax(*p, format!("`{v}` used as a formula"))),
        _ => return Err(syntax(Default::default(), "expected a temporal formula, found a term")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const RUNNING: &str = "env x:int;\nsys y:int;\nproperty: G((x < 2 -> X(y > 1)) && (x >= 2 -> y <= x))\n";

    #[test]
    fn running_example_literals() {
        let s = parse_spec(RUNNING).unwrap();
        let lits: Vec<String> = s.literals.iter().map(|l| l.to_string()).collect();
        assert_eq!(lits, ["x <= 1", "y >= 2", "y <= x"]);
        assert_eq!(s.direct_abstraction(), "G(((s0 -> X(s1)) && (!(s0) -> s2)))");
        assert_eq!(classify_fragment(&s.property), Fragment::GXSafety);
        assert_eq!(s.property.next_literals(), vec![1]);
    }

    #[test]
    fn shared_and_negated_literals() {
        let s = parse_spec("env x:int; sys y:int; G(y > x) && F(y > x)").unwrap();
        assert_eq!(s.literals.len(), 1);
        assert_eq!(classify_fragment(&s.property), Fragment::General);
        let s = parse_spec("env x:int; sys y:int; G(x < 2 && !(x >= 2))").unwrap();
        assert_eq!(s.literals.len(), 1);
        for x in -10..=10 {
            assert_eq!(x < 2, !(x >= 2));
        }
    }

    #[test]
    fn fragment_classification() {
        let f = |t: &str| classify_fragment(&parse_spec(t).unwrap().property);
        assert_eq!(f("env x:int; sys y:int; G(y > x)"), Fragment::GXSafety);
        assert_eq!(f("env x:int; sys y:int; F(y > x)"), Fragment::General);
        assert_eq!(f("env x:int; sys y:int; G(X(X(y > x)))"), Fragment::General);
        assert_eq!(f("env x:int; sys y:int; y > 0 && G(y > x -> X(!(y > 3)))"), Fragment::GXSafety);
        assert_eq!(f("env x:int; sys y:int; G(y > x U y > 0)"), Fragment::General);
    }

    #[test]
    fn declaration_errors() {
        assert_eq!(
            parse_spec("env x:int; sys y:int; G(y > z)"),
            Err(SpecError::Logic(LogicError::UndeclaredVariable("z".into())))
        );
        assert_eq!(
            parse_spec("env x:int; sys x:int; G(x > 0)"),
            Err(SpecError::DuplicateDeclaration("x".into()))
        );
        assert!(matches!(
            parse_spec("env x:int\nsys y:int; G(y > x)"),
            Err(SpecError::Logic(LogicError::Syntax { line: 2, col: 1, .. }))
        ));
    }

    #[test]
    fn render_round_trip() {
        for t in [
            RUNNING,
            "env x:real; sys y:real; sys w:real; G(y + w > x) && (y < 3 U x = 2) || F(!(2*y != x))",
            "env a:int; sys b:int; G(3 | a + b <-> X(b >= 0)) R (a > 1)",
        ] {
            let s = parse_spec(t).unwrap();
            let again = parse_spec(&s.render()).unwrap();
            assert_eq!(s, again, "{}", s.render());
        }
    }

    #[test]
    fn theory_override() {
        let s = parse_spec_as(RUNNING, Some(Sort::Real)).unwrap();
        assert!(s.env_vars.iter().chain(&s.sys_vars).all(|(_, s)| *s == Sort::Real));
        let lits: Vec<String> = s.literals.iter().map(|l| l.to_string()).collect();
        assert_eq!(lits, ["x < 2", "y > 1", "y <= x"]);
    }
}
