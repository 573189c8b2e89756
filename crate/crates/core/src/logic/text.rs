//! Infix syntax shared by formulas, specifications and artifact files.
//!
//! ```text
//! formula := "forall" x ":" sort "." formula | "exists" ... | formula "->" formula
//!          | formula "||" formula | formula "&&" formula | "!" formula
//!          | term rel term | k "|" term | "true" | "false" | "(" formula ")"
//! rel     := "<" | "<=" | "=" | "!=" | ">=" | ">"
//! term    := linear combination with integer or p/q literals
//! ```
//! With temporal operators enabled, `G F X` are prefix and `U R` infix.

use num_bigint::BigInt;
use num_traits::Zero;

use super::{normalize_atom, Formula, LinearTerm, LogicError, Rat, Relation, Sort, SortEnv};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

pub(crate) fn syntax(pos: Pos, msg: impl Into<String>) -> LogicError {
    LogicError::Syntax {
        line: pos.line,
        col: pos.col,
        msg: msg.into(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Num(BigInt),
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Slash,
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    Ne,
    Pipe,
    AndAnd,
    OrOr,
    Bang,
    Arrow,
    Iff,
    Colon,
    Dot,
    Semi,
    Comma,
    Eof,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, LogicError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let two = |j: usize| chars.get(i + j).copied();
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' || (c == '/' && two(1) == Some('/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push((Tok::Num(s.parse().expect("digits")), pos));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push((Tok::Ident(s), pos));
            continue;
        }
        let (tok, len) = match (c, two(1), two(2)) {
            ('<', Some('-'), Some('>')) => (Tok::Iff, 3),
            ('<', Some('='), _) => (Tok::Le, 2),
            ('>', Some('='), _) => (Tok::Ge, 2),
            ('!', Some('='), _) => (Tok::Ne, 2),
            ('=', Some('='), _) => (Tok::Eq, 2),
            ('&', Some('&'), _) => (Tok::AndAnd, 2),
            ('|', Some('|'), _) => (Tok::OrOr, 2),
            ('-', Some('>'), _) => (Tok::Arrow, 2),
            ('<', ..) => (Tok::Lt, 1),
            ('>', ..) => (Tok::Gt, 1),
            ('=', ..) => (Tok::Eq, 1),
            ('!', ..) => (Tok::Bang, 1),
            ('|', ..) => (Tok::Pipe, 1),
            ('(', ..) => (Tok::LParen, 1),
            (')', ..) => (Tok::RParen, 1),
            ('+', ..) => (Tok::Plus, 1),
            ('-', ..) => (Tok::Minus, 1),
            ('*', ..) => (Tok::Star, 1),
            ('/', ..) => (Tok::Slash, 1),
            (':', ..) => (Tok::Colon, 1),
            ('.', ..) => (Tok::Dot, 1),
            (';', ..) => (Tok::Semi, 1),
            (',', ..) => (Tok::Comma, 1),
            _ => return Err(syntax(pos, format!("unexpected character `{c}`"))),
        };
        i += len;
        col += len;
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TemporalOp {
    Globally,
    Eventually,
    Next,
    Until,
    Release,
}

/// Untyped syntax tree; typed by [`Expr::to_formula`] or the LTL front end.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Rat, Pos),
    Var(String, Pos),
    Bool(bool),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>, Pos),
    Div(Box<Expr>, Box<Expr>, Pos),
    Rel(RelOp, Box<Expr>, Box<Expr>, Pos),
    Dvd(Box<Expr>, Box<Expr>, Pos),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Iff(Box<Expr>, Box<Expr>),
    Quant {
        forall: bool,
        var: String,
        sort: Sort,
        body: Box<Expr>,
    },
    Unary(TemporalOp, Box<Expr>),
    Binary(TemporalOp, Box<Expr>, Box<Expr>),
}

pub(crate) struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    temporal: bool,
}

impl Parser {
    pub(crate) fn new(src: &str, temporal: bool) -> Result<Self, LogicError> {
        Ok(Self {
            toks: tokenize(src)?,
            at: 0,
            temporal,
        })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    pub(crate) fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    pub(crate) fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub(crate) fn expect(&mut self, tok: Tok, what: &str) -> Result<Pos, LogicError> {
        let (t, p) = self.bump();
        if t == tok {
            Ok(p)
        } else {
            Err(syntax(p, format!("expected {what}, found {t:?}")))
        }
    }

    pub(crate) fn ident(&mut self) -> Result<(String, Pos), LogicError> {
        match self.bump() {
            (Tok::Ident(s), p) => Ok((s, p)),
            (t, p) => Err(syntax(p, format!("expected identifier, found {t:?}"))),
        }
    }

    pub(crate) fn sort(&mut self) -> Result<Sort, LogicError> {
        let (s, p) = self.ident()?;
        s.parse().map_err(|m: String| syntax(p, m))
    }

    pub(crate) fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    fn is_temporal_prefix(&self) -> Option<TemporalOp> {
        if !self.temporal {
            return None;
        }
        match self.peek() {
            Tok::Ident(s) if s == "G" => Some(TemporalOp::Globally),
            Tok::Ident(s) if s == "F" => Some(TemporalOp::Eventually),
            Tok::Ident(s) if s == "X" => Some(TemporalOp::Next),
            _ => None,
        }
    }

    /// Infix operator at the cursor: (left bp, right bp).
    fn infix(&self) -> Option<(u8, u8)> {
        Some(match self.peek() {
            Tok::Arrow | Tok::Iff => (2, 1),
            Tok::OrOr => (3, 4),
            Tok::AndAnd => (5, 6),
            Tok::Ident(s) if self.temporal && (s == "U" || s == "R") => (8, 7),
            Tok::Lt | Tok::Le | Tok::Eq | Tok::Ne | Tok::Ge | Tok::Gt | Tok::Pipe => (11, 12),
            Tok::Plus | Tok::Minus => (13, 14),
            Tok::Star | Tok::Slash => (15, 16),
            _ => return None,
        })
    }

    pub(crate) fn expr(&mut self, min_bp: u8) -> Result<Expr, LogicError> {
        let mut lhs = self.prefix()?;
        while let Some((lbp, rbp)) = self.infix() {
            if lbp < min_bp {
                break;
            }
            let (tok, pos) = self.bump();
            let rhs = self.expr(rbp)?;
            let (l, r) = (Box::new(lhs), Box::new(rhs));
            lhs = match tok {
                Tok::Arrow => Expr::Implies(l, r),
                Tok::Iff => Expr::Iff(l, r),
                Tok::OrOr => Expr::Or(l, r),
                Tok::AndAnd => Expr::And(l, r),
                Tok::Ident(s) if s == "U" => Expr::Binary(TemporalOp::Until, l, r),
                Tok::Ident(_) => Expr::Binary(TemporalOp::Release, l, r),
                Tok::Lt => Expr::Rel(RelOp::Lt, l, r, pos),
                Tok::Le => Expr::Rel(RelOp::Le, l, r, pos),
                Tok::Eq => Expr::Rel(RelOp::Eq, l, r, pos),
                Tok::Ne => Expr::Rel(RelOp::Ne, l, r, pos),
                Tok::Ge => Expr::Rel(RelOp::Ge, l, r, pos),
                Tok::Gt => Expr::Rel(RelOp::Gt, l, r, pos),
                Tok::Pipe => Expr::Dvd(l, r, pos),
                Tok::Plus => Expr::Add(l, r),
                Tok::Minus => Expr::Sub(l, r),
                Tok::Star => Expr::Mul(l, r, pos),
                Tok::Slash => Expr::Div(l, r, pos),
                _ => unreachable!(),
            };
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, LogicError> {
        if let Some(op) = self.is_temporal_prefix() {
            self.bump();
            let e = self.expr(9)?;
            return Ok(Expr::Unary(op, Box::new(e)));
        }
        let (tok, pos) = self.bump();
        match tok {
            Tok::Num(n) => Ok(Expr::Num(Rat::from_integer(n), pos)),
            Tok::Minus => Ok(Expr::Neg(Box::new(self.expr(17)?))),
            Tok::Bang => Ok(Expr::Not(Box::new(self.expr(9)?))),
            Tok::LParen => {
                let e = self.expr(0)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(s) => match s.as_str() {
                "true" => Ok(Expr::Bool(true)),
                "false" => Ok(Expr::Bool(false)),
                "forall" | "exists" => {
                    let (var, _) = self.ident()?;
                    self.expect(Tok::Colon, "`:`")?;
                    let sort = self.sort()?;
                    self.expect(Tok::Dot, "`.`")?;
                    let body = self.expr(0)?;
                    Ok(Expr::Quant {
                        forall: s == "forall",
                        var,
                        sort,
                        body: Box::new(body),
                    })
                }
                _ => Ok(Expr::Var(s, pos)),
            },
            t => Err(syntax(pos, format!("unexpected token {t:?}"))),
        }
    }
}

fn expr_pos(e: &Expr) -> Pos {
    match e {
        Expr::Num(_, p) | Expr::Var(_, p) | Expr::Mul(_, _, p) | Expr::Div(_, _, p) => *p,
        Expr::Rel(_, _, _, p) | Expr::Dvd(_, _, p) => *p,
        Expr::Neg(e) | Expr::Not(e) | Expr::Unary(_, e) => expr_pos(e),
        Expr::Add(a, _) | Expr::Sub(a, _) | Expr::And(a, _) | Expr::Or(a, _) => expr_pos(a),
        Expr::Implies(a, _) | Expr::Iff(a, _) | Expr::Binary(_, a, _) => expr_pos(a),
        Expr::Bool(_) | Expr::Quant { .. } => Pos::default(),
    }
}

/// Scoped sort lookup: bound variables shadow the environment.
pub(crate) struct Scope<'a> {
    env: &'a SortEnv,
    bound: Vec<(String, Sort)>,
}

impl<'a> Scope<'a> {
    pub(crate) fn new(env: &'a SortEnv) -> Self {
        Self {
            env,
            bound: Vec::new(),
        }
    }

    fn lookup(&self, v: &str) -> Option<Sort> {
        self.bound
            .iter()
            .rev()
            .find(|(n, _)| n == v)
            .map(|(_, s)| *s)
            .or_else(|| self.env.get(v).copied())
    }
}

impl Expr {
    /// Type a term; also returns the sort of its variables (None if ground).
    pub(crate) fn to_term(&self, scope: &Scope<'_>) -> Result<(LinearTerm, Option<Sort>), LogicError> {
        let join = |a: Option<Sort>, b: Option<Sort>, p: Pos| match (a, b) {
            (Some(x), Some(y)) if x != y => Err(syntax(p, "term mixes int and real variables")),
            (a, b) => Ok(a.or(b)),
        };
        match self {
            Expr::Num(r, _) => Ok((LinearTerm::constant(r.clone()), None)),
            Expr::Var(v, _) => match scope.lookup(v) {
                Some(s) => Ok((LinearTerm::var(v.clone()), Some(s))),
                None => Err(LogicError::UndeclaredVariable(v.clone())),
            },
            Expr::Neg(e) => {
                let (t, s) = e.to_term(scope)?;
                Ok((-&t, s))
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let (ta, sa) = a.to_term(scope)?;
                let (tb, sb) = b.to_term(scope)?;
                let s = join(sa, sb, expr_pos(a))?;
                let t = if matches!(self, Expr::Add(..)) { &ta + &tb } else { &ta - &tb };
                Ok((t, s))
            }
            Expr::Mul(a, b, p) => {
                let (ta, sa) = a.to_term(scope)?;
                let (tb, sb) = b.to_term(scope)?;
                if ta.is_constant() {
                    Ok((tb.scale(ta.constant_part()), sb.or(sa)))
                } else if tb.is_constant() {
                    Ok((ta.scale(tb.constant_part()), sa.or(sb)))
                } else {
                    Err(syntax(*p, "nonlinear product"))
                }
            }
            Expr::Div(a, b, p) => {
                let (ta, sa) = a.to_term(scope)?;
                let (tb, _) = b.to_term(scope)?;
                if !tb.is_constant() {
                    return Err(syntax(*p, "division by a non-constant"));
                }
                if tb.constant_part().is_zero() {
                    return Err(syntax(*p, "division by zero"));
                }
                Ok((ta.scale(&tb.constant_part().recip()), sa))
            }
            other => Err(syntax(expr_pos(other), "expected an arithmetic term")),
        }
    }

    /// Type a first-order formula. Temporal operators are rejected.
    pub(crate) fn to_formula(&self, scope: &mut Scope<'_>) -> Result<Formula, LogicError> {
        match self {
            Expr::Bool(b) => Ok(Formula::from_bool(*b)),
            Expr::Rel(op, a, b, _) => self.atom(*op, a, b, scope),
            Expr::Dvd(k, e, p) => {
                let (tk, _) = k.to_term(scope)?;
                if !tk.is_constant() || !tk.constant_part().is_integer() {
                    return Err(syntax(*p, "divisibility modulus must be an integer literal"));
                }
                let (te, s) = e.to_term(scope)?;
                normalize_atom(
                    te,
                    Relation::Dvd(tk.constant_part().to_integer()),
                    s.unwrap_or(Sort::Int),
                )
            }
            Expr::Not(e) => Ok(Formula::not(e.to_formula(scope)?)),
            Expr::And(a, b) => Ok(Formula::and(vec![a.to_formula(scope)?, b.to_formula(scope)?])),
            Expr::Or(a, b) => Ok(Formula::or(vec![a.to_formula(scope)?, b.to_formula(scope)?])),
            Expr::Implies(a, b) => Ok(Formula::implies(a.to_formula(scope)?, b.to_formula(scope)?)),
            Expr::Iff(a, b) => {
                let (fa, fb) = (a.to_formula(scope)?, b.to_formula(scope)?);
                Ok(Formula::and(vec![
                    Formula::implies(fa.clone(), fb.clone()),
                    Formula::implies(fb, fa),
                ]))
            }
            Expr::Quant {
                forall,
                var,
                sort,
                body,
            } => {
                scope.bound.push((var.clone(), *sort));
                let b = body.to_formula(scope);
                scope.bound.pop();
                let b = b?;
                Ok(if *forall {
                    Formula::forall(var.clone(), *sort, b)
                } else {
                    Formula::exists(var.clone(), *sort, b)
                })
            }
            Expr::Var(v, p) => Err(syntax(*p, format!("`{v}` used as a formula"))),
            Expr::Unary(..) | Expr::Binary(..) => {
                Err(syntax(expr_pos(self), "temporal operator inside a first-order formula"))
            }
            other => Err(syntax(expr_pos(other), "expected a formula, found a term")),
        }
    }

    pub(crate) fn atom(&self, op: RelOp, a: &Expr, b: &Expr, scope: &Scope<'_>) -> Result<Formula, LogicError> {
        let (ta, sa) = a.to_term(scope)?;
        let (tb, sb) = b.to_term(scope)?;
        let sort = match (sa, sb) {
            (Some(x), Some(y)) if x != y => {
                return Err(syntax(expr_pos(self), "atom mixes int and real variables"))
            }
            (x, y) => x.or(y).unwrap_or(Sort::Int),
        };
        let rel = match op {
            RelOp::Lt => Relation::Lt,
            RelOp::Le => Relation::Le,
            RelOp::Eq => Relation::Eq,
            RelOp::Ne => Relation::Ne,
            RelOp::Ge => Relation::Ge,
            RelOp::Gt => Relation::Gt,
        };
        normalize_atom(&ta - &tb, rel, sort)
    }
}

/// Parse a first-order formula over the declared free variables. Bound
/// variables are alpha-renamed so every binder is unique.
pub fn parse_formula(src: &str, env: &SortEnv) -> Result<Formula, LogicError> {
    let mut p = Parser::new(src, false)?;
    let e = p.expr(0)?;
    if !p.at_eof() {
        return Err(syntax(p.pos(), format!("trailing input {:?}", p.peek())));
    }
    Ok(e.to_formula(&mut Scope::new(env))?.uniquify_bound())
}

/// Parse a linear term.
pub fn parse_term(src: &str, env: &SortEnv) -> Result<LinearTerm, LogicError> {
    let mut p = Parser::new(src, false)?;
    let e = p.expr(0)?;
    if !p.at_eof() {
        return Err(syntax(p.pos(), format!("trailing input {:?}", p.peek())));
    }
    Ok(e.to_term(&Scope::new(env))?.0)
}

/// Parse a rational literal: `3`, `-3`, `3/4`, `-3/4`.
pub fn parse_rat(src: &str) -> Option<Rat> {
    let s = src.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let r = match body.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Rat::new(n.trim().parse().ok()?, d)
        }
        None => match body.split_once('.') {
            Some((i, f)) if !f.is_empty() && f.bytes().all(|b| b.is_ascii_digit()) => {
                let whole: BigInt = format!("{i}{f}").parse().ok()?;
                Rat::new(whole, num_traits::pow(BigInt::from(10), f.len()))
            }
            Some(_) => return None,
            None => Rat::from_integer(body.parse().ok()?),
        },
    };
    Some(if neg { -r } else { r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::rat;

    fn env() -> SortEnv {
        [("x", Sort::Int), ("y", Sort::Int), ("r", Sort::Real)]
            .iter()
            .map(|(v, s)| (v.to_string(), *s))
            .collect()
    }

    #[test]
    fn precedence_and_implication() {
        let f = parse_formula("x < 2 -> y > 1 && y <= x", &env()).unwrap();
        assert_eq!(f.to_string(), "(x >= 2 || (y >= 2 && y <= x))");
    }

    #[test]
    fn rational_literals_and_scaling() {
        let f = parse_formula("1/2*r + 3 > r", &env()).unwrap();
        assert_eq!(f.to_string(), "r < 6");
        assert_eq!(parse_rat("-7/2"), Some(Rat::new((-7).into(), 2.into())));
        assert_eq!(parse_rat("12"), Some(rat(12)));
        assert_eq!(parse_rat("1/0"), None);
    }

    #[test]
    fn divisibility_syntax() {
        let f = parse_formula("!(3 | x + 1) && 2 | y", &env()).unwrap();
        assert_eq!(f.to_string(), "(!(3 | x + 1) && 2 | y)");
    }

    #[test]
    fn errors_carry_positions() {
        match parse_formula("x <\n  * 2", &env()) {
            Err(LogicError::Syntax { line, col, .. }) => assert_eq!((line, col), (2, 3)),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            parse_formula("z > 0", &env()),
            Err(LogicError::UndeclaredVariable("z".into()))
        );
        assert!(matches!(parse_formula("x*y > 0", &env()), Err(LogicError::Syntax { .. })));
        assert!(matches!(parse_formula("x + r > 0", &env()), Err(LogicError::Syntax { .. })));
    }

    #[test]
    fn render_reparses_to_same_formula() {
        for src in [
            "forall z:int. (z > x) -> z >= y",
            "exists w:real. r < w && w < 2*r + 1/3",
            "!(5 | 2*x + y) || x = y",
            "x != 3",
        ] {
            let f = parse_formula(src, &env()).unwrap();
            let g = parse_formula(&f.to_string(), &env()).unwrap();
            assert_eq!(f, g, "{src} rendered as {f}");
        }
    }
}
