use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::term::VarPart;
use super::{fmt_rat, Formula, LinearTerm, LogicError, Rat, Sort, Valuation};

/// Relation of a normalized atom `term REL 0` (or `k | term`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Le,
    Lt,
    Eq,
    /// `k | term`, with `k >= 2` after normalization.
    Dvd(BigInt),
}

/// Relation as written by a user, before normalization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Lt,
    Eq,
    Ne,
    Ge,
    Gt,
    Dvd(BigInt),
}

/// A normalized theory literal.
///
/// Int atoms have integer coefficients with gcd 1 and never use `Lt`;
/// real atoms are scaled so the first variable has coefficient of magnitude
/// one. Equality atoms have a positive leading coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    term: LinearTerm,
    rel: Rel,
    sort: Sort,
}

/// Rewrite `term REL 0` into normal form.
pub fn normalize_atom(term: LinearTerm, rel: Relation, sort: Sort) -> Result<Formula, LogicError> {
    match rel {
        Relation::Le => canon(term, Rel::Le, sort),
        Relation::Lt => canon(term, Rel::Lt, sort),
        Relation::Eq => canon(term, Rel::Eq, sort),
        Relation::Ge => canon(-&term, Rel::Le, sort),
        Relation::Gt => canon(-&term, Rel::Lt, sort),
        Relation::Ne => Ok(Formula::or(vec![
            canon(term.clone(), Rel::Lt, sort)?,
            canon(-&term, Rel::Lt, sort)?,
        ])),
        Relation::Dvd(k) => {
            if k.is_zero() {
                return Err(LogicError::Syntax {
                    line: 0,
                    col: 0,
                    msg: "divisibility by zero".into(),
                });
            }
            canon(term, Rel::Dvd(k.abs()), sort)
        }
    }
}

fn fold(value: &Rat, rel: &Rel) -> Formula {
    let holds = match rel {
        Rel::Le => !value.is_positive(),
        Rel::Lt => value.is_negative(),
        Rel::Eq => value.is_zero(),
        Rel::Dvd(k) => value.is_integer() && value.to_integer().is_multiple_of(k),
    };
    Formula::from_bool(holds)
}

fn canon(term: LinearTerm, rel: Rel, sort: Sort) -> Result<Formula, LogicError> {
    match sort {
        Sort::Int => Ok(canon_int(term, rel)),
        Sort::Real => {
            if matches!(rel, Rel::Dvd(_)) {
                return Err(LogicError::SortMismatch(term.to_string()));
            }
            if term.is_constant() {
                return Ok(fold(term.constant_part(), &rel));
            }
            let lead = term.leading_coeff().cloned().expect("non-constant");
            let scale = match rel {
                Rel::Eq => lead.recip(),
                _ => lead.abs().recip(),
            };
            Ok(Formula::Atom(Atom {
                term: term.scale(&scale),
                rel,
                sort,
            }))
        }
    }
}

fn canon_int(term: LinearTerm, rel: Rel) -> Formula {
    let m = Rat::from_integer(term.denominator_lcm());
    let mut t = term.scale(&m);
    let mut rel = match rel {
        Rel::Dvd(k) => Rel::Dvd(k * m.to_integer()),
        r => r,
    };
    if rel == Rel::Lt {
        t = t.add_constant(&Rat::one());
        rel = Rel::Le;
    }
    if t.is_constant() {
        return fold(t.constant_part(), &rel);
    }
    let c = t.constant_part().to_integer();
    let g = t.coeff_gcd();
    let atom_term = match &rel {
        Rel::Le => {
            // sum(a x) + c <= 0  <=>  sum(a/g x) + ceil(c/g) <= 0
            let c2 = Integer::div_ceil(&c, &g);
            let gr = Rat::from_integer(g);
            t.map_coeffs(|a| a / &gr, Rat::from_integer(c2))
        }
        Rel::Eq => {
            if !c.is_multiple_of(&g) {
                return Formula::False;
            }
            let mut gr = Rat::from_integer(g);
            if t.leading_coeff().is_some_and(|a| a.is_negative()) {
                gr = -gr;
            }
            t.scale(&gr.recip())
        }
        Rel::Dvd(k) => return canon_dvd(&t, k.clone()),
        Rel::Lt => unreachable!("tightened above"),
    };
    Formula::Atom(Atom {
        term: atom_term,
        rel,
        sort: Sort::Int,
    })
}

/// `k | t` with coefficients reduced mod `k`, the common factor with `k`
/// divided out and the leading coefficient made 1 when it is invertible.
fn canon_dvd(t: &LinearTerm, k: BigInt) -> Formula {
    let reduce = |t: &LinearTerm, k: &BigInt| {
        let m = |c: &Rat| Rat::from_integer(c.to_integer().mod_floor(k));
        LinearTerm::from_parts(
            t.coeffs().map(|(v, c)| (v.to_string(), m(c))),
            m(t.constant_part()),
        )
    };
    let reduced = reduce(t, &k);
    if reduced.is_constant() {
        return fold(reduced.constant_part(), &Rel::Dvd(k));
    }
    let g = reduced.coeff_gcd().gcd(&k);
    if !reduced.constant_part().to_integer().is_multiple_of(&g) {
        return Formula::False;
    }
    let k = &k / &g;
    if k.is_one() {
        return Formula::True;
    }
    let mut term = reduced.scale(&Rat::from_integer(g).recip());
    let lead = term.leading_coeff().expect("non-constant").to_integer();
    let e = lead.extended_gcd(&k);
    if e.gcd.is_one() {
        term = reduce(&term.scale(&Rat::from_integer(e.x)), &k);
    }
    Formula::Atom(Atom {
        term,
        rel: Rel::Dvd(k),
        sort: Sort::Int,
    })
}

impl Atom {
    pub fn term(&self) -> &LinearTerm {
        &self.term
    }

    pub fn rel(&self) -> &Rel {
        &self.rel
    }

    pub fn sort(&self) -> Sort {
        self.sort
    }

    pub fn mentions(&self, var: &str) -> bool {
        self.term.mentions(var)
    }

    /// The normal form of `!self`. Divisibility stays a negated atom.
    pub fn negate(&self) -> Formula {
        let neg = -&self.term;
        let r = match self.rel {
            Rel::Le => canon(neg, Rel::Lt, self.sort),
            Rel::Lt => canon(neg, Rel::Le, self.sort),
            Rel::Eq => Ok(Formula::or(vec![
                canon(self.term.clone(), Rel::Lt, self.sort).expect("normalized"),
                canon(neg, Rel::Lt, self.sort).expect("normalized"),
            ])),
            Rel::Dvd(_) => return Formula::Not(Box::new(Formula::Atom(self.clone()))),
        };
        r.expect("re-normalizing a normalized atom cannot fail")
    }

    /// If `!self` is itself a single atom, return it.
    pub fn negated_atom(&self) -> Option<Atom> {
        match self.negate() {
            Formula::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn eval(&self, v: &Valuation) -> Result<bool, LogicError> {
        let value = self.term.eval(v)?;
        Ok(fold(&value, &self.rel) == Formula::True)
    }

    pub fn substitute(&self, var: &str, by: &LinearTerm) -> Formula {
        if !self.term.mentions(var) {
            return Formula::Atom(self.clone());
        }
        self.renormalize(self.term.substitute(var, by))
    }

    pub fn substitute_values(&self, v: &Valuation) -> Formula {
        if !self.term.vars().any(|x| v.contains(x)) {
            return Formula::Atom(self.clone());
        }
        self.renormalize(self.term.substitute_values(v))
    }

    fn renormalize(&self, term: LinearTerm) -> Formula {
        canon(term, self.rel.clone(), self.sort).expect("sort unchanged")
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Rel::Dvd(k) = &self.rel {
            return write!(f, "{k} | {}", self.term);
        }
        let op = match self.rel {
            Rel::Le => "<=",
            Rel::Lt => "<",
            _ => "=",
        };
        let flipped = match self.rel {
            Rel::Le => ">=",
            Rel::Lt => ">",
            _ => "=",
        };
        // P - N + c REL 0, printed as `P REL N - c` or `N FLIP c`.
        let pos = LinearTerm::from_parts(
            self.term
                .coeffs()
                .filter(|(_, c)| c.is_positive())
                .map(|(v, c)| (v.to_string(), c.clone())),
            Rat::zero(),
        );
        let neg = LinearTerm::from_parts(
            self.term
                .coeffs()
                .filter(|(_, c)| c.is_negative())
                .map(|(v, c)| (v.to_string(), -c)),
            Rat::zero(),
        );
        let c = self.term.constant_part();
        if !pos.is_constant() {
            let rhs = neg.add_constant(&-c);
            write!(f, "{} {op} {rhs}", VarPart(&pos))
        } else {
            write!(f, "{} {flipped} {}", VarPart(&neg), fmt_rat(c))
        }
    }
}
