use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::project::project;
use super::simplify::simplify_cell;
use super::ArithError;
use crate::logic::{
    cell_formula, normalize_atom, to_dnf, to_nnf, Atom, Cell, Formula, LinearTerm, LogicError, Rat, Rel,
    Relation, Sort,
};

/// Cells allowed when expanding one quantifier body before falling back to
/// the formula-level procedures.
const CELL_PATH_BUDGET: usize = 1024;

/// Remove every quantifier, innermost first.
pub(crate) fn qe(f: &Formula) -> Result<Formula, ArithError> {
    Ok(match f {
        Formula::True | Formula::False | Formula::Atom(_) => f.clone(),
        Formula::Not(g) => Formula::not(qe(g)?),
        Formula::And(gs) => Formula::and(gs.iter().map(qe).collect::<Result<_, _>>()?),
        Formula::Or(gs) => Formula::or(gs.iter().map(qe).collect::<Result<_, _>>()?),
        Formula::Exists(v, s, body) => exists(v, *s, &qe(body)?)?,
        Formula::Forall(v, s, body) => {
            let inner = qe(body)?;
            Formula::not(exists(v, *s, &Formula::not(inner))?)
        }
    })
}

fn check_sorts(f: &Formula, v: &str, sort: Sort) -> Result<(), ArithError> {
    for a in f.atoms() {
        if a.mentions(v) && a.sort() != sort {
            return Err(ArithError::UnsupportedFragment(format!(
                "`{v}` is quantified as {sort} but occurs in the {} atom `{a}`",
                a.sort()
            )));
        }
    }
    Ok(())
}

/// `∃v. body` for quantifier-free `body`.
pub(crate) fn exists(v: &str, sort: Sort, body: &Formula) -> Result<Formula, ArithError> {
    if !body.mentions(v) {
        return Ok(body.clone());
    }
    check_sorts(body, v, sort)?;
    let nnf = to_nnf(body)?;
    let disjuncts = match nnf {
        Formula::Or(parts) => parts,
        other => vec![other],
    };
    let mut out = Vec::new();
    for d in disjuncts {
        if !d.mentions(v) {
            out.push(d);
            continue;
        }
        match to_dnf(&d, CELL_PATH_BUDGET) {
            Ok(cells) => {
                for c in cells {
                    out.extend(project(&c, v, sort).iter().map(|p| cell_formula(p)));
                }
            }
            Err(LogicError::CellBudgetExceeded(_)) => out.push(match sort {
                Sort::Int => cooper(&d, v),
                Sort::Real => vts(&d, v),
            }),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(tidy(Formula::or(out)))
}

/// Simplify each cell of a small formula; leave large ones alone.
pub(crate) fn tidy(f: Formula) -> Formula {
    match to_dnf(&f, 256) {
        Ok(cells) => {
            let mut seen: Vec<Cell> = Vec::new();
            for c in cells.iter().filter_map(|c| simplify_cell(c)) {
                if c.is_empty() {
                    return Formula::True;
                }
                if !seen.contains(&c) {
                    seen.push(c);
                }
            }
            Formula::or(seen.iter().map(|c| cell_formula(c)).collect())
        }
        Err(_) => f,
    }
}

/// Apply `f` to every atom of a negation-normal formula.
fn map_atoms(f: &Formula, g: &dyn Fn(&Atom) -> Formula) -> Formula {
    match f {
        Formula::Atom(a) => g(a),
        Formula::Not(inner) => Formula::not(map_atoms(inner, g)),
        Formula::And(ps) => Formula::and(ps.iter().map(|p| map_atoms(p, g)).collect()),
        Formula::Or(ps) => Formula::or(ps.iter().map(|p| map_atoms(p, g)).collect()),
        other => other.clone(),
    }
}

fn subst(f: &Formula, v: &str, by: &LinearTerm) -> Formula {
    map_atoms(f, &|a| a.substitute(v, by))
}

/// Cooper's method on a negation-normal formula, in the lower-bound flavor
/// with test points `ceil(s/a) + j`; the upper flavor is the same procedure
/// applied to `v := -v`, chosen when it has fewer test points.
fn cooper(f: &Formula, v: &str) -> Formula {
    let count = |g: &Formula| -> BigInt {
        g.atoms()
            .iter()
            .filter(|a| a.mentions(v))
            .filter(|a| match a.rel() {
                Rel::Eq => true,
                Rel::Dvd(_) => false,
                _ => a.term().coeff(v).is_negative(),
            })
            .map(|a| a.term().coeff(v).abs().to_integer())
            .sum()
    };
    let flipped = subst(f, v, &(-&LinearTerm::var(v)));
    if count(&flipped) < count(f) {
        cooper_lower(&flipped, v)
    } else {
        cooper_lower(f, v)
    }
}

fn cooper_lower(f: &Formula, v: &str) -> Formula {
    let atoms: Vec<Atom> = f.atoms().into_iter().filter(|a| a.mentions(v)).cloned().collect();
    let mut period = BigInt::one();
    for a in &atoms {
        if let Rel::Dvd(k) = a.rel() {
            period = period.lcm(k);
        }
    }
    let minus_inf = map_atoms(f, &|a| {
        if !a.mentions(v) {
            return Formula::Atom(a.clone());
        }
        match a.rel() {
            Rel::Dvd(_) => Formula::Atom(a.clone()),
            Rel::Eq => Formula::False,
            _ => Formula::from_bool(a.term().coeff(v).is_positive()),
        }
    });
    let mut out = Vec::new();
    let mut j = BigInt::zero();
    while j < period {
        out.push(subst(&minus_inf, v, &LinearTerm::constant(Rat::from_integer(j.clone()))));
        j += 1;
    }
    let mut seen: Vec<LinearTerm> = Vec::new();
    for a in &atoms {
        let c = a.term().coeff(v);
        let is_lower = match a.rel() {
            Rel::Eq => true,
            Rel::Dvd(_) => false,
            _ => c.is_negative(),
        };
        if !is_lower {
            continue;
        }
        // c*v + s REL 0 with the test point ceil(-s/c) = (t + k)/|c|
        let rest = a.term().without(v);
        let t = if c.is_negative() { rest } else { -&rest };
        let m = c.abs();
        let mut k = Rat::zero();
        while k < m {
            let shifted = t.add_constant(&k);
            let guard = normalize_atom(shifted.clone(), Relation::Dvd(m.to_integer()), Sort::Int)
                .expect("int divisibility");
            if guard != Formula::False {
                let base = shifted.scale(&m.recip());
                let mut j = BigInt::zero();
                while j < period {
                    let w = base.add_constant(&Rat::from_integer(j.clone()));
                    if !seen.contains(&w) {
                        seen.push(w.clone());
                        out.push(Formula::and(vec![guard.clone(), subst(f, v, &w)]));
                    }
                    j += 1;
                }
            }
            k += Rat::one();
        }
    }
    Formula::or(out)
}

/// Virtual term substitution on a negation-normal real formula with test
/// points `-inf`, weak lower bounds and equalities, and strict lower
/// bounds plus an infinitesimal.
fn vts(f: &Formula, v: &str) -> Formula {
    let atoms: Vec<Atom> = f.atoms().into_iter().filter(|a| a.mentions(v)).cloned().collect();
    let minus_inf = map_atoms(f, &|a| {
        if !a.mentions(v) {
            return Formula::Atom(a.clone());
        }
        match a.rel() {
            Rel::Eq => Formula::False,
            _ => Formula::from_bool(a.term().coeff(v).is_positive()),
        }
    });
    let mut out = vec![minus_inf];
    for a in &atoms {
        let c = a.term().coeff(v);
        let e = a.term().without(v).scale(&-c.recip());
        match a.rel() {
            Rel::Eq => out.push(subst(f, v, &e)),
            Rel::Le if c.is_negative() => out.push(subst(f, v, &e)),
            Rel::Lt if c.is_negative() => out.push(plus_epsilon(f, v, &e)),
            _ => {}
        }
    }
    Formula::or(out)
}

/// `f[v := e + ε]` for an infinitesimal ε > 0.
fn plus_epsilon(f: &Formula, v: &str, e: &LinearTerm) -> Formula {
    map_atoms(f, &|a| {
        if !a.mentions(v) {
            return Formula::Atom(a.clone());
        }
        let c = a.term().coeff(v);
        let at = a.term().substitute(v, e);
        let rel = match a.rel() {
            Rel::Eq => return Formula::False,
            _ if c.is_positive() => Relation::Lt,
            _ => Relation::Le,
        };
        normalize_atom(at, rel, Sort::Real).expect("real atom")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{text::parse_formula, SortEnv, Valuation};

    fn env(sort: Sort) -> SortEnv {
        ["x", "y", "z"].iter().map(|v| (v.to_string(), sort)).collect()
    }

    #[test]
    fn general_cooper_matches_cell_path() {
        let f = parse_formula("(3*y >= x || 2 | y + x) && (y < 2*x || 5*y = x + 1) && !(3 | y)", &env(Sort::Int))
            .unwrap();
        let nnf = to_nnf(&f).unwrap();
        let direct = cooper(&nnf, "y");
        let cells = exists("y", Sort::Int, &f).unwrap();
        for x in -15..15 {
            let v = Valuation::from_ints([("x", x)]);
            let brute = (-60..60).any(|y| f.eval(&v.clone().with("y", y.into_rat())).unwrap());
            assert_eq!(direct.eval(&v).unwrap(), brute, "cooper x={x}");
            assert_eq!(cells.eval(&v).unwrap(), brute, "cells x={x}");
        }
    }

    #[test]
    fn general_vts_matches_cell_path() {
        let f = parse_formula("(y > x || y = 2*x + 1) && (y < 3 || y <= -x) && y != 0", &env(Sort::Real)).unwrap();
        let nnf = to_nnf(&f).unwrap();
        let direct = vts(&nnf, "y");
        let cells = exists("y", Sort::Real, &f).unwrap();
        let half = Rat::new(1.into(), 2.into());
        for n in -12..12 {
            let x = Rat::from_integer(n.into()) * &half;
            let v = Valuation::new().with("x", x.clone());
            // ground truth from the critical points of the body in y
            let mut pts = vec![x.clone(), &x * Rat::from_integer(2.into()) + Rat::one(), Rat::from_integer(3.into()), -x.clone(), Rat::zero()];
            pts.sort();
            let mut probes = pts.clone();
            for w in pts.windows(2) {
                probes.push((&w[0] + &w[1]) * &half);
            }
            probes.push(&pts[0] - Rat::one());
            probes.push(pts.last().unwrap() + Rat::one());
            let brute = probes.iter().any(|y| f.eval(&v.clone().with("y", y.clone())).unwrap());
            assert_eq!(direct.eval(&v).unwrap(), brute, "vts x={x}");
            assert_eq!(cells.eval(&v).unwrap(), brute, "cells x={x}");
        }
    }

    trait IntoRat {
        fn into_rat(self) -> Rat;
    }
    impl IntoRat for i64 {
        fn into_rat(self) -> Rat {
            Rat::from_integer(self.into())
        }
    }
}
