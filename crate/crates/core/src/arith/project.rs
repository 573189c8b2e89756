//! Elimination of one variable from a single conjunctive cell, either as a
//! plain projection or as a list of guarded witness cases.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::simplify::{simplify_cell, subst_cell};
use crate::logic::{normalize_atom, rat, Atom, Cell, Formula, LinearTerm, Lit, Rat, Rel, Relation, Sort};

/// One guarded witness: whenever `guard` holds, substituting `witness` for
/// the eliminated variable satisfies the original cell.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Case {
    pub guard: Cell,
    pub witness: LinearTerm,
}

/// A bound on `v` read off an atom `c*v + s REL 0`.
struct Bound<'a> {
    coeff: Rat,
    rest: LinearTerm,
    atom: &'a Atom,
}

struct Split<'a> {
    lower: Vec<Bound<'a>>,
    upper: Vec<Bound<'a>>,
    eq: Vec<Bound<'a>>,
    /// lcm of the divisibility moduli mentioning `v`
    period: BigInt,
    has_dvd: bool,
}

fn split<'a>(cell: &'a [Lit], v: &str) -> Split<'a> {
    let mut s = Split {
        lower: Vec::new(),
        upper: Vec::new(),
        eq: Vec::new(),
        period: BigInt::one(),
        has_dvd: false,
    };
    for lit in cell {
        let a = &lit.atom;
        if !a.mentions(v) {
            continue;
        }
        let coeff = a.term().coeff(v);
        let b = Bound {
            rest: a.term().without(v),
            coeff: coeff.clone(),
            atom: a,
        };
        match a.rel() {
            Rel::Dvd(k) => {
                s.has_dvd = true;
                s.period = s.period.lcm(k);
            }
            Rel::Eq => s.eq.push(b),
            _ if coeff.is_negative() => s.lower.push(b),
            _ => s.upper.push(b),
        }
    }
    s
}

fn positive(cell: Cell, extra: Option<Formula>) -> Option<Cell> {
    let mut out = cell;
    match extra {
        None | Some(Formula::True) => {}
        Some(Formula::False) => return None,
        Some(Formula::Atom(a)) => out.insert(0, Lit::pos(a)),
        Some(other) => unreachable!("guard {other}"),
    }
    simplify_cell(&out)
}

fn dvd_guard(modulus: &Rat, term: &LinearTerm) -> Formula {
    normalize_atom(term.clone(), Relation::Dvd(modulus.to_integer()), Sort::Int)
        .expect("int divisibility")
}

/// Witness cases for `∃v. cell`; the disjunction of the guards is
/// equivalent to the projection.
pub(crate) fn witness_cases(cell: &[Lit], v: &str, sort: Sort) -> Vec<Case> {
    let sp = split(cell, v);
    let mut out: Vec<Case> = Vec::new();
    let mut push = |guard: Option<Cell>, witness: LinearTerm| {
        if let Some(guard) = guard {
            if !out.iter().any(|c| c.guard == guard) {
                out.push(Case { guard, witness });
            }
        }
    };
    if let Some(e) = sp.eq.first() {
        // c*v + s = 0  =>  v = -s/c
        let w = e.rest.scale(&-e.coeff.recip());
        let extra = match sort {
            Sort::Int if !e.coeff.abs().is_one() => Some(dvd_guard(&e.coeff.abs(), &e.rest)),
            _ => None,
        };
        push(subst_cell(cell, v, &w).and_then(|g| positive(g, extra)), w);
        return out;
    }
    match sort {
        Sort::Int => {
            let period = Rat::from_integer(sp.period.clone());
            let lower_cost: BigInt = sp.lower.iter().map(|b| b.coeff.abs().to_integer()).sum();
            let upper_cost: BigInt = sp.upper.iter().map(|b| b.coeff.abs().to_integer()).sum();
            let use_upper = sp.lower.is_empty() && !sp.upper.is_empty()
                || (!sp.upper.is_empty() && upper_cost < lower_cost);
            let bounds = if use_upper { &sp.upper } else { &sp.lower };
            if bounds.is_empty() {
                let mut j = Rat::zero();
                while j < period {
                    let w = LinearTerm::constant(j.clone());
                    push(subst_cell(cell, v, &w), w);
                    j += Rat::one();
                }
                return out;
            }
            for b in bounds {
                // lower: |c|*v >= s, least v = (s + k)/|c| with |c| | s + k
                // upper: c*v <= -s, greatest v = (-s - k)/c with c | s + k
                let a = b.coeff.abs();
                let mut k = Rat::zero();
                while k < a {
                    let shifted = b.rest.add_constant(&k);
                    let base = if use_upper {
                        shifted.scale(&-a.recip())
                    } else {
                        shifted.scale(&a.recip())
                    };
                    let guard = dvd_guard(&a, &shifted);
                    if guard != Formula::False {
                        let mut j = Rat::zero();
                        while j < period {
                            let off = if use_upper { -j.clone() } else { j.clone() };
                            let w = base.add_constant(&off);
                            push(subst_cell(cell, v, &w).and_then(|g| positive(g, Some(guard.clone()))), w);
                            j += Rat::one();
                        }
                    }
                    k += Rat::one();
                }
            }
        }
        Sort::Real => {
            let value = |b: &Bound<'_>| b.rest.scale(&-b.coeff.recip());
            let lows: Vec<LinearTerm> = sp.lower.iter().map(value).collect();
            let ups: Vec<LinearTerm> = sp.upper.iter().map(value).collect();
            let half = Rat::new(1.into(), 2.into());
            let cands: Vec<LinearTerm> = match (lows.is_empty(), ups.is_empty()) {
                (true, true) => vec![LinearTerm::zero()],
                (false, true) => lows.iter().map(|l| l.add_constant(&rat(1))).collect(),
                (true, false) => ups.iter().map(|u| u.add_constant(&rat(-1))).collect(),
                (false, false) => {
                    let mut mids = Vec::new();
                    for l in &lows {
                        for u in &ups {
                            mids.push((l + u).scale(&half));
                        }
                    }
                    mids
                }
            };
            for w in cands {
                push(subst_cell(cell, v, &w), w);
            }
        }
    }
    out
}

/// `∃v. cell` as a disjunction of cells. Uses pairwise bound combination
/// when that is exact (reals, or unit coefficients without divisibility).
pub(crate) fn project(cell: &[Lit], v: &str, sort: Sort) -> Vec<Cell> {
    let sp = split(cell, v);
    if sp.lower.is_empty() && sp.upper.is_empty() && sp.eq.is_empty() && !sp.has_dvd {
        return simplify_cell(cell).into_iter().collect();
    }
    let unit = |b: &Bound<'_>| b.coeff.abs().is_one();
    let exact_pairs = sp.eq.is_empty()
        && match sort {
            Sort::Real => true,
            Sort::Int => !sp.has_dvd && sp.lower.iter().chain(&sp.upper).all(unit),
        };
    if !exact_pairs {
        return witness_cases(cell, v, sort).into_iter().map(|c| c.guard).collect();
    }
    let mut out: Cell = cell.iter().filter(|l| !l.atom.mentions(v)).cloned().collect();
    for lo in &sp.lower {
        for up in &sp.upper {
            // lo: v >= s_l/|c_l| ; up: v <= -s_u/c_u
            let l = lo.rest.scale(&lo.coeff.abs().recip());
            let u = up.rest.scale(&-up.coeff.recip());
            let strict = *lo.atom.rel() == Rel::Lt || *up.atom.rel() == Rel::Lt;
            let rel = if strict { Relation::Lt } else { Relation::Le };
            match normalize_atom(&l - &u, rel, sort).expect("sort preserved") {
                Formula::True => {}
                Formula::False => return Vec::new(),
                Formula::Atom(a) => out.push(Lit::pos(a)),
                other => unreachable!("pair bound {other}"),
            }
        }
    }
    simplify_cell(&out).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{cell_formula, to_dnf, text::parse_formula, SortEnv, Valuation, DEFAULT_CELL_BUDGET};

    fn cell(src: &str, sort: Sort) -> Cell {
        let env: SortEnv = ["x", "y"].iter().map(|v| (v.to_string(), sort)).collect();
        let f = parse_formula(src, &env).unwrap();
        to_dnf(&f, DEFAULT_CELL_BUDGET).unwrap().remove(0)
    }

    fn show(cells: &[Cell]) -> Vec<String> {
        cells.iter().map(|c| cell_formula(c).to_string()).collect()
    }

    #[test]
    fn pairwise_projection() {
        let c = cell("y > 1 && y <= x", Sort::Int);
        assert_eq!(show(&project(&c, "y", Sort::Int)), vec!["x >= 2"]);
        let c = cell("y > 1 && y < x", Sort::Real);
        assert_eq!(show(&project(&c, "y", Sort::Real)), vec!["x > 1"]);
    }

    #[test]
    fn witness_picks_the_least_lower_bound() {
        let c = cell("x >= 2 && y > 1 && y <= x", Sort::Int);
        let cases = witness_cases(&c, "y", Sort::Int);
        assert_eq!(cases.len(), 1);
        assert_eq!(cases[0].witness.to_string(), "2");
        assert_eq!(cell_formula(&cases[0].guard).to_string(), "x >= 2");
    }

    #[test]
    fn int_coefficients_need_divisibility_guards() {
        // 3y >= x && 3y <= x + 1: solvable iff x or x+1 divisible by 3... or x mod 3 = 2
        let c = cell("3*y >= x && 3*y <= x + 1", Sort::Int);
        let cases = witness_cases(&c, "y", Sort::Int);
        for x in -20..20 {
            let brute = (-20..20).any(|y| 3 * y >= x && 3 * y <= x + 1);
            let v = Valuation::from_ints([("x", x)]);
            let hit = cases.iter().find(|cs| cs.guard.iter().all(|l| l.eval(&v).unwrap()));
            assert_eq!(hit.is_some(), brute, "x={x}");
            if let Some(cs) = hit {
                let y = cs.witness.eval(&v).unwrap();
                assert!(y.is_integer());
                let full = v.clone().with("y", y);
                assert!(c.iter().all(|l| l.eval(&full).unwrap()));
            }
        }
    }

    #[test]
    fn equality_substitutes() {
        let c = cell("2*y = x && y >= 0", Sort::Int);
        let cases = witness_cases(&c, "y", Sort::Int);
        assert_eq!(cases.len(), 1);
        assert_eq!(cell_formula(&cases[0].guard).to_string(), "(2 | x && x >= 0)");
    }
}
