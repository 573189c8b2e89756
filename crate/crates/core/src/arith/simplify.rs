use std::collections::BTreeMap;

use num_traits::Signed;

use crate::logic::{normalize_atom, Cell, Formula, LinearTerm, Lit, Rat, Rel, Relation, Sort};

#[derive(Clone, Debug)]
struct Bound {
    value: Rat,
    strict: bool,
}

/// Bounds collected for one direction `p` (a constant-free term whose
/// leading coefficient is positive): `lo ◁ p ◁ hi`.
#[derive(Clone, Debug)]
struct Interval {
    dir: LinearTerm,
    sort: Sort,
    lo: Option<Bound>,
    hi: Option<Bound>,
}

fn tighter_hi(a: &Bound, b: &Bound) -> bool {
    a.value < b.value || (a.value == b.value && a.strict && !b.strict)
}

fn tighter_lo(a: &Bound, b: &Bound) -> bool {
    a.value > b.value || (a.value == b.value && a.strict && !b.strict)
}

enum Slot {
    Interval(usize),
    Other(Lit),
}

/// Keep the tightest bound per direction, merge matching weak bounds into
/// equalities and detect contradictions. Returns `None` for an unsatisfiable
/// cell. Literal order follows first occurrence.
pub(crate) fn simplify_cell(cell: &[Lit]) -> Option<Cell> {
    let mut slots: Vec<Slot> = Vec::new();
    let mut intervals: Vec<Interval> = Vec::new();
    let mut by_dir: BTreeMap<LinearTerm, usize> = BTreeMap::new();
    for lit in cell {
        let atom = &lit.atom;
        let bounded = lit.positive && !matches!(atom.rel(), Rel::Dvd(_));
        if !bounded {
            if slots.iter().any(|s| matches!(s, Slot::Other(o) if o == lit)) {
                continue;
            }
            let clash = slots
                .iter()
                .any(|s| matches!(s, Slot::Other(o) if o.atom == lit.atom && o.positive != lit.positive));
            if clash {
                return None;
            }
            slots.push(Slot::Other(lit.clone()));
            continue;
        }
        let t = atom.term();
        let c = t.constant_part().clone();
        let raw = t.add_constant(&-c.clone());
        let flip = raw.leading_coeff().is_some_and(|a| a.is_negative());
        let dir = if flip { -&raw } else { raw };
        // flip == false: dir + c REL 0, i.e. dir REL -c (upper bound)
        // flip == true: -dir + c REL 0, i.e. dir REL' c (lower bound)
        let idx = *by_dir.entry(dir.clone()).or_insert_with(|| {
            intervals.push(Interval {
                dir,
                sort: atom.sort(),
                lo: None,
                hi: None,
            });
            slots.push(Slot::Interval(intervals.len() - 1));
            intervals.len() - 1
        });
        let iv = &mut intervals[idx];
        let strict = *atom.rel() == Rel::Lt;
        let value = if flip { c } else { -c };
        let b = Bound { value, strict };
        let (set_lo, set_hi) = match atom.rel() {
            Rel::Eq => (true, true),
            _ if flip => (true, false),
            _ => (false, true),
        };
        if set_lo && iv.lo.as_ref().map_or(true, |o| tighter_lo(&b, o)) {
            iv.lo = Some(b.clone());
        }
        if set_hi && iv.hi.as_ref().map_or(true, |o| tighter_hi(&b, o)) {
            iv.hi = Some(b);
        }
    }
    let mut out = Vec::new();
    for slot in slots {
        match slot {
            Slot::Other(l) => out.push(l),
            Slot::Interval(i) => {
                let iv = &intervals[i];
                if let (Some(lo), Some(hi)) = (&iv.lo, &iv.hi) {
                    if lo.value > hi.value || (lo.value == hi.value && (lo.strict || hi.strict)) {
                        return None;
                    }
                    if lo.value == hi.value {
                        push_atom(&mut out, iv.dir.add_constant(&-lo.value.clone()), Relation::Eq, iv.sort)?;
                        continue;
                    }
                }
                if let Some(lo) = &iv.lo {
                    let rel = if lo.strict { Relation::Lt } else { Relation::Le };
                    push_atom(&mut out, (-&iv.dir).add_constant(&lo.value), rel, iv.sort)?;
                }
                if let Some(hi) = &iv.hi {
                    let rel = if hi.strict { Relation::Lt } else { Relation::Le };
                    push_atom(&mut out, iv.dir.add_constant(&-hi.value.clone()), rel, iv.sort)?;
                }
            }
        }
    }
    Some(out)
}

fn push_atom(out: &mut Cell, term: LinearTerm, rel: Relation, sort: Sort) -> Option<()> {
    match normalize_atom(term, rel, sort).expect("sort preserved") {
        Formula::Atom(a) => out.push(Lit::pos(a)),
        Formula::True => {}
        Formula::False => return None,
        other => unreachable!("bound re-normalized to {other}"),
    }
    Some(())
}

/// Flatten a conjunction-shaped formula into a cell. `None` if it is false;
/// panics on disjunctions (callers only pass substituted cells).
pub(crate) fn conj_to_cell(f: Formula) -> Option<Cell> {
    let mut out = Vec::new();
    let mut stack = vec![f];
    while let Some(g) = stack.pop() {
        match g {
            Formula::True => {}
            Formula::False => return None,
            Formula::Atom(a) => out.push(Lit::pos(a)),
            Formula::Not(inner) => match *inner {
                Formula::Atom(a) => out.push(Lit { atom: a, positive: false }),
                other => unreachable!("negation of {other} in a cell"),
            },
            Formula::And(parts) => stack.extend(parts.into_iter().rev()),
            other => unreachable!("non-conjunctive {other} in a cell"),
        }
    }
    Some(out)
}

/// Substitute `var := by` in every literal of a cell and simplify.
pub(crate) fn subst_cell(cell: &[Lit], var: &str, by: &LinearTerm) -> Option<Cell> {
    let mut out = Vec::with_capacity(cell.len());
    for l in cell {
        let f = l.atom.substitute(var, by);
        let f = if l.positive { f } else { Formula::not(f) };
        out.extend(conj_to_cell(f)?);
    }
    simplify_cell(&out)
}
