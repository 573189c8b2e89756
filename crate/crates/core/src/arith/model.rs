use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{infer_sorts, qe, ArithError};
use crate::logic::{rat, Formula, LogicError, Rat, Rel, Sort, Valuation};

/// A satisfying valuation of `vars`, or `None` when `f` is unsatisfiable.
///
/// Deterministic: variables are fixed in order. Each one takes the least
/// value that keeps the rest of the formula satisfiable, or, when such
/// values are unbounded below, the greatest one not above zero.
pub fn find_model(f: &Formula, vars: &[String]) -> Result<Option<Valuation>, ArithError> {
    if !f.is_quantifier_free() {
        return Err(LogicError::Quantified.into());
    }
    if let Some(v) = f.free_vars().into_iter().find(|v| !vars.contains(v)) {
        return Err(LogicError::MissingVariable(v).into());
    }
    let env = infer_sorts(f);
    let sort = |v: &String| env.get(v).copied().unwrap_or(Sort::Int);
    let mut model = Valuation::new();
    let mut current = f.clone();
    for (i, v) in vars.iter().enumerate() {
        let mut proj = current.clone();
        for u in vars[i + 1..].iter().rev() {
            proj = qe::exists(u, sort(u), &proj)?;
        }
        let Some(value) = preferred_value(&proj, v, sort(v))? else {
            return Ok(None);
        };
        model.insert(v.clone(), value);
        current = current.substitute(&model);
    }
    debug_assert!(f.eval(&model).unwrap_or(false));
    Ok(Some(model))
}

/// Preferred value of `v` in a quantifier-free formula whose only variable
/// is `v`. Between consecutive thresholds the truth value is constant for
/// reals and periodic for integers, so a finite candidate set decides it.
fn preferred_value(f: &Formula, v: &str, sort: Sort) -> Result<Option<Rat>, ArithError> {
    let mut thresholds: Vec<Rat> = Vec::new();
    let mut period = BigInt::one();
    for a in f.atoms() {
        let c = a.term().coeff(v);
        if c.is_zero() {
            continue;
        }
        match a.rel() {
            Rel::Dvd(k) => period = period.lcm(k),
            _ => thresholds.push(-a.term().constant_part() / &c),
        }
    }
    thresholds.sort();
    thresholds.dedup();
    let holds = |x: &Rat| f.eval(&Valuation::new().with(v, x.clone()));
    let (below, mut cands): (Vec<Rat>, Vec<Rat>) = match sort {
        Sort::Int => {
            let l = Rat::from_integer(period);
            let span = |from: Rat, to: &Rat| {
                let mut out = Vec::new();
                let mut x = from;
                while x <= *to {
                    out.push(x.clone());
                    x += Rat::one();
                }
                out
            };
            let mut cands = span(-l.clone() + rat(1), &Rat::zero());
            let below = match thresholds.first() {
                Some(t) => {
                    let top = t.floor() - rat(1);
                    span(&top - &l + rat(1), &top)
                }
                None => cands.clone(),
            };
            for t in &thresholds {
                let pad = &l + rat(1);
                cands.extend(span(t.floor() - &pad, &(t.ceil() + &pad)));
            }
            (below, cands)
        }
        Sort::Real => {
            let mut cands = vec![Rat::zero()];
            let below = match (thresholds.first(), thresholds.last()) {
                (Some(lo), Some(hi)) => {
                    cands.push(hi + rat(1));
                    vec![lo - rat(1)]
                }
                _ => vec![Rat::zero()],
            };
            cands.extend(thresholds.iter().cloned());
            let half = Rat::new(1.into(), 2.into());
            cands.extend(thresholds.windows(2).map(|w| (&w[0] + &w[1]) * &half));
            (below, cands)
        }
    };
    let mut unbounded = false;
    for x in &below {
        if holds(x)? {
            unbounded = true;
            break;
        }
    }
    if unbounded {
        cands.extend(below);
        cands.retain(|x| *x <= Rat::zero());
        cands.sort_by(|a, b| b.cmp(a));
    } else {
        if sort == Sort::Real {
            cands.retain(|x| !x.is_zero() || thresholds.is_empty() || thresholds.contains(x));
        }
        cands.sort();
    }
    cands.dedup();
    for x in cands {
        if holds(&x)? {
            return Ok(Some(x));
        }
    }
    Ok(None)
}
