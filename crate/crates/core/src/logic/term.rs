use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{LogicError, Rat, Valuation};

/// Build an exact rational from a machine integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Least common multiple of the denominators of `values`.
pub(crate) fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// `sum(coeff * var) + constant` with exact rational coefficients.
///
/// Variables are kept in name order and zero coefficients are never stored,
/// so structural equality is semantic equality of the linear form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LinearTerm {
    coeffs: BTreeMap<String, Rat>,
    constant: Rat,
}

impl LinearTerm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rat) -> Self {
        Self {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(name: impl Into<String>) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(name.into(), Rat::one());
        Self {
            coeffs,
            constant: Rat::zero(),
        }
    }

    pub fn from_parts(coeffs: impl IntoIterator<Item = (String, Rat)>, constant: Rat) -> Self {
        let mut t = Self::constant(constant);
        for (v, c) in coeffs {
            t.add_coeff(&v, c);
        }
        t
    }

    fn add_coeff(&mut self, var: &str, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.get_mut(var) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.coeffs.remove(var);
                }
            }
            None => {
                self.coeffs.insert(var.to_string(), c);
            }
        }
    }

    pub fn constant_part(&self) -> &Rat {
        &self.constant
    }

    pub fn coeff(&self, var: &str) -> Rat {
        self.coeffs.get(var).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&str, &Rat)> {
        self.coeffs.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn mentions(&self, var: &str) -> bool {
        self.coeffs.contains_key(var)
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.coeffs.keys().map(String::as_str)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// First (by name) variable coefficient, if any.
    pub fn leading_coeff(&self) -> Option<&Rat> {
        self.coeffs.values().next()
    }

    /// The term with `var`'s summand removed.
    pub fn without(&self, var: &str) -> Self {
        let mut t = self.clone();
        t.coeffs.remove(var);
        t
    }

    pub fn scale(&self, k: &Rat) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|(v, c)| (v.clone(), c * k))
                .collect(),
            constant: &self.constant * k,
        }
    }

    pub fn add_constant(&self, k: &Rat) -> Self {
        let mut t = self.clone();
        t.constant += k;
        t
    }

    /// Replace `var` by `by` everywhere.
    pub fn substitute(&self, var: &str, by: &LinearTerm) -> Self {
        match self.coeffs.get(var) {
            None => self.clone(),
            Some(c) => {
                let c = c.clone();
                &self.without(var) + &by.scale(&c)
            }
        }
    }

    /// Replace every variable bound in `v`; unbound variables remain.
    pub fn substitute_values(&self, v: &Valuation) -> Self {
        let mut out = Self::constant(self.constant.clone());
        for (name, c) in &self.coeffs {
            match v.get_opt(name) {
                Some(val) => out.constant += c * val,
                None => out.add_coeff(name, c.clone()),
            }
        }
        out
    }

    pub fn eval(&self, v: &Valuation) -> Result<Rat, LogicError> {
        let mut acc = self.constant.clone();
        for (name, c) in &self.coeffs {
            acc += c * v.get(name)?;
        }
        Ok(acc)
    }

    /// lcm of all denominators (coefficients and constant).
    pub fn denominator_lcm(&self) -> BigInt {
        denominator_lcm(self.coeffs.values().chain(std::iter::once(&self.constant)))
    }

    pub fn is_integral(&self) -> bool {
        self.constant.is_integer() && self.coeffs.values().all(|c| c.is_integer())
    }

    /// gcd of the (integral) variable coefficients; zero for a constant term.
    pub(crate) fn coeff_gcd(&self) -> BigInt {
        self.coeffs
            .values()
            .fold(BigInt::zero(), |g, c| g.gcd(&c.to_integer()))
    }

    pub(crate) fn map_coeffs(&self, f: impl Fn(&Rat) -> Rat, constant: Rat) -> Self {
        Self::from_parts(
            self.coeffs.iter().map(|(v, c)| (v.clone(), f(c))),
            constant,
        )
    }
}

impl Add for &LinearTerm {
    type Output = LinearTerm;
    fn add(self, rhs: &LinearTerm) -> LinearTerm {
        let mut t = self.clone();
        for (v, c) in &rhs.coeffs {
            t.add_coeff(v, c.clone());
        }
        t.constant += &rhs.constant;
        t
    }
}

impl Sub for &LinearTerm {
    type Output = LinearTerm;
    fn sub(self, rhs: &LinearTerm) -> LinearTerm {
        self + &(-rhs)
    }
}

impl Neg for &LinearTerm {
    type Output = LinearTerm;
    fn neg(self) -> LinearTerm {
        self.scale(&-Rat::one())
    }
}

impl Mul<&Rat> for &LinearTerm {
    type Output = LinearTerm;
    fn mul(self, k: &Rat) -> LinearTerm {
        self.scale(k)
    }
}

pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Writes `c*v` summands; returns whether anything was written.
fn write_summands(
    f: &mut fmt::Formatter<'_>,
    coeffs: &BTreeMap<String, Rat>,
    mut first: bool,
) -> Result<bool, fmt::Error> {
    for (v, c) in coeffs {
        let neg = c.is_negative();
        let mag = c.abs();
        if first {
            if neg {
                f.write_str("-")?;
            }
        } else {
            f.write_str(if neg { " - " } else { " + " })?;
        }
        if mag.is_one() {
            write!(f, "{v}")?;
        } else {
            write!(f, "{}*{v}", fmt_rat(&mag))?;
        }
        first = false;
    }
    Ok(!first)
}

impl fmt::Display for LinearTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrote = write_summands(f, &self.coeffs, true)?;
        if !wrote {
            return f.write_str(&fmt_rat(&self.constant));
        }
        if !self.constant.is_zero() {
            let sep = if self.constant.is_negative() { " - " } else { " + " };
            write!(f, "{sep}{}", fmt_rat(&self.constant.abs()))?;
        }
        Ok(())
    }
}

/// Display only the variable part (constant dropped); `0` when empty.
pub(crate) struct VarPart<'a>(pub &'a LinearTerm);

impl fmt::Display for VarPart<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !write_summands(f, &self.0.coeffs, true)? {
            f.write_str("0")?;
        }
        Ok(())
    }
}
