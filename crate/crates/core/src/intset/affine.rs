//! Affine expressions over named integer variables.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// `sum(coeff * var) + constant`, with arbitrary-precision coefficients.
///
/// Zero coefficients are never stored, so two expressions are equal iff they
/// denote the same affine function.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct AffineExpr {
    terms: BTreeMap<String, BigInt>,
    constant: BigInt,
}

impl AffineExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        AffineExpr {
            terms: BTreeMap::new(),
            constant: c.into(),
        }
    }

    pub fn var(name: impl Into<String>) -> Self {
        Self::term(name, 1)
    }

    pub fn term(name: impl Into<String>, coeff: impl Into<BigInt>) -> Self {
        let mut e = Self::zero();
        e.add_term(name, coeff.into());
        e
    }

    pub fn add_term(&mut self, name: impl Into<String>, coeff: BigInt) {
        let name = name.into();
        let entry = self.terms.entry(name.clone()).or_insert_with(BigInt::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&name);
        }
    }

    pub fn coeff(&self, name: &str) -> BigInt {
        self.terms.get(name).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn constant_term(&self) -> &BigInt {
        &self.constant
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, &BigInt)> {
        self.terms.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.terms.keys().map(String::as_str)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.terms.contains_key(name)
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        AffineExpr {
            terms: self.terms.iter().map(|(n, c)| (n.clone(), c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    /// Replaces every occurrence of `name` by `value`.
    pub fn substitute(&self, name: &str, value: &AffineExpr) -> Self {
        match self.terms.get(name) {
            None => self.clone(),
            Some(c) => {
                let mut rest = self.clone();
                rest.terms.remove(name);
                rest + value.scale(c)
            }
        }
    }

    pub fn rename(&self, f: impl Fn(&str) -> String) -> Self {
        let mut out = Self::constant(self.constant.clone());
        for (n, c) in &self.terms {
            out.add_term(f(n), c.clone());
        }
        out
    }

    /// Evaluates with every variable bound by `lookup`; `None` if one is unbound.
    pub fn eval(&self, lookup: impl Fn(&str) -> Option<i64>) -> Option<BigInt> {
        let mut acc = self.constant.clone();
        for (n, c) in &self.terms {
            acc += c * BigInt::from(lookup(n)?);
        }
        Some(acc)
    }
}

impl From<i64> for AffineExpr {
    fn from(c: i64) -> Self {
        AffineExpr::constant(c)
    }
}

impl Add for AffineExpr {
    type Output = AffineExpr;
    fn add(mut self, rhs: AffineExpr) -> AffineExpr {
        for (n, c) in rhs.terms {
            self.add_term(n, c);
        }
        self.constant += rhs.constant;
        self
    }
}

impl Sub for AffineExpr {
    type Output = AffineExpr;
    fn sub(self, rhs: AffineExpr) -> AffineExpr {
        self + (-rhs)
    }
}

impl Neg for AffineExpr {
    type Output = AffineExpr;
    fn neg(self) -> AffineExpr {
        AffineExpr {
            terms: self.terms.into_iter().map(|(n, c)| (n, -c)).collect(),
            constant: -self.constant,
        }
    }
}

impl Mul<i64> for AffineExpr {
    type Output = AffineExpr;
    fn mul(self, rhs: i64) -> AffineExpr {
        self.scale(&BigInt::from(rhs))
    }
}

/// Writes `coeff*name` terms in the compact `2i - j + 3` style.
pub(crate) fn write_linear<'a>(
    f: &mut fmt::Formatter<'_>,
    terms: impl Iterator<Item = (&'a str, BigInt)>,
    constant: &BigInt,
) -> fmt::Result {
    let mut first = true;
    for (name, c) in terms {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        if first {
            if c.is_negative() {
                f.write_str("-")?;
            }
        } else if c.is_negative() {
            f.write_str(" - ")?;
        } else {
            f.write_str(" + ")?;
        }
        if mag.is_one() {
            write!(f, "{name}")?;
        } else {
            write!(f, "{mag}{name}")?;
        }
        first = false;
    }
    if first {
        write!(f, "{constant}")
    } else if constant.is_zero() {
        Ok(())
    } else if constant.is_negative() {
        write!(f, " - {}", constant.abs())
    } else {
        write!(f, " + {constant}")
    }
}

impl fmt::Display for AffineExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_linear(
            f,
            self.terms.iter().map(|(n, c)| (n.as_str(), c.clone())),
            &self.constant,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    /// `expr >= 0`
    NonNegative,
    /// `expr = 0`
    Zero,
}

/// A single affine constraint `expr >= 0` or `expr = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub expr: AffineExpr,
    pub kind: ConstraintKind,
}

impl Constraint {
    pub fn ge(lhs: AffineExpr, rhs: AffineExpr) -> Self {
        Constraint {
            expr: lhs - rhs,
            kind: ConstraintKind::NonNegative,
        }
    }

    pub fn le(lhs: AffineExpr, rhs: AffineExpr) -> Self {
        Self::ge(rhs, lhs)
    }

    pub fn gt(lhs: AffineExpr, rhs: AffineExpr) -> Self {
        Self::ge(lhs, rhs + AffineExpr::constant(1))
    }

    pub fn lt(lhs: AffineExpr, rhs: AffineExpr) -> Self {
        Self::gt(rhs, lhs)
    }

    pub fn eq(lhs: AffineExpr, rhs: AffineExpr) -> Self {
        Constraint {
            expr: lhs - rhs,
            kind: ConstraintKind::Zero,
        }
    }

    pub fn holds(&self, lookup: impl Fn(&str) -> Option<i64>) -> Option<bool> {
        let v = self.expr.eval(lookup)?;
        Some(match self.kind {
            ConstraintKind::NonNegative => !v.is_negative(),
            ConstraintKind::Zero => v.is_zero(),
        })
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ConstraintKind::NonNegative => write!(f, "{} >= 0", self.expr),
            ConstraintKind::Zero => write!(f, "{} = 0", self.expr),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_terms_vanish() {
        let e = AffineExpr::var("i") - AffineExpr::var("i");
        assert!(e.is_constant());
        assert_eq!(e, AffineExpr::zero());
    }

    #[test]
    fn substitution_and_display() {
        let e = AffineExpr::var("j") - AffineExpr::constant(1);
        assert_eq!(e.to_string(), "j - 1");
        let s = e.substitute("j", &(AffineExpr::term("k", 2) + AffineExpr::constant(3)));
        assert_eq!(s.to_string(), "2k + 2");
        assert_eq!(AffineExpr::term("i", -1).to_string(), "-i");
        assert_eq!(AffineExpr::zero().to_string(), "0");
    }

    #[test]
    fn big_coefficients_do_not_wrap() {
        let big = BigInt::from(i64::MAX);
        let e = AffineExpr::term("x", big.clone()).scale(&big);
        assert_eq!(e.coeff("x"), &big * &big);
    }

    #[test]
    fn constraint_helpers() {
        let c = Constraint::lt(AffineExpr::var("i"), AffineExpr::var("n"));
        assert_eq!(c.to_string(), "-i + n - 1 >= 0");
        let look = |v: &str| match v {
            "i" => Some(3),
            "n" => Some(4),
            _ => None,
        };
        assert_eq!(c.holds(look), Some(true));
    }
}
