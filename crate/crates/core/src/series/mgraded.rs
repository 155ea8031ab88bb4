//! Laurent polynomials in `μ = m^{1/2}` with [`CPoly`] coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{One, Zero};

use super::{CPoly, Coefficient, SymbolInvolution};
use crate::scalar::Scalar;

/// Sanity bound on |μ-exponent|; exceeding it means a weight bookkeeping bug.
pub const MU_EXPONENT_LIMIT: i32 = 4096;

#[derive(Clone)]
pub struct MGraded<T> {
    terms: BTreeMap<i32, CPoly<T>>,
}

impl<T: Scalar> MGraded<T> {
    /// `μ^exponent · coeff`.
    pub fn monomial(exponent: i32, coeff: CPoly<T>) -> Self {
        let mut g = MGraded::zero();
        g.insert(exponent, coeff);
        g
    }

    /// `v · μ^exponent`.
    pub fn scalar(exponent: i32, v: T) -> Self {
        Self::monomial(exponent, CPoly::constant(v))
    }

    pub fn from_cpoly(p: CPoly<T>) -> Self {
        Self::monomial(0, p)
    }

    fn insert(&mut self, exponent: i32, coeff: CPoly<T>) {
        assert!(exponent.abs() <= MU_EXPONENT_LIMIT, "μ-exponent {exponent} out of range");
        match self.terms.entry(exponent) {
            std::collections::btree_map::Entry::Vacant(e) => {
                if !coeff.is_zero() {
                    e.insert(coeff);
                }
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                e.get_mut().accumulate(&coeff);
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i32, &CPoly<T>)> {
        self.terms.iter().map(|(e, p)| (*e, p))
    }

    pub fn part(&self, exponent: i32) -> CPoly<T> {
        self.terms.get(&exponent).cloned().unwrap_or_else(CPoly::zero)
    }

    pub fn max_exponent(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    pub fn min_exponent(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    /// Multiply by `μ^k`.
    pub fn shifted(&self, k: i32) -> Self {
        let mut out = MGraded::zero();
        for (e, p) in &self.terms {
            out.insert(e + k, p.clone());
        }
        out
    }

    /// Terms with exponent strictly above zero.
    pub fn positive_part(&self) -> Self {
        MGraded { terms: self.terms.iter().filter(|(e, _)| **e > 0).map(|(e, p)| (*e, p.clone())).collect() }
    }

    /// The negative exponent closest to zero and its coefficient.
    pub fn leading_negative(&self) -> Option<(i32, &CPoly<T>)> {
        self.terms.range(..0).next_back().map(|(e, p)| (*e, p))
    }

    pub fn map_parts(&self, f: impl Fn(&CPoly<T>) -> CPoly<T>) -> Self {
        let mut out = MGraded::zero();
        for (e, p) in &self.terms {
            out.insert(*e, f(p));
        }
        out
    }

    pub fn evaluate(&self, values: &[Option<T>]) -> Self {
        self.map_parts(|p| p.evaluate(values))
    }

    pub fn truncated(&self, max_c_degree: u32) -> Self {
        self.map_parts(|p| p.clone().truncated(max_c_degree))
    }

    /// Numeric value at `m` (so `μ = √m`) with symbol values, keeping only
    /// exponents in `[min_exponent, max_exponent]`.
    pub fn value_at(&self, m: f64, symbols: &[f64], exponents: std::ops::RangeInclusive<i32>) -> f64 {
        self.terms
            .iter()
            .filter(|(e, _)| exponents.contains(e))
            .map(|(e, p)| p.value(symbols) * m.powf(*e as f64 / 2.0))
            .sum()
    }

    /// Inverse of an element whose μ⁰ symbol-free part is a unit and whose
    /// remainder has positive c-degree; the geometric series stops by truncation.
    pub fn inverse_unit(&self) -> Option<Self> {
        let unit = self.part(0).constant_term();
        if unit.is_zero() {
            return None;
        }
        let inv_unit = T::one() / unit.clone();
        let rest = (self.clone() - MGraded::scalar(0, unit)).scale(&inv_unit);
        if rest.terms.values().any(|p| p.min_degree() == Some(0) || p.max_degree().is_none()) {
            return None;
        }
        let mut acc = MGraded::one();
        let mut power = MGraded::one();
        loop {
            power = -power.mul_ref(&rest);
            if power.is_zero() {
                break;
            }
            acc.add_assign_ref(&power);
        }
        Some(acc.scale(&inv_unit))
    }

    pub fn render(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .rev()
            .map(|(e, p)| format!("({})·μ^{e}", p.render(names)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl<T: Scalar> PartialEq for MGraded<T> {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl<T: Scalar> fmt::Debug for MGraded<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&[]))
    }
}

impl<T: Scalar> Zero for MGraded<T> {
    fn zero() -> Self {
        MGraded { terms: BTreeMap::new() }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<T: Scalar> One for MGraded<T> {
    fn one() -> Self {
        Self::scalar(0, T::one())
    }
}

impl<T: Scalar> Add for MGraded<T> {
    type Output = Self;

    fn add(mut self, other: Self) -> Self {
        self.add_assign_ref(&other);
        self
    }
}

impl<T: Scalar> Sub for MGraded<T> {
    type Output = Self;

    fn sub(mut self, other: Self) -> Self {
        self.add_assign_ref(&-other);
        self
    }
}

impl<T: Scalar> Neg for MGraded<T> {
    type Output = Self;

    fn neg(self) -> Self {
        MGraded { terms: self.terms.into_iter().map(|(e, p)| (e, -p)).collect() }
    }
}

impl<T: Scalar> Mul for MGraded<T> {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        self.mul_ref(&other)
    }
}

impl<T: Scalar> Coefficient for MGraded<T> {
    type Scalar = T;

    fn from_scalar(v: T) -> Self {
        Self::scalar(0, v)
    }

    fn scale(&self, v: &T) -> Self {
        self.map_parts(|p| p.scale_by(v))
    }

    fn mul_ref(&self, other: &Self) -> Self {
        let mut out = MGraded::zero();
        for (e1, p1) in &self.terms {
            for (e2, p2) in &other.terms {
                out.insert(e1 + e2, p1.product(p2));
            }
        }
        out
    }

    fn add_assign_ref(&mut self, other: &Self) {
        for (e, p) in &other.terms {
            self.insert(*e, p.clone());
        }
    }

    fn conjugate(&self, inv: &SymbolInvolution) -> Self {
        self.map_parts(|p| p.conjugated(inv))
    }

    fn as_scalar(&self) -> Option<T> {
        match self.terms.len() {
            0 => Some(T::zero()),
            1 => self.terms.get(&0).and_then(|p| p.as_scalar()),
            _ => None,
        }
    }
}
