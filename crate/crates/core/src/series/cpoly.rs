//! Polynomials in the perturbation symbols `c_1..c_r`, truncated by total degree.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{One, Zero};
use smallvec::SmallVec;

use super::{Coefficient, SymbolInvolution};
use crate::scalar::Scalar;

/// Exponent vector over symbols, stored without trailing zeros so that
/// polynomials over different symbol counts compare consistently.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(SmallVec<[u32; 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn new(exponents: impl IntoIterator<Item = u32>) -> Self {
        let mut v: SmallVec<[u32; 4]> = exponents.into_iter().collect();
        while v.last() == Some(&0) {
            v.pop();
        }
        Monomial(v)
    }

    pub fn symbol(i: usize) -> Self {
        let mut v = SmallVec::from_elem(0, i + 1);
        v[i] = 1;
        Monomial(v)
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    /// Exponents padded to `len`.
    pub fn exponents(&self, len: usize) -> Vec<u32> {
        (0..len.max(self.0.len())).map(|i| self.exponent(i)).collect()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let len = self.0.len().max(other.0.len());
        Monomial((0..len).map(|i| self.exponent(i) + other.exponent(i)).collect())
    }

    pub fn permuted(&self, inv: &SymbolInvolution) -> Self {
        let mut v: Vec<u32> = Vec::new();
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let j = inv.apply(i);
            if v.len() <= j {
                v.resize(j + 1, 0);
            }
            v[j] += e;
        }
        Monomial::new(v)
    }

    /// Render as `c1^2*c3` with the given names (`c{i+1}` when missing), `1` for the unit.
    pub fn render(&self, names: &[String]) -> String {
        if self.is_one() {
            return "1".into();
        }
        let mut parts = Vec::new();
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let name = names.get(i).cloned().unwrap_or_else(|| format!("c{}", i + 1));
            parts.push(if e == 1 { name } else { format!("{name}^{e}") });
        }
        parts.join("*")
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let len = self.0.len().max(other.0.len());
            for i in 0..len {
                match other.exponent(i).cmp(&self.exponent(i)) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&[]))
    }
}

/// Polynomial in perturbation symbols with scalar coefficients.
///
/// `max_degree = None` means exact (untruncated); binary operations keep the
/// smaller of the two bounds, so constants act exactly.
#[derive(Clone)]
pub struct CPoly<T> {
    terms: BTreeMap<Monomial, T>,
    max_degree: Option<u32>,
}

impl<T: Scalar> CPoly<T> {
    pub fn constant(v: T) -> Self {
        let mut terms = BTreeMap::new();
        if !v.is_zero() {
            terms.insert(Monomial::one(), v);
        }
        CPoly { terms, max_degree: None }
    }

    /// The symbol `c_{i+1}` truncated at `max_degree`.
    pub fn symbol(i: usize, max_degree: Option<u32>) -> Self {
        Self::term(Monomial::symbol(i), T::one(), max_degree)
    }

    pub fn term(m: Monomial, v: T, max_degree: Option<u32>) -> Self {
        let mut p = CPoly { terms: BTreeMap::new(), max_degree };
        p.insert(m, v);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, T)>, max_degree: Option<u32>) -> Self {
        let mut p = CPoly { terms: BTreeMap::new(), max_degree };
        for (m, v) in terms {
            p.insert(m, v);
        }
        p
    }

    fn insert(&mut self, m: Monomial, v: T) {
        if self.max_degree.is_some_and(|d| m.degree() > d) || v.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(v);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().clone() + v;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.max_degree
    }

    /// Tighten the truncation bound, dropping terms above it.
    pub fn truncated(mut self, max_degree: u32) -> Self {
        let d = self.max_degree.map_or(max_degree, |m| m.min(max_degree));
        self.terms.retain(|m, _| m.degree() <= d);
        self.max_degree = Some(d);
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &T)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> T {
        self.terms.get(m).cloned().unwrap_or_else(T::zero)
    }

    pub fn constant_term(&self) -> T {
        self.coeff(&Monomial::one())
    }

    /// Smallest total degree of a stored term.
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).min()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    fn combined_bound(&self, other: &Self) -> Option<u32> {
        match (self.max_degree, other.max_degree) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    pub fn scale_by(&self, v: &T) -> Self {
        if v.is_zero() {
            return CPoly { terms: BTreeMap::new(), max_degree: self.max_degree };
        }
        CPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.clone() * v.clone())).collect(),
            max_degree: self.max_degree,
        }
    }

    pub fn product(&self, other: &Self) -> Self {
        let bound = self.combined_bound(other);
        let mut out = CPoly { terms: BTreeMap::new(), max_degree: bound };
        for (m1, c1) in &self.terms {
            let d1 = m1.degree();
            for (m2, c2) in &other.terms {
                if bound.is_some_and(|d| d1 + m2.degree() > d) {
                    continue;
                }
                out.insert(m1.mul(m2), c1.clone() * c2.clone());
            }
        }
        out
    }

    pub fn accumulate(&mut self, other: &Self) {
        self.max_degree = self.combined_bound(other);
        if let Some(d) = self.max_degree {
            self.terms.retain(|m, _| m.degree() <= d);
        }
        for (m, c) in &other.terms {
            self.insert(m.clone(), c.clone());
        }
    }

    pub fn conjugated(&self, inv: &SymbolInvolution) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| (m.permuted(inv), c.clone())), self.max_degree)
    }

    /// Substitute values for the symbols that have one; the rest stay symbolic.
    pub fn evaluate(&self, values: &[Option<T>]) -> Self {
        let mut out = CPoly { terms: BTreeMap::new(), max_degree: self.max_degree };
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Vec::new();
            for (i, e) in m.exponents(0).into_iter().enumerate() {
                match values.get(i).and_then(|v| v.as_ref()) {
                    Some(v) if e > 0 => {
                        for _ in 0..e {
                            coeff = coeff * v.clone();
                        }
                        rest.push(0);
                    }
                    _ => rest.push(e),
                }
            }
            out.insert(Monomial::new(rest), coeff);
        }
        out
    }

    /// Numeric value with every symbol assigned.
    pub fn value(&self, values: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut v = c.approx();
                for (i, e) in m.exponents(0).into_iter().enumerate() {
                    v *= values.get(i).copied().unwrap_or(0.0).powi(e as i32);
                }
                v
            })
            .sum()
    }

    /// Human-readable rendering such as `-1/2*c1^2 + 4*c2`.
    pub fn render(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let (neg, mag) = if c.is_negative() { (true, -c.clone()) } else { (false, c.clone()) };
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if m.is_one() {
                out.push_str(&mag.to_string());
            } else if mag.is_one() {
                out.push_str(&m.render(names));
            } else {
                out.push_str(&format!("{mag}*{}", m.render(names)));
            }
        }
        out
    }
}

impl<T: Scalar> PartialEq for CPoly<T> {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl<T: Scalar> fmt::Debug for CPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&[]))
    }
}

impl<T: Scalar> Zero for CPoly<T> {
    fn zero() -> Self {
        CPoly { terms: BTreeMap::new(), max_degree: None }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<T: Scalar> One for CPoly<T> {
    fn one() -> Self {
        Self::constant(T::one())
    }
}

impl<T: Scalar> Add for CPoly<T> {
    type Output = Self;

    fn add(mut self, other: Self) -> Self {
        self.accumulate(&other);
        self
    }
}

impl<T: Scalar> Sub for CPoly<T> {
    type Output = Self;

    fn sub(mut self, other: Self) -> Self {
        self.accumulate(&-other);
        self
    }
}

impl<T: Scalar> Neg for CPoly<T> {
    type Output = Self;

    fn neg(self) -> Self {
        CPoly { terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect(), max_degree: self.max_degree }
    }
}

impl<T: Scalar> Mul for CPoly<T> {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        self.product(&other)
    }
}

impl<T: Scalar> Coefficient for CPoly<T> {
    type Scalar = T;

    fn from_scalar(v: T) -> Self {
        Self::constant(v)
    }

    fn scale(&self, v: &T) -> Self {
        self.scale_by(v)
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self.product(other)
    }

    fn add_assign_ref(&mut self, other: &Self) {
        self.accumulate(other);
    }

    fn conjugate(&self, inv: &SymbolInvolution) -> Self {
        self.conjugated(inv)
    }

    fn as_scalar(&self) -> Option<T> {
        match self.terms.len() {
            0 => Some(T::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational as Q;

    fn c(i: usize, d: u32) -> CPoly<Q> {
        CPoly::symbol(i, Some(d))
    }

    #[test]
    fn truncation_applies_after_products() {
        let x = c(0, 2);
        let x3 = x.clone() * x.clone() * x.clone();
        assert!(x3.is_zero());
        let y = (CPoly::one() + x.clone()) * (CPoly::one() + x.clone());
        assert_eq!(y.num_terms(), 3);
        assert_eq!(y.coeff(&Monomial::new([1])), Q::from_int(2));
    }

    #[test]
    fn constants_are_exact() {
        let p = CPoly::constant(Q::from_int(3)) * c(1, 1);
        assert_eq!(p.max_degree(), Some(1));
        assert_eq!(p.coeff(&Monomial::new([0, 1])), Q::from_int(3));
    }

    #[test]
    fn conjugation_swaps_symbols() {
        let inv = SymbolInvolution::from_pairs(3, &[(1, 2)]);
        let p = c(1, 3) * c(1, 3) + c(0, 3);
        let q = p.conjugated(&inv);
        assert_eq!(q.coeff(&Monomial::new([0, 0, 2])), Q::from_int(1));
        assert_eq!(q.coeff(&Monomial::new([1])), Q::from_int(1));
        assert_eq!(q.conjugated(&inv), p);
    }

    #[test]
    fn evaluation() {
        let p = c(0, 3) * c(1, 3) + c(1, 3);
        let e = p.evaluate(&[Some(Q::from_int(2)), None]);
        assert_eq!(e, CPoly::term(Monomial::symbol(1), Q::from_int(3), Some(3)));
        assert_eq!(p.value(&[2.0, 5.0]), 15.0);
    }

    #[test]
    fn rendering() {
        let p = c(0, 3) * c(0, 3).scale_by(&Q::from_ratio(-1, 2)) + CPoly::constant(Q::from_int(4));
        assert_eq!(p.render(&[]), "4 - 1/2*c1^2");
        let names = vec!["a".to_string()];
        assert_eq!(p.render(&names), "4 - 1/2*a^2");
    }

    #[test]
    fn monomial_order_is_graded() {
        let mut v = vec![Monomial::new([0, 2]), Monomial::one(), Monomial::new([1, 1]), Monomial::new([2]), Monomial::new([0, 1])];
        v.sort();
        assert_eq!(v, vec![Monomial::one(), Monomial::new([0, 1]), Monomial::new([2]), Monomial::new([1, 1]), Monomial::new([0, 2])]);
    }
}
