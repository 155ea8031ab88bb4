//! Truncated power series in `(z, z̄)`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use super::{Coefficient, SeriesError, SymbolInvolution};
use crate::multiindex::MultiIndex;

/// The monomial `z^S z̄^T`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BiKey {
    pub s: MultiIndex,
    pub t: MultiIndex,
}

impl BiKey {
    pub fn new(s: MultiIndex, t: MultiIndex) -> Self {
        BiKey { s, t }
    }

    pub fn degree(&self) -> u32 {
        self.s.order() + self.t.order()
    }

    pub fn swapped(&self) -> Self {
        BiKey { s: self.t.clone(), t: self.s.clone() }
    }

    pub fn is_constant(&self) -> bool {
        self.s.is_zero() && self.t.is_zero()
    }
}

impl Ord for BiKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.s.cmp(&other.s)).then_with(|| self.t.cmp(&other.t))
    }
}

impl PartialOrd for BiKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for BiKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for BiKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z^{} zb^{}", self.s, self.t)
    }
}

/// `Σ c_{S,T} z^S z̄^T` over keys with `|S| + |T| ≤ D_z`.
#[derive(Clone, PartialEq)]
pub struct BiSeries<C> {
    n: usize,
    dz: u32,
    coeffs: BTreeMap<BiKey, C>,
}

impl<C: Coefficient> BiSeries<C> {
    pub fn zero(n: usize, dz: u32) -> Self {
        BiSeries { n, dz, coeffs: BTreeMap::new() }
    }

    pub fn constant(n: usize, dz: u32, c: C) -> Self {
        let z = MultiIndex::zeros(n);
        Self::monomial(n, dz, z.clone(), z, c)
    }

    pub fn one(n: usize, dz: u32) -> Self {
        Self::constant(n, dz, C::one())
    }

    pub fn monomial(n: usize, dz: u32, s: MultiIndex, t: MultiIndex, c: C) -> Self {
        let mut out = Self::zero(n, dz);
        out.add_term(BiKey::new(s, t), c);
        out
    }

    /// `|z|² = Σ_i z^i z̄^i`.
    pub fn flat(n: usize, dz: u32) -> Self {
        let mut out = Self::zero(n, dz);
        for i in 0..n {
            out.add_term(BiKey::new(MultiIndex::unit(n, i), MultiIndex::unit(n, i)), C::one());
        }
        out
    }

    pub fn from_terms(n: usize, dz: u32, terms: impl IntoIterator<Item = (BiKey, C)>) -> Self {
        let mut out = Self::zero(n, dz);
        for (k, c) in terms {
            out.add_term(k, c);
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dz(&self) -> u32 {
        self.dz
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BiKey, &C)> {
        self.coeffs.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &BiKey> {
        self.coeffs.keys()
    }

    pub fn get(&self, key: &BiKey) -> Option<&C> {
        self.coeffs.get(key)
    }

    pub fn coeff(&self, s: &MultiIndex, t: &MultiIndex) -> C {
        self.coeffs.get(&BiKey::new(s.clone(), t.clone())).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant_term(&self) -> C {
        let z = MultiIndex::zeros(self.n);
        self.coeff(&z, &z)
    }

    /// Add `c · z^S z̄^T`, ignoring keys past the truncation.
    pub fn add_term(&mut self, key: BiKey, c: C) {
        debug_assert_eq!(key.s.len(), self.n);
        if key.degree() > self.dz || c.is_zero() {
            return;
        }
        match self.coeffs.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                e.get_mut().add_assign_ref(&c);
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn remove(&mut self, key: &BiKey) -> Option<C> {
        self.coeffs.remove(key)
    }

    fn check(&self, other: &Self) -> Result<(), SeriesError> {
        if self.n != other.n {
            return Err(SeriesError::DimensionMismatch { left: self.n, right: other.n });
        }
        if self.dz != other.dz {
            return Err(SeriesError::TruncationMismatch { left: self.dz, right: other.dz });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        let mut out = self.clone();
        out.accumulate(other);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        let mut out = self.clone();
        out.accumulate(&other.neg());
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        Ok(self.product(other))
    }

    pub(crate) fn accumulate(&mut self, other: &Self) {
        for (k, c) in &other.coeffs {
            self.add_term(k.clone(), c.clone());
        }
    }

    /// Product truncated at `self.dz`; operands are assumed compatible.
    pub(crate) fn product(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n, self.dz);
        for (k1, c1) in &self.coeffs {
            let room = self.dz - k1.degree();
            for (k2, c2) in &other.coeffs {
                if k2.degree() > room {
                    break;
                }
                let c = c1.mul_ref(c2);
                out.add_term(BiKey::new(k1.s.add(&k2.s), k1.t.add(&k2.t)), c);
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.map(|c| -c.clone())
    }

    pub fn scale(&self, v: &C::Scalar) -> Self {
        self.map(|c| c.scale(v))
    }

    /// Multiply every coefficient by a ring element.
    pub fn mul_coeff(&self, v: &C) -> Self {
        self.map(|c| c.mul_ref(v))
    }

    pub fn map(&self, f: impl Fn(&C) -> C) -> Self {
        let mut out = Self::zero(self.n, self.dz);
        for (k, c) in &self.coeffs {
            out.add_term(k.clone(), f(c));
        }
        out
    }

    /// Convert coefficients to another ring.
    pub fn map_into<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> BiSeries<D> {
        let mut out = BiSeries::zero(self.n, self.dz);
        for (k, c) in &self.coeffs {
            out.add_term(k.clone(), f(c));
        }
        out
    }

    /// Same coefficients with a new truncation order.
    pub fn retruncate(&self, dz: u32) -> Self {
        let mut out = Self::zero(self.n, dz);
        for (k, c) in &self.coeffs {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    /// Coefficients conjugated and keys swapped.
    pub fn conjugate(&self, inv: &SymbolInvolution) -> Self {
        let mut out = Self::zero(self.n, self.dz);
        for (k, c) in &self.coeffs {
            out.add_term(k.swapped(), c.conjugate(inv));
        }
        out
    }

    /// Whether the series equals its conjugate.
    pub fn is_real(&self, inv: &SymbolInvolution) -> bool {
        self.conjugate(inv) == *self
    }

    /// Only `z`-monomials occur.
    pub fn is_holomorphic(&self) -> bool {
        self.coeffs.keys().all(|k| k.t.is_zero())
    }

    /// Terms selected by a predicate on the key.
    pub fn filter(&self, keep: impl Fn(&BiKey) -> bool) -> Self {
        let mut out = Self::zero(self.n, self.dz);
        for (k, c) in &self.coeffs {
            if keep(k) {
                out.add_term(k.clone(), c.clone());
            }
        }
        out
    }
}

impl<C: Coefficient> fmt::Debug for BiSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.coeffs.iter()).finish()
    }
}
