//! Multi-indices and the enumeration engines built on them.
//!
//! The total order used everywhere is graded lexicographic: first by order
//! `|P|`, then lexicographically with larger leading entries first, so that
//! `(0,0) < (1,0) < (0,1) < (2,0) < (1,1) < (0,2)`.

use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;
use thiserror::Error;

use crate::scalar::Scalar;

/// Largest dimension accepted by the pipelines.
pub const MAX_DIMENSION: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MultiIndexError {
    #[error("multi-index length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

/// A fixed-length vector of nonnegative integers.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex(SmallVec<[u32; 4]>);

impl MultiIndex {
    pub fn new(entries: impl IntoIterator<Item = u32>) -> Self {
        MultiIndex(entries.into_iter().collect())
    }

    pub fn zeros(len: usize) -> Self {
        MultiIndex(SmallVec::from_elem(0, len))
    }

    /// `e_i` of the given length.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut m = Self::zeros(len);
        m.0[i] = 1;
        m
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: u32) {
        self.0[i] = v;
    }

    /// `|P|`, the sum of entries.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }

    /// `P!`, the product of entrywise factorials.
    pub fn factorial<T: Scalar>(&self) -> T {
        self.0.iter().fold(T::one(), |acc, &v| acc * T::factorial(v))
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `k·P`.
    pub fn scaled(&self, k: u32) -> Self {
        MultiIndex(self.0.iter().map(|a| a * k).collect())
    }

    /// Entrywise difference, or `Ok(None)` when some entry would go negative.
    pub fn sub_checked(&self, other: &Self) -> Result<Option<Self>, MultiIndexError> {
        if self.len() != other.len() {
            return Err(MultiIndexError::LengthMismatch { left: self.len(), right: other.len() });
        }
        Ok(self.checked_sub(other))
    }

    /// [`sub_checked`](Self::sub_checked) for operands already known to share a length.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        debug_assert_eq!(self.len(), other.len());
        let mut out = SmallVec::with_capacity(self.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_sub(*b)?);
        }
        Some(MultiIndex(out))
    }

    /// Signed difference `self − other`.
    pub fn diff(&self, other: &Self) -> Vec<i64> {
        self.0.iter().zip(&other.0).map(|(a, b)| *a as i64 - *b as i64).collect()
    }

    /// Entrywise `self ≤ other`.
    pub fn le(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `Σ_i weights[i] · self[i]` for a list of multi-indices.
    pub fn combine(coeffs: &Self, vectors: &[MultiIndex], len: usize) -> Self {
        let mut out = Self::zeros(len);
        for (l, v) in coeffs.0.iter().zip(vectors) {
            if *l == 0 {
                continue;
            }
            for k in 0..len {
                out.0[k] += l * v.0[k];
            }
        }
        out
    }

    /// Indices `i` with nonzero entries.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &v)| v != 0).map(|(i, _)| i)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| other.0.cmp(&self.0))
            .then_with(|| self.len().cmp(&other.len()))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v.into())
    }
}

impl<const N: usize> From<[u32; N]> for MultiIndex {
    fn from(v: [u32; N]) -> Self {
        MultiIndex::new(v)
    }
}

/// Entrywise product of binomial coefficients `C(p_k, i_k)`; zero if some `i_k > p_k`.
pub fn binomial<T: Scalar>(p: &MultiIndex, i: &MultiIndex) -> T {
    let mut acc = T::one();
    for (&n, &k) in p.entries().iter().zip(i.entries()) {
        if k > n {
            return T::zero();
        }
        acc = acc * binom::<T>(n as i64, k);
    }
    acc
}

/// `C(n, k)` for integer `n`, with the convention `C(n,k) = 0` when `n < 0` or `k > n`.
pub fn binom<T: Scalar>(n: i64, k: u32) -> T {
    if n < 0 || k as i64 > n {
        return T::zero();
    }
    let k = k.min((n - k as i64) as u32);
    let mut acc = T::one();
    for j in 0..k as i64 {
        acc = acc * T::from_int(n - j) / T::from_int(j + 1);
    }
    acc
}

/// Falling factorial `x (x−1) ⋯ (x−k+1)`, i.e. `x!/(x−k)!` extended polynomially.
pub fn falling<T: Scalar>(x: i64, k: u32) -> T {
    let mut acc = T::one();
    for j in 0..k as i64 {
        acc = acc * T::from_int(x - j);
    }
    acc
}

/// Multi-index falling factorial `L!/(L−A)!`, zero when `A ≰ L`.
pub fn falling_multi<T: Scalar>(l: &MultiIndex, a: &MultiIndex) -> T {
    let mut acc = T::one();
    for (&x, &k) in l.entries().iter().zip(a.entries()) {
        if k > x {
            return T::zero();
        }
        acc = acc * falling::<T>(x as i64, k);
    }
    acc
}

/// All multi-indices of the given length and exact order, in graded-lex order.
pub fn indices_of_order(length: usize, order: u32) -> Vec<MultiIndex> {
    fn rec(prefix: &mut Vec<u32>, remaining: u32, slots: usize, out: &mut Vec<MultiIndex>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(MultiIndex::new(prefix.iter().copied()));
            prefix.pop();
            return;
        }
        for first in (0..=remaining).rev() {
            prefix.push(first);
            rec(prefix, remaining - first, slots - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if length == 0 {
        if order == 0 {
            out.push(MultiIndex::zeros(0));
        }
        return out;
    }
    rec(&mut Vec::with_capacity(length), order, length, &mut out);
    out
}

/// Every multi-index of the given length with order `≤ max_order`, graded-lex.
pub fn enumerate_indices(length: usize, max_order: u32) -> impl Iterator<Item = MultiIndex> {
    (0..=max_order).flat_map(move |o| indices_of_order(length, o))
}

/// Every multi-index `I ≤ upper` entrywise.
pub fn enumerate_box(upper: &MultiIndex) -> Vec<MultiIndex> {
    let mut out = vec![MultiIndex::zeros(upper.len())];
    for k in 0..upper.len() {
        let mut next = Vec::with_capacity(out.len() * (upper.get(k) as usize + 1));
        for base in &out {
            for v in 0..=upper.get(k) {
                let mut m = base.clone();
                m.set(k, v);
                next.push(m);
            }
        }
        out = next;
    }
    out.sort();
    out
}

/// An ordered tuple of nonzero multi-indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Composition {
    pub parts: Vec<MultiIndex>,
}

impl Composition {
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn total(&self) -> Option<MultiIndex> {
        let first = self.parts.first()?;
        Some(self.parts[1..].iter().fold(first.clone(), |acc, p| acc.add(p)))
    }

    /// `Π_j (L^j)!`.
    pub fn factorial_product<T: Scalar>(&self) -> T {
        self.parts.iter().fold(T::one(), |acc, p| acc * p.factorial::<T>())
    }
}

/// Ordered `u`-tuples of multi-indices summing to `total`; parts may be zero
/// unless `nonzero` is set.
fn splittings_impl(total: &MultiIndex, u: usize, nonzero: bool) -> Vec<Vec<MultiIndex>> {
    let mut out = Vec::new();
    if u == 0 {
        if total.is_zero() {
            out.push(Vec::new());
        }
        return out;
    }
    if nonzero && (total.order() as usize) < u {
        return out;
    }
    let mut current = Vec::with_capacity(u);
    fn rec(
        rest: &MultiIndex,
        slots: usize,
        nonzero: bool,
        current: &mut Vec<MultiIndex>,
        out: &mut Vec<Vec<MultiIndex>>,
    ) {
        if slots == 1 {
            if nonzero && rest.is_zero() {
                return;
            }
            current.push(rest.clone());
            out.push(current.clone());
            current.pop();
            return;
        }
        for first in enumerate_box(rest) {
            if nonzero && first.is_zero() {
                continue;
            }
            let remaining = rest.checked_sub(&first).expect("box element below bound");
            if nonzero && (remaining.order() as usize) < slots - 1 {
                continue;
            }
            current.push(first);
            rec(&remaining, slots - 1, nonzero, current, out);
            current.pop();
        }
    }
    rec(total, u, nonzero, &mut current, &mut out);
    out
}

/// Ordered sequences of `u` nonzero multi-indices summing to `l`.
pub fn enumerate_compositions(l: &MultiIndex, u: usize) -> Vec<Composition> {
    if u == 0 {
        return Vec::new();
    }
    splittings_impl(l, u, true).into_iter().map(|parts| Composition { parts }).collect()
}

/// All compositions of `l` for every `u = 1..=|l|`.
pub fn all_compositions(l: &MultiIndex) -> Vec<Composition> {
    (1..=l.order() as usize).flat_map(|u| enumerate_compositions(l, u)).collect()
}

/// Ordered `u`-tuples of multi-indices (zero parts allowed) summing to `i`.
pub fn enumerate_splittings(i: &MultiIndex, u: usize) -> Vec<Vec<MultiIndex>> {
    splittings_impl(i, u, false)
}

/// Every `L ∈ Z_+^r` with `|L| ≤ bound` and `Σ_i l_i·weights[i] = diff`.
pub fn enumerate_balanced(diff: &[i64], weights: &[Vec<i64>], bound: u32) -> Vec<MultiIndex> {
    let r = weights.len();
    enumerate_indices(r, bound)
        .filter(|l| {
            (0..diff.len()).all(|k| {
                let s: i64 = (0..r).map(|i| l.get(i) as i64 * weights[i][k]).sum();
                s == diff[k]
            })
        })
        .collect()
}

/// Ordered `r`-tuples of distinct positions in `0..u`.
pub fn injections(r: usize, u: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(r);
    let mut used = vec![false; u];
    fn rec(r: usize, used: &mut Vec<bool>, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == r {
            out.push(current.clone());
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                current.push(j);
                rec(r, used, current, out);
                current.pop();
                used[j] = false;
            }
        }
    }
    rec(r, &mut used, &mut current, &mut out);
    out
}

/// Subsets of `0..k` as sorted position lists, by increasing size.
pub fn subsets(k: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0u32..1 << k)
        .map(|mask| (0..k).filter(|&i| mask & (1 << i) != 0).collect())
        .collect();
    out.sort_by(|a: &Vec<usize>, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}
