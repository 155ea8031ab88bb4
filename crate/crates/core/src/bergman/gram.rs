//! Gram matrices of the monomial sections and their inverses.

use std::collections::{BTreeMap, HashMap};

use num::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use super::density::density_expansion;
use super::spec::{PotentialSpec, SpecError};
use crate::multiindex::{enumerate_balanced, enumerate_compositions, enumerate_indices, subsets, MultiIndex};
use crate::scalar::{int_determinant, Scalar};
use crate::series::{CPoly, Coefficient, MGraded, Monomial, SymbolInvolution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GramError {
    #[error("expected a direct Gram matrix, got {0:?}")]
    WrongFlavor(GramFlavor),
    #[error("Neumann series did not terminate within {0} steps")]
    NoTermination(usize),
    #[error(transparent)]
    Spec(#[from] SpecError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramFlavor {
    Direct,
    Diagonal,
    Inverse,
}

/// A sparse matrix of μ-graded entries indexed by multi-indices of order ≤ D_p.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix<T: Scalar> {
    indices: Vec<MultiIndex>,
    position: HashMap<MultiIndex, usize>,
    rows: Vec<BTreeMap<usize, MGraded<T>>>,
    flavor: GramFlavor,
}

impl<T: Scalar> GramMatrix<T> {
    fn empty(n: usize, max_order: u32, flavor: GramFlavor) -> Self {
        let indices: Vec<MultiIndex> = enumerate_indices(n, max_order).collect();
        let position = indices.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let rows = vec![BTreeMap::new(); indices.len()];
        GramMatrix { indices, position, rows, flavor }
    }

    /// `Λ_{S,S} = S!·μ^{−2s}`.
    pub fn diagonal(n: usize, max_order: u32) -> Self {
        let mut g = Self::empty(n, max_order, GramFlavor::Diagonal);
        for (i, s) in g.indices.iter().enumerate() {
            g.rows[i].insert(i, MGraded::scalar(-2 * s.order() as i32, s.factorial()));
        }
        g
    }

    /// `Λ^{-1}_{S,S} = μ^{2s}/S!`.
    pub fn diagonal_inverse(n: usize, max_order: u32) -> Self {
        let mut g = Self::empty(n, max_order, GramFlavor::Inverse);
        for (i, s) in g.indices.iter().enumerate() {
            g.rows[i].insert(i, MGraded::scalar(2 * s.order() as i32, T::one() / s.factorial::<T>()));
        }
        g
    }

    pub fn flavor(&self) -> GramFlavor {
        self.flavor
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn position(&self, s: &MultiIndex) -> Option<usize> {
        self.position.get(s).copied()
    }

    pub fn get(&self, s: &MultiIndex, t: &MultiIndex) -> MGraded<T> {
        match (self.position(s), self.position(t)) {
            (Some(i), Some(j)) => self.rows[i].get(&j).cloned().unwrap_or_else(MGraded::zero),
            _ => MGraded::zero(),
        }
    }

    /// Overwrite an entry; unknown indices are ignored.
    pub fn set(&mut self, s: &MultiIndex, t: &MultiIndex, v: MGraded<T>) {
        if let (Some(i), Some(j)) = (self.position(s), self.position(t)) {
            if v.is_zero() {
                self.rows[i].remove(&j);
            } else {
                self.rows[i].insert(j, v);
            }
        }
    }

    pub fn row(&self, s: &MultiIndex) -> impl Iterator<Item = (&MultiIndex, &MGraded<T>)> {
        let i = self.position(s);
        i.into_iter().flat_map(move |i| self.rows[i].iter().map(|(j, v)| (&self.indices[*j], v)))
    }

    pub fn nonzero_entries(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    /// Sparse product; both factors must share the index set.
    pub fn multiply(&self, other: &Self) -> Self {
        assert_eq!(self.indices, other.indices, "index sets differ");
        let rows = self
            .rows
            .par_iter()
            .map(|row| {
                let mut acc: BTreeMap<usize, MGraded<T>> = BTreeMap::new();
                for (k, a) in row {
                    for (j, b) in &other.rows[*k] {
                        accumulate(&mut acc, *j, a.mul_ref(b));
                    }
                }
                acc
            })
            .collect();
        GramMatrix { indices: self.indices.clone(), position: self.position.clone(), rows, flavor: self.flavor }
    }

    pub fn is_identity(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, row)| {
            row.len() == 1 && row.get(&i).is_some_and(|v| *v == MGraded::one())
        })
    }

    /// `G_{S,T} = conj(G_{T,S})` for every entry.
    pub fn is_hermitian(&self, inv: &SymbolInvolution) -> bool {
        self.rows.iter().enumerate().all(|(i, row)| {
            row.iter().all(|(j, v)| self.rows[*j].get(&i).is_some_and(|w| *w == v.conjugate(inv)))
        })
    }
}

fn accumulate<T: Scalar>(acc: &mut BTreeMap<usize, MGraded<T>>, j: usize, v: MGraded<T>) {
    if v.is_zero() {
        return;
    }
    match acc.entry(j) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(v);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            e.get_mut().add_assign_ref(&v);
            if e.get().is_zero() {
                e.remove();
            }
        }
    }
}

/// `G_{S,T} = Σ_{S+P = T+Q} ã_{P,Q} (S+P)! μ^{−2(s+p)}` over all `s, t ≤ D_p`.
pub fn gram_matrix<T: Scalar>(spec: &PotentialSpec<T>) -> Result<GramMatrix<T>, GramError> {
    let density = density_expansion(spec)?;
    let mut g = GramMatrix::empty(spec.n, spec.section_order(), GramFlavor::Direct);
    let terms: Vec<_> = density.iter().collect();
    let rows: Vec<BTreeMap<usize, MGraded<T>>> = g
        .indices
        .par_iter()
        .map(|s| {
            let mut row = BTreeMap::new();
            for (key, a) in &terms {
                let sp = s.add(&key.s);
                let Some(t) = sp.checked_sub(&key.t) else { continue };
                let Some(&j) = g.position.get(&t) else { continue };
                let weight = MGraded::scalar(-2 * sp.order() as i32, sp.factorial::<T>());
                accumulate(&mut row, j, a.mul_ref(&weight));
            }
            row
        })
        .collect();
    g.rows = rows;
    Ok(g)
}

/// `G^{-1} = Σ_k (−Λ^{-1}G')^k Λ^{-1}` with `G' = G − Λ`.
///
/// Every `G'` entry has positive c-degree, so the series stops after at most
/// `D_c` steps.
pub fn gram_inverse<T: Scalar>(g: &GramMatrix<T>) -> Result<GramMatrix<T>, GramError> {
    if g.flavor != GramFlavor::Direct {
        return Err(GramError::WrongFlavor(g.flavor));
    }
    let lambda_inv: Vec<MGraded<T>> =
        g.indices.iter().map(|s| MGraded::scalar(2 * s.order() as i32, T::one() / s.factorial::<T>())).collect();
    let step: Vec<BTreeMap<usize, MGraded<T>>> = g
        .rows
        .par_iter()
        .enumerate()
        .map(|(i, row)| {
            let s = &g.indices[i];
            let mut out = BTreeMap::new();
            for (j, v) in row {
                let mut entry = v.clone();
                if *j == i {
                    entry = entry - MGraded::scalar(-2 * s.order() as i32, s.factorial());
                }
                accumulate(&mut out, *j, -lambda_inv[i].mul_ref(&entry));
            }
            out
        })
        .collect();
    let limit = g.indices.len() + 2;
    let rows: Result<Vec<_>, GramError> = (0..g.indices.len())
        .into_par_iter()
        .map(|i| {
            let mut row = BTreeMap::new();
            row.insert(i, lambda_inv[i].clone());
            let mut v: BTreeMap<usize, MGraded<T>> = BTreeMap::new();
            v.insert(i, MGraded::one());
            for _ in 0..limit {
                let mut next = BTreeMap::new();
                for (k, a) in &v {
                    for (j, b) in &step[*k] {
                        accumulate(&mut next, *j, a.mul_ref(b));
                    }
                }
                if next.is_empty() {
                    return Ok(row);
                }
                for (k, a) in &next {
                    accumulate(&mut row, *k, a.mul_ref(&lambda_inv[*k]));
                }
                v = next;
            }
            Err(GramError::NoTermination(limit))
        })
        .collect();
    Ok(GramMatrix { indices: g.indices.clone(), position: g.position.clone(), rows: rows?, flavor: GramFlavor::Inverse })
}

/// Entry `(S, T)` of the inverse Gram matrix (the coefficient of `z^T z̄^S` in
/// the Bergman sum) from the closed combinatorial formula: a sum over balanced
/// `L`, compositions `L^1..L^u` and per-slot minor choices `(I_j, K_j)` of
/// `(−1)^u μ^{2s}/S! · Π_j ã-weights · (S_j + Q_j)!/S_j!`.
pub fn gram_inverse_closed_form<T: Scalar>(spec: &PotentialSpec<T>, s: &MultiIndex, t: &MultiIndex) -> MGraded<T> {
    let n = spec.n;
    let (ps, qs) = spec.exponents();
    let mut total = MGraded::zero();
    if s == t {
        total = MGraded::scalar(2 * s.order() as i32, T::one() / s.factorial::<T>());
    }
    let weights: Vec<Vec<i64>> = ps.iter().zip(&qs).map(|(p, q)| p.diff(q)).collect();
    let prefix = MGraded::scalar(2 * s.order() as i32, T::one() / s.factorial::<T>());
    let slot_choices = minor_choices(&ps, &qs, n);
    for l in enumerate_balanced(&t.diff(s), &weights, spec.dc) {
        if l.is_zero() {
            continue;
        }
        let symbol = CPoly::term(Monomial::new(l.entries().iter().copied()), T::one(), Some(spec.dc));
        for u in 1..=l.order() as usize {
            for comp in enumerate_compositions(&l, u) {
                let mut acc = MGraded::zero();
                chain(spec, &ps, &qs, &slot_choices, &comp.parts, 0, s, MGraded::one(), &mut acc);
                if acc.is_zero() {
                    continue;
                }
                let sign = if u % 2 == 0 { T::one() } else { -T::one() };
                total.add_assign_ref(&acc.mul_ref(&prefix).scale(&sign).mul_ref(&MGraded::from_cpoly(symbol.clone())));
            }
        }
    }
    total
}

/// Every `(I, K)` with `I ⊆ perturbations`, `K ⊆ coordinates`, `|I| = |K|` and
/// nonzero `det(P^I_K)·det(Q^I_K)`, including the empty pair with weight 1.
pub(crate) fn minor_choices(ps: &[MultiIndex], qs: &[MultiIndex], n: usize) -> Vec<(Vec<usize>, Vec<usize>, i64)> {
    let mut out = Vec::new();
    for rows in subsets(ps.len()) {
        for cols in subsets(n).into_iter().filter(|c| c.len() == rows.len()) {
            let minor = |v: &[MultiIndex]| {
                let m: Vec<Vec<i64>> =
                    rows.iter().map(|&i| cols.iter().map(|&k| v[i].get(k) as i64).collect()).collect();
                int_determinant(&m)
            };
            let w = minor(ps) * minor(qs);
            if w != 0 {
                out.push((rows.clone(), cols, w));
            }
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn chain<T: Scalar>(
    spec: &PotentialSpec<T>,
    ps: &[MultiIndex],
    qs: &[MultiIndex],
    choices: &[(Vec<usize>, Vec<usize>, i64)],
    parts: &[MultiIndex],
    j: usize,
    current: &MultiIndex,
    weight: MGraded<T>,
    acc: &mut MGraded<T>,
) {
    if j == parts.len() {
        acc.add_assign_ref(&weight);
        return;
    }
    let n = spec.n;
    let lj = &parts[j];
    let p_slot = MultiIndex::combine(lj, ps, n);
    let q_slot = MultiIndex::combine(lj, qs, n);
    let lj_order = lj.order() as i32;
    let base = T::one() / lj.factorial::<T>();
    for (rows, cols, w) in choices {
        if rows.iter().any(|&i| lj.get(i) == 0) {
            continue;
        }
        let mut e_k = MultiIndex::zeros(n);
        for &k in cols {
            e_k.set(k, 1);
        }
        let (Some(pj), Some(qj)) = (p_slot.checked_sub(&e_k), q_slot.checked_sub(&e_k)) else { continue };
        let Some(next) = current.add(&pj).checked_sub(&qj) else { continue };
        let lw: i64 = rows.iter().map(|&i| lj.get(i) as i64).product();
        let sign = if (lj_order as usize + cols.len()) % 2 == 0 { 1 } else { -1 };
        let ratio = next.add(&qj).factorial::<T>() / next.factorial::<T>();
        let coeff = base.clone() * T::from_int(sign * w * lw) * ratio;
        let exponent = 2 * (lj_order - cols.len() as i32) - 2 * qj.order() as i32;
        let step = weight.mul_ref(&MGraded::scalar(exponent, coeff));
        chain(spec, ps, qs, choices, parts, j + 1, &next, step, acc);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bergman::spec::Perturbation;
    use num::BigRational as Q;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.iter().copied())
    }

    #[test]
    fn flat_gram_is_lambda() {
        let spec = PotentialSpec::<Q>::flat(2, 3, 1);
        let g = gram_matrix(&spec).unwrap();
        let mut lambda = GramMatrix::diagonal(2, spec.section_order());
        lambda.flavor = GramFlavor::Direct;
        assert_eq!(g, lambda);
        let h = gram_inverse(&g).unwrap();
        assert_eq!(h, GramMatrix::diagonal_inverse(2, spec.section_order()));
        assert_eq!(gram_inverse_closed_form(&spec, &mi(&[1, 1]), &mi(&[1, 1])), MGraded::scalar(4, Q::from_int(1)));
    }

    /// `G_{0,0} = 1 + ã_{1,1}·1!·μ^{−2} + ã_{2,2}·2!·μ^{−4} = 1 + 4c μ^{−2} − 2c μ^{−2}`.
    #[test]
    fn curvature_corner_entry() {
        let spec = PotentialSpec::<Q>::flat(1, 4, 1).with_perturbation(Perturbation::symbolic([2], [2], "c"));
        let g = gram_matrix(&spec).unwrap();
        let c = spec.symbol(0);
        let expected = MGraded::one() + MGraded::monomial(-2, c.scale_by(&Q::from_int(2)));
        assert_eq!(g.get(&mi(&[0]), &mi(&[0])), expected);
    }

    #[test]
    fn inverse_is_inverse() {
        let spec = PotentialSpec::<Q>::flat(1, 4, 2)
            .with_perturbation(Perturbation::symbolic([2], [2], "a"))
            .with_perturbation(Perturbation::symbolic([3], [2], "b"))
            .with_perturbation(Perturbation::symbolic([2], [3], "bb"))
            .with_pair(1, 2);
        let g = gram_matrix(&spec).unwrap();
        assert!(g.is_hermitian(&spec.involution()));
        let h = gram_inverse(&g).unwrap();
        assert!(g.multiply(&h).is_identity());
        assert!(h.multiply(&g).is_identity());
        assert_eq!(gram_inverse(&h), Err(GramError::WrongFlavor(GramFlavor::Inverse)));
    }

    #[test]
    fn first_order_inverse_is_one_neumann_step() {
        let spec = PotentialSpec::<Q>::flat(1, 4, 1).with_perturbation(Perturbation::symbolic([2], [2], "c"));
        let g = gram_matrix(&spec).unwrap();
        let h = gram_inverse(&g).unwrap();
        let lambda_inv = GramMatrix::<Q>::diagonal_inverse(1, spec.section_order());
        for s in g.indices() {
            for t in g.indices() {
                let li_s = lambda_inv.get(s, s);
                let li_t = lambda_inv.get(t, t);
                let mut gp = g.get(s, t);
                if s == t {
                    gp = gp - MGraded::scalar(-2 * s.order() as i32, s.factorial());
                }
                let mut expected = -li_s.mul_ref(&gp).mul_ref(&li_t);
                if s == t {
                    expected = expected + li_s;
                }
                assert_eq!(h.get(s, t), expected, "entry {s} {t}");
            }
        }
    }

    #[test]
    fn closed_form_matches_neumann() {
        for dc in 1..=2 {
            let spec = PotentialSpec::<Q>::flat(1, 4, dc).with_perturbation(Perturbation::symbolic([3], [2], "c"));
            let h = gram_inverse(&gram_matrix(&spec).unwrap()).unwrap();
            for s in enumerate_indices(1, 4) {
                for t in enumerate_indices(1, 4) {
                    assert_eq!(gram_inverse_closed_form(&spec, &s, &t), h.get(&s, &t), "entry {s} {t} at D_c={dc}");
                }
            }
        }
    }

    #[test]
    fn off_corner_entries_are_order_one_over_m() {
        let spec = PotentialSpec::<Q>::flat(2, 3, 2)
            .with_perturbation(Perturbation::symbolic([2, 1], [1, 2], "a"))
            .with_perturbation(Perturbation::symbolic([1, 2], [2, 1], "b"))
            .with_perturbation(Perturbation::symbolic([2, 0], [1, 1], "c"));
        let h = gram_inverse(&gram_matrix(&spec).unwrap()).unwrap();
        let zero = MultiIndex::zeros(2);
        for i in 0..2 {
            let e = MultiIndex::unit(2, i);
            for entry in [h.get(&zero, &e), h.get(&e, &zero)] {
                assert!(entry.max_exponent().map_or(true, |x| x <= -2), "{entry:?}");
            }
            assert_eq!(gram_inverse_closed_form(&spec, &zero, &e), h.get(&zero, &e));
        }
    }
}
