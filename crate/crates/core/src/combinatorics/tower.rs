//! The nested coefficients `B`, `B̂`, `D`, `E`, `F` and the potential assembled from them.
//!
//! `B`, `B̂`, `D` and `E` are integers by construction (binomials, minors and
//! multinomials), so they are computed in `i128`; only `F` carries the `1/u`
//! and `1/Π(L^j)!` denominators.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use super::identities::{int_factorial, ratio, CompositionTable, SlotWeight};
use super::CombinatoricsError;
use crate::bergman::{minor_choices, PotentialSpec, SpecError};
use crate::multiindex::{enumerate_box, enumerate_indices, enumerate_splittings, Composition, MultiIndex};
use crate::scalar::Scalar;
use crate::series::{BiKey, BiSeries, CPoly, MGraded, Monomial};

/// Perturbation exponents `P^i`, `Q^i` feeding the tower.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TowerInput {
    pub n: usize,
    pub p: Vec<MultiIndex>,
    pub q: Vec<MultiIndex>,
}

impl TowerInput {
    pub fn new(n: usize, p: Vec<MultiIndex>, q: Vec<MultiIndex>) -> Result<Self, CombinatoricsError> {
        if p.len() != q.len() || p.iter().chain(&q).any(|x| x.len() != n) {
            return Err(CombinatoricsError::LengthMismatch);
        }
        Ok(TowerInput { n, p, q })
    }

    pub fn from_spec<T: Scalar>(spec: &PotentialSpec<T>) -> Self {
        let (p, q) = spec.exponents();
        TowerInput { n: spec.n, p, q }
    }

    pub fn r(&self) -> usize {
        self.p.len()
    }

    /// `(P_L, Q_L) = (Σ l_i P^i, Σ l_i Q^i)`.
    pub fn slot(&self, l: &MultiIndex) -> (MultiIndex, MultiIndex) {
        (MultiIndex::combine(l, &self.p, self.n), MultiIndex::combine(l, &self.q, self.n))
    }
}

fn int_binom(n: i64, k: u32) -> i128 {
    if n < 0 || k as i64 > n {
        return 0;
    }
    let k = k.min((n - k as i64) as u32) as i64;
    let mut v: i128 = 1;
    for j in 0..k {
        v = v * (n - j) as i128 / (j + 1) as i128;
    }
    v
}

fn int_b(i: &MultiIndex, ps: &[MultiIndex], qs: &[MultiIndex]) -> i128 {
    if i.is_zero() {
        return 1;
    }
    let suffix: Vec<i64> = vec![0; i.len()];
    b_rec(i.entries(), ps, qs, ps.len(), &suffix)
}

/// Slots are filled from the last one backwards: the upper binomial index of
/// slot `j` is `Σ_{m>j}(Q_m − I_m) + Q_j`, which only needs the later parts.
fn b_rec(remaining: &[u32], ps: &[MultiIndex], qs: &[MultiIndex], j: usize, suffix: &[i64]) -> i128 {
    let j = j - 1;
    let slot = |part: &[u32]| -> i128 {
        let mut v: i128 = 1;
        for (k, &ij) in part.iter().enumerate() {
            let top = suffix[k] + qs[j].get(k) as i64;
            v *= int_binom(ps[j].get(k) as i64, ij) * int_binom(top, ij) * (1..=ij as i128).product::<i128>();
            if v == 0 {
                break;
            }
        }
        v
    };
    if j == 0 {
        return slot(remaining);
    }
    let mut total = 0;
    let mut part = vec![0u32; remaining.len()];
    loop {
        let f = slot(&part);
        if f != 0 {
            let rest: Vec<u32> = remaining.iter().zip(&part).map(|(a, b)| a - b).collect();
            let next: Vec<i64> =
                suffix.iter().enumerate().map(|(k, s)| s + qs[j].get(k) as i64 - part[k] as i64).collect();
            total += f * b_rec(&rest, ps, qs, j, &next);
        }
        let mut k = 0;
        loop {
            if k == part.len() {
                return total;
            }
            if part[k] < remaining[k] {
                part[k] += 1;
                break;
            }
            part[k] = 0;
            k += 1;
        }
    }
}

/// `B_I` for slots `(P_1,Q_1)..(P_u,Q_u)`: the coefficient of `S!/(S − ΣQ_j + I)!`
/// in `Π_j (S_j + Q_j)!/S_j!` with `S_j = S + Σ_{i≤j}(P_i − Q_i)`.
pub fn coeff_b<T: Scalar>(i: &MultiIndex, ps: &[MultiIndex], qs: &[MultiIndex]) -> Result<T, CombinatoricsError> {
    if ps.len() != qs.len() || ps.is_empty() || ps.iter().chain(qs).any(|x| x.len() != i.len()) {
        return Err(CombinatoricsError::LengthMismatch);
    }
    Ok(ratio(int_b(i, ps, qs), 1))
}

/// One per-slot minor choice: perturbation rows, the coordinate shift `e_K`
/// and the signed weight `(−1)^{|K|} det(P^I_K) det(Q^I_K)`.
struct SlotMinor {
    rows: Vec<usize>,
    shift: MultiIndex,
    weight: i128,
}

type Minors = Vec<SlotMinor>;

fn slot_minors(input: &TowerInput) -> Minors {
    minor_choices(&input.p, &input.q, input.n)
        .into_iter()
        .map(|(rows, cols, w)| {
            let mut shift = MultiIndex::zeros(input.n);
            for &k in &cols {
                shift.set(k, 1);
            }
            let sign = if cols.len() % 2 == 0 { 1 } else { -1 };
            SlotMinor { rows, shift, weight: sign * w as i128 }
        })
        .collect()
}

fn int_b_hat(a: &MultiIndex, comp: &Composition, input: &TowerInput, minors: &Minors) -> i128 {
    let slots: Vec<(MultiIndex, MultiIndex)> = comp.parts.iter().map(|l| input.slot(l)).collect();
    let mut ps = Vec::with_capacity(slots.len());
    let mut qs = Vec::with_capacity(slots.len());
    let mut total = 0;
    b_hat_rec(a, comp, &slots, minors, 0, &MultiIndex::zeros(input.n), 1, &mut ps, &mut qs, &mut total);
    total
}

#[allow(clippy::too_many_arguments)]
fn b_hat_rec(
    a: &MultiIndex,
    comp: &Composition,
    slots: &[(MultiIndex, MultiIndex)],
    minors: &Minors,
    j: usize,
    used: &MultiIndex,
    weight: i128,
    ps: &mut Vec<MultiIndex>,
    qs: &mut Vec<MultiIndex>,
    total: &mut i128,
) {
    if j == slots.len() {
        let rest = a.checked_sub(used).expect("pruned below");
        *total += weight * int_b(&rest, ps, qs);
        return;
    }
    let lj = &comp.parts[j];
    for minor in minors {
        let lw: i128 = minor.rows.iter().map(|&i| lj.get(i) as i128).product();
        if lw == 0 {
            continue;
        }
        let next = used.add(&minor.shift);
        if !next.le(a) {
            continue;
        }
        let (Some(p), Some(q)) = (slots[j].0.checked_sub(&minor.shift), slots[j].1.checked_sub(&minor.shift)) else {
            continue;
        };
        ps.push(p);
        qs.push(q);
        b_hat_rec(a, comp, slots, minors, j + 1, &next, weight * minor.weight * lw, ps, qs, total);
        ps.pop();
        qs.pop();
    }
}

/// `B̂_A`: `B_{A−K}` of the minor-shifted slots, summed over per-slot minor choices.
pub fn coeff_b_hat<T: Scalar>(a: &MultiIndex, comp: &Composition, input: &TowerInput) -> Result<T, CombinatoricsError> {
    check_dims(a, comp, input)?;
    Ok(ratio(int_b_hat(a, comp, input, &slot_minors(input)), 1))
}

fn check_dims(i: &MultiIndex, comp: &Composition, input: &TowerInput) -> Result<(), CombinatoricsError> {
    if i.len() != input.n || comp.parts.iter().any(|l| l.len() != input.r()) {
        return Err(CombinatoricsError::LengthMismatch);
    }
    Ok(())
}

/// Composition tables depend only on `L`, so every tower shares them.
fn shared_table(l: &MultiIndex) -> Arc<CompositionTable> {
    static TABLES: OnceLock<Mutex<HashMap<MultiIndex, Arc<CompositionTable>>>> = OnceLock::new();
    let mut tables = TABLES.get_or_init(Default::default).lock().expect("table cache poisoned");
    tables.entry(l.clone()).or_insert_with(|| Arc::new(CompositionTable::new(l))).clone()
}

/// Memoized `D`, `E`, `F` for one set of perturbation exponents.
pub struct Tower {
    input: TowerInput,
    minors: Minors,
    d_memo: HashMap<(MultiIndex, MultiIndex), i128>,
    tables: HashMap<MultiIndex, Arc<CompositionTable>>,
}

impl Tower {
    pub fn new(input: TowerInput) -> Self {
        let minors = slot_minors(&input);
        Tower { input, minors, d_memo: HashMap::new(), tables: HashMap::new() }
    }

    pub fn input(&self) -> &TowerInput {
        &self.input
    }

    fn table(&mut self, l: &MultiIndex) -> Arc<CompositionTable> {
        self.tables.entry(l.clone()).or_insert_with(|| shared_table(l)).clone()
    }

    /// `D_I(L) = (−1)^l L! Σ_u (−1)^u Σ_{compositions} B̂_I / Π(L^j)!`.
    pub fn d_int(&mut self, i: &MultiIndex, l: &MultiIndex) -> i128 {
        let key = (i.clone(), l.clone());
        if let Some(v) = self.d_memo.get(&key) {
            return *v;
        }
        let table = self.table(l);
        let mut total: i128 = 0;
        for (comp, multinomial) in &table.entries {
            let b = int_b_hat(i, comp, &self.input, &self.minors);
            if b != 0 {
                let sign = if comp.len() % 2 == 0 { 1 } else { -1 };
                total += sign * multinomial * b;
            }
        }
        if l.order() % 2 == 1 {
            total = -total;
        }
        self.d_memo.insert(key, total);
        total
    }

    pub fn d<T: Scalar>(&mut self, i: &MultiIndex, l: &MultiIndex) -> Result<T, CombinatoricsError> {
        if i.len() != self.input.n || l.len() != self.input.r() {
            return Err(CombinatoricsError::LengthMismatch);
        }
        if l.is_zero() {
            return Err(CombinatoricsError::EmptyIndex);
        }
        Ok(ratio(self.d_int(i, l), 1))
    }

    /// `E_I = Σ_{I^1+…+I^u = I} Π_j D_{I^j}(L^j)`, zero parts allowed.
    pub fn e_int(&mut self, i: &MultiIndex, comp: &Composition) -> i128 {
        let mut total = 0;
        for parts in enumerate_splittings(i, comp.len()) {
            let mut v: i128 = 1;
            for (ij, lj) in parts.iter().zip(&comp.parts) {
                v *= self.d_int(ij, lj);
                if v == 0 {
                    break;
                }
            }
            total += v;
        }
        total
    }

    pub fn e<T: Scalar>(&mut self, i: &MultiIndex, comp: &Composition) -> Result<T, CombinatoricsError> {
        check_dims(i, comp, &self.input)?;
        if comp.is_empty() || comp.parts.iter().any(MultiIndex::is_zero) {
            return Err(CombinatoricsError::EmptyIndex);
        }
        Ok(ratio(self.e_int(i, comp), 1))
    }

    /// Coefficient of `X^L` in `F_I`: `Σ_u (−1)^{u−1}/u Σ E_I / Π(L^j)!`.
    pub fn f<T: Scalar>(&mut self, i: &MultiIndex, l: &MultiIndex) -> T {
        let table = self.table(l);
        table.sum(SlotWeight::Logarithmic, |comp| self.e_int(i, comp))
    }

    /// `F_I(X)` truncated at total X-degree `degree_bound`, as `L ↦ coefficient`.
    pub fn f_polynomial<T: Scalar>(&mut self, i: &MultiIndex, degree_bound: u32) -> BTreeMap<MultiIndex, T> {
        enumerate_indices(self.input.r(), degree_bound)
            .filter(|l| !l.is_zero())
            .filter_map(|l| {
                let v: T = self.f(i, &l);
                (!v.is_zero()).then_some((l, v))
            })
            .collect()
    }
}

/// `D_I(L)` for a single evaluation (fresh memo).
pub fn coeff_d<T: Scalar>(i: &MultiIndex, l: &MultiIndex, input: &TowerInput) -> Result<T, CombinatoricsError> {
    Tower::new(input.clone()).d(i, l)
}

pub fn coeff_e<T: Scalar>(i: &MultiIndex, comp: &Composition, input: &TowerInput) -> Result<T, CombinatoricsError> {
    Tower::new(input.clone()).e(i, comp)
}

pub fn coeff_f<T: Scalar>(
    i: &MultiIndex,
    input: &TowerInput,
    degree_bound: u32,
) -> Result<BTreeMap<MultiIndex, T>, CombinatoricsError> {
    if degree_bound == 0 {
        return Err(CombinatoricsError::DegreeBound);
    }
    if i.len() != input.n {
        return Err(CombinatoricsError::LengthMismatch);
    }
    Ok(Tower::new(input.clone()).f_polynomial(i, degree_bound))
}

/// Symbolic `K_m = |z|² + Σ_{L≠0} Σ_I F_I[L] c^L μ^{2(l−1−i)} z^{P_L−I} z̄^{Q_L−I}`.
pub fn bergman_potential_combinatorial_symbolic<T: Scalar>(
    spec: &PotentialSpec<T>,
) -> Result<BiSeries<MGraded<T>>, SpecError> {
    spec.validate()?;
    let n = spec.n;
    let mut tower = Tower::new(TowerInput::from_spec(spec));
    let mut out = BiSeries::flat(n, spec.dz);
    for l in enumerate_indices(spec.symbol_count(), spec.dc) {
        if l.is_zero() {
            continue;
        }
        let (pl, ql) = tower.input.slot(&l);
        let upper = MultiIndex::new(pl.entries().iter().zip(ql.entries()).map(|(a, b)| *a.min(b)));
        let symbol = CPoly::term(Monomial::new(l.entries().iter().copied()), T::one(), Some(spec.dc));
        for i in enumerate_box(&upper) {
            let s = pl.checked_sub(&i).expect("inside the box");
            let t = ql.checked_sub(&i).expect("inside the box");
            let degree = s.order() + t.order();
            if degree == 0 || degree > spec.dz {
                continue;
            }
            let f: T = tower.f(&i, &l);
            if f.is_zero() {
                continue;
            }
            let exponent = 2 * (l.order() as i32 - 1 - i.order() as i32);
            out.add_term(BiKey::new(s, t), MGraded::monomial(exponent, symbol.scale_by(&f)));
        }
    }
    Ok(out)
}

pub fn bergman_potential_combinatorial<T: Scalar>(spec: &PotentialSpec<T>) -> Result<BiSeries<MGraded<T>>, SpecError> {
    Ok(spec.evaluate(&bergman_potential_combinatorial_symbolic(spec)?))
}

/// `L!` as an exact scalar, for callers normalizing `D` by hand.
pub fn multi_factorial<T: Scalar>(l: &MultiIndex) -> T {
    ratio(int_factorial(l), 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bergman::{bergman_potential, Perturbation};
    use crate::multiindex::falling;
    use num::BigRational as Q;
    use proptest::prelude::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.iter().copied())
    }

    fn z(v: i64) -> Q {
        Q::from_int(v)
    }

    fn input(n: usize, pq: &[(&[u32], &[u32])]) -> TowerInput {
        TowerInput::new(n, pq.iter().map(|x| mi(x.0)).collect(), pq.iter().map(|x| mi(x.1)).collect()).unwrap()
    }

    #[test]
    fn b_examples() {
        let ps = [mi(&[3])];
        let qs = [mi(&[2])];
        assert_eq!(coeff_b::<Q>(&mi(&[0]), &ps, &qs).unwrap(), z(1));
        assert_eq!(coeff_b::<Q>(&mi(&[1]), &ps, &qs).unwrap(), z(6));
        let ps2 = [mi(&[3, 1])];
        let qs2 = [mi(&[2, 2])];
        assert_eq!(coeff_b::<Q>(&mi(&[0, 1]), &ps2, &qs2).unwrap(), z(2));
    }

    #[test]
    fn b_hat_first_order() {
        let inp = input(1, &[(&[3], &[2]), (&[2], &[2])]);
        let comp = Composition { parts: vec![mi(&[1, 1]), mi(&[0, 2])] };
        let b = coeff_b::<Q>(&mi(&[1]), &[mi(&[5]), mi(&[4])], &[mi(&[4]), mi(&[4])]).unwrap();
        let correction: i64 = comp.parts.iter().map(|l| 3 * 2 * l.get(0) as i64 + 2 * 2 * l.get(1) as i64).sum();
        assert_eq!(coeff_b_hat::<Q>(&mi(&[1]), &comp, &inp).unwrap(), b - z(correction));
        assert_eq!(coeff_b_hat::<Q>(&mi(&[0]), &comp, &inp).unwrap(), z(1));
    }

    #[test]
    fn low_order_tower() {
        let inp = input(2, &[(&[2, 1], &[1, 2]), (&[0, 2], &[2, 0])]);
        let mut tower = Tower::new(inp.clone());
        for l in enumerate_indices(2, 4).filter(|l| !l.is_zero()) {
            assert_eq!(tower.d::<Q>(&mi(&[0, 0]), &l).unwrap(), z(1));
            for j in 0..2 {
                assert_eq!(tower.d::<Q>(&MultiIndex::unit(2, j), &l).unwrap(), z(0), "L = {l}");
            }
        }
        let comp = Composition { parts: vec![mi(&[1, 0]), mi(&[1, 1])] };
        assert_eq!(tower.e::<Q>(&mi(&[0, 0]), &comp).unwrap(), z(1));
        assert_eq!(tower.e::<Q>(&mi(&[1, 0]), &comp).unwrap(), z(0));
        let single = Composition { parts: vec![mi(&[2, 1])] };
        assert_eq!(tower.e::<Q>(&mi(&[1, 1]), &single).unwrap(), tower.d::<Q>(&mi(&[1, 1]), &mi(&[2, 1])).unwrap());
        let f0 = coeff_f::<Q>(&mi(&[0, 0]), &inp, 4).unwrap();
        assert_eq!(f0, [(mi(&[1, 0]), z(1)), (mi(&[0, 1]), z(1))].into_iter().collect());
        assert!(coeff_f::<Q>(&mi(&[0, 1]), &inp, 4).unwrap().is_empty());
        assert_eq!(coeff_f::<Q>(&mi(&[0, 1]), &inp, 0), Err(CombinatoricsError::DegreeBound));
    }

    #[test]
    fn combinatorial_potential_matches_expansion() {
        let specs = [
            PotentialSpec::<Q>::flat(1, 4, 2).with_perturbation(Perturbation::symbolic([2], [2], "c")),
            PotentialSpec::<Q>::flat(2, 4, 2)
                .with_perturbation(Perturbation::symbolic([2, 1], [1, 2], "a"))
                .with_perturbation(Perturbation::symbolic([1, 2], [2, 1], "b"))
                .with_perturbation(Perturbation::valued([2, 0], [3, 0], Q::from_ratio(1, 3))),
        ];
        for spec in specs {
            assert_eq!(bergman_potential_combinatorial(&spec).unwrap(), bergman_potential(&spec).unwrap());
        }
        let flat = PotentialSpec::<Q>::flat(2, 4, 2);
        assert_eq!(bergman_potential_combinatorial(&flat).unwrap(), BiSeries::flat(2, 4));
    }

    fn slot_strategy() -> impl Strategy<Value = (Vec<u32>, Vec<u32>)> {
        prop::collection::vec((0u32..4, 0u32..4), 1..4).prop_map(|v| v.into_iter().unzip())
    }

    proptest! {
        /// `Σ_I B_I · S!/(S − ΣQ_j + I)! = Π_j (S_j + Q_j)!/S_j!` at points where no argument is negative.
        #[test]
        fn b_reproduces_factorial_products((ps, qs) in slot_strategy(), s in 0i64..8) {
            let ps: Vec<MultiIndex> = ps.into_iter().map(|p| mi(&[p])).collect();
            let qs: Vec<MultiIndex> = qs.into_iter().map(|q| mi(&[q])).collect();
            let q_total: u32 = qs.iter().map(MultiIndex::order).sum();
            let mut lhs = z(1);
            let mut acc = s;
            for (p, q) in ps.iter().zip(&qs) {
                acc += p.order() as i64 - q.order() as i64;
                lhs = lhs * falling::<Q>(acc + q.order() as i64, q.order());
            }
            let mut rhs = z(0);
            for i in 0..=q_total {
                rhs = rhs + coeff_b::<Q>(&mi(&[i]), &ps, &qs).unwrap() * falling::<Q>(s, q_total - i);
            }
            prop_assert_eq!(lhs, rhs);
        }
    }
}
