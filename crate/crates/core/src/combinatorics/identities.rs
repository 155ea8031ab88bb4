//! Composition identities and their brute-force companions.
//!
//! The companions enumerate compositions of `L` into `u ≤ |L|` nonzero parts
//! and accumulate exact integer numerators; the division by `L!` (and by the
//! `1/u` weights' common denominator) happens once at the end.

use std::collections::BTreeMap;

use num::integer::lcm;

use super::CombinatoricsError;
use crate::multiindex::{binom, enumerate_box, enumerate_compositions, injections, Composition, MultiIndex};
use crate::scalar::Scalar;

/// How the `u`-slot sum is weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SlotWeight {
    /// `(−1)^u`
    Alternating,
    /// `(−1)^{u−1}/u`
    Logarithmic,
}

/// All compositions of `L` with their multinomial weights `L!/Π(L^j)!`.
pub(crate) struct CompositionTable {
    pub order: u32,
    pub factorial: i128,
    pub entries: Vec<(Composition, i128)>,
}

impl CompositionTable {
    pub fn new(l: &MultiIndex) -> Self {
        let factorial = int_factorial(l);
        let mut entries = Vec::new();
        for u in 1..=l.order() as usize {
            for comp in enumerate_compositions(l, u) {
                let denom: i128 = comp.parts.iter().map(int_factorial).product();
                entries.push((comp, factorial / denom));
            }
        }
        CompositionTable { order: l.order(), factorial, entries }
    }

    /// `Σ_u w(u) Σ_{compositions} f(L^1..L^u) / Π(L^j)!` as an exact scalar.
    pub fn sum<T: Scalar>(&self, weight: SlotWeight, mut f: impl FnMut(&Composition) -> i128) -> T {
        let common = self.common_denominator(weight);
        let mut total: i128 = 0;
        for (comp, multinomial) in &self.entries {
            let v = f(comp);
            if v != 0 {
                total += slot_factor(weight, comp.len(), common) * multinomial * v;
            }
        }
        ratio(total, common * self.factorial)
    }

    fn common_denominator(&self, weight: SlotWeight) -> i128 {
        match weight {
            SlotWeight::Alternating => 1,
            SlotWeight::Logarithmic => (1..=self.order.max(1) as i128).fold(1, lcm),
        }
    }
}

fn slot_factor(weight: SlotWeight, u: usize, common: i128) -> i128 {
    let sign = if u % 2 == 0 { 1 } else { -1 };
    match weight {
        SlotWeight::Alternating => sign,
        SlotWeight::Logarithmic => -sign * (common / u as i128),
    }
}

pub(crate) fn int_factorial(l: &MultiIndex) -> i128 {
    l.entries().iter().map(|&x| (1..=x as i128).product::<i128>()).product()
}

pub(crate) fn ratio<T: Scalar>(num: i128, den: i128) -> T {
    let to = |v: i128| T::from_i128(v).expect("value fits the scalar type");
    to(num) / to(den)
}

/// `L!/(L−A)!` entrywise, zero when `A ≰ L`.
pub(crate) fn int_falling(l: &MultiIndex, a: &MultiIndex) -> i128 {
    let mut v: i128 = 1;
    for (&x, &y) in l.entries().iter().zip(a.entries()) {
        if y > x {
            return 0;
        }
        for k in 0..y {
            v *= (x - k) as i128;
        }
    }
    v
}

fn check_selectors(l: &MultiIndex, selectors: &[MultiIndex]) -> Result<(), CombinatoricsError> {
    if selectors.is_empty() {
        return Err(CombinatoricsError::NoSelectors);
    }
    for a in selectors {
        if a.len() != l.len() {
            return Err(CombinatoricsError::LengthMismatch);
        }
        if a.is_zero() {
            return Err(CombinatoricsError::ZeroSelector);
        }
    }
    Ok(())
}

fn check_nonzero(l: &MultiIndex) -> Result<(), CombinatoricsError> {
    if l.is_zero() {
        Err(CombinatoricsError::EmptyIndex)
    } else {
        Ok(())
    }
}

fn sign(e: i64) -> i128 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// `Σ_u (−1)^u Σ 1/Π(L^j)! = (−1)^l / L!`.
pub fn identity_da<T: Scalar>(l: &MultiIndex) -> Result<T, CombinatoricsError> {
    check_nonzero(l)?;
    Ok(ratio(sign(l.order() as i64), int_factorial(l)))
}

pub fn identity_da_brute<T: Scalar>(l: &MultiIndex) -> Result<T, CombinatoricsError> {
    check_nonzero(l)?;
    Ok(CompositionTable::new(l).sum(SlotWeight::Alternating, |_| 1))
}

/// `Σ_u (−1)^{u−1}/u Σ 1/Π(L^j)!` is 1 for `|L| = 1` and 0 otherwise.
pub fn identity_harmonic<T: Scalar>(l: &MultiIndex) -> Result<T, CombinatoricsError> {
    check_nonzero(l)?;
    Ok(if l.order() == 1 { T::one() } else { T::zero() })
}

pub fn identity_harmonic_brute<T: Scalar>(l: &MultiIndex) -> Result<T, CombinatoricsError> {
    check_nonzero(l)?;
    Ok(CompositionTable::new(l).sum(SlotWeight::Logarithmic, |_| 1))
}

/// `Σ_{j_1..j_r distinct} Π_k L^{j_k}!/(L^{j_k} − A_k)!` for one composition.
pub(crate) fn selector_sum(comp: &Composition, selectors: &[MultiIndex]) -> i128 {
    if selectors.len() > comp.len() {
        return 0;
    }
    selector_sum_with(comp, selectors, &injections(selectors.len(), comp.len()))
}

/// [`selector_sum`] with the injections `r → u` supplied by the caller.
pub(crate) fn selector_sum_with(comp: &Composition, selectors: &[MultiIndex], injections: &[Vec<usize>]) -> i128 {
    let table: Vec<Vec<i128>> =
        selectors.iter().map(|a| comp.parts.iter().map(|part| int_falling(part, a)).collect()).collect();
    injections
        .iter()
        .map(|js| js.iter().enumerate().map(|(k, &j)| table[k][j]).product::<i128>())
        .sum()
}

fn selector_total(selectors: &[MultiIndex]) -> MultiIndex {
    selectors.iter().skip(1).fold(selectors[0].clone(), |acc, a| acc.add(a))
}

/// `(−1)^{r+l−a} r!/(L−A)!` with `A = ΣA_k`, or 0 when `A ≰ L`.
pub fn identity_ec<T: Scalar>(l: &MultiIndex, selectors: &[MultiIndex]) -> Result<T, CombinatoricsError> {
    check_nonzero(l)?;
    check_selectors(l, selectors)?;
    let a = selector_total(selectors);
    let Some(rest) = l.checked_sub(&a) else { return Ok(T::zero()) };
    let r = selectors.len() as i64;
    let r_fact: i128 = (1..=r as i128).product();
    Ok(ratio(sign(r + l.order() as i64 - a.order() as i64) * r_fact, int_factorial(&rest)))
}

/// Companion of [`identity_ec`] with the selectors `j_k` ranging over distinct slots.
pub fn identity_ec_brute<T: Scalar>(l: &MultiIndex, selectors: &[MultiIndex]) -> Result<T, CombinatoricsError> {
    check_nonzero(l)?;
    check_selectors(l, selectors)?;
    Ok(CompositionTable::new(l).sum(SlotWeight::Alternating, |c| selector_sum(c, selectors)))
}

/// `(−1)^{r−1}(r−1)!` when `L = ΣA_k`, else 0.
pub fn identity_ea<T: Scalar>(l: &MultiIndex, selectors: &[MultiIndex]) -> Result<T, CombinatoricsError> {
    check_nonzero(l)?;
    check_selectors(l, selectors)?;
    if selector_total(selectors) != *l {
        return Ok(T::zero());
    }
    let r = selectors.len() as i64;
    Ok(ratio(sign(r - 1) * (1..r as i128).product::<i128>(), 1))
}

pub fn identity_ea_brute<T: Scalar>(l: &MultiIndex, selectors: &[MultiIndex]) -> Result<T, CombinatoricsError> {
    check_nonzero(l)?;
    check_selectors(l, selectors)?;
    Ok(CompositionTable::new(l).sum(SlotWeight::Logarithmic, |c| selector_sum(c, selectors)))
}

/// Coefficients `C(p,i)·C(q,i)·i!` of `(s+p)!/(s+p−q)! = Σ_i c_i · s!/(s−q+i)!`.
pub fn factorial_expand<T: Scalar>(p: u32, q: u32) -> Vec<T> {
    (0..=p.min(q))
        .map(|i| binom::<T>(p as i64, i) * binom::<T>(q as i64, i) * T::factorial(i))
        .collect()
}

/// The multi-index version: coefficient of `S!/(S−Q+I)!` for every `I ≤ min(P, Q)`.
pub fn factorial_expand_multi<T: Scalar>(p: &MultiIndex, q: &MultiIndex) -> Result<BTreeMap<MultiIndex, T>, CombinatoricsError> {
    if p.len() != q.len() {
        return Err(CombinatoricsError::LengthMismatch);
    }
    let upper = MultiIndex::new(p.entries().iter().zip(q.entries()).map(|(a, b)| (*a).min(*b)));
    let tables: Vec<Vec<T>> = p.entries().iter().zip(q.entries()).map(|(&a, &b)| factorial_expand(a, b)).collect();
    Ok(enumerate_box(&upper)
        .into_iter()
        .map(|i| {
            let c = i.entries().iter().enumerate().fold(T::one(), |acc, (k, &e)| acc * tables[k][e as usize].clone());
            (i, c)
        })
        .collect())
}

/// Falling factorial `x(x−1)…(x−k+1)` as an integer polynomial value.
pub(crate) fn falling_int(x: i64, k: u32) -> i128 {
    (0..k as i64).map(|j| (x - j) as i128).product()
}

/// Both sides of the one-variable expansion at `s`.
pub fn factorial_expand_sides<T: Scalar>(p: u32, q: u32, s: u32) -> (T, T) {
    let lhs = ratio(falling_int(s as i64 + p as i64, q), 1);
    let rhs = factorial_expand::<T>(p, q)
        .into_iter()
        .enumerate()
        .fold(T::zero(), |acc, (i, c)| acc + c * ratio(falling_int(s as i64, q - i as u32), 1));
    (lhs, rhs)
}

/// Both sides of the multi-index expansion at `S`.
pub fn factorial_expand_multi_sides<T: Scalar>(
    p: &MultiIndex,
    q: &MultiIndex,
    s: &MultiIndex,
) -> Result<(T, T), CombinatoricsError> {
    if s.len() != p.len() {
        return Err(CombinatoricsError::LengthMismatch);
    }
    let falling_multi = |base: &MultiIndex, shift: &[i64], k: &MultiIndex| -> i128 {
        (0..base.len()).map(|j| falling_int(base.get(j) as i64 + shift[j], k.get(j))).product()
    };
    let zero = vec![0i64; p.len()];
    let shift: Vec<i64> = p.entries().iter().map(|&x| x as i64).collect();
    let lhs = ratio(falling_multi(s, &shift, q), 1);
    let mut rhs = T::zero();
    for (i, c) in factorial_expand_multi::<T>(p, q)? {
        let k = MultiIndex::new(q.entries().iter().zip(i.entries()).map(|(a, b)| a - b));
        rhs = rhs + c * ratio(falling_multi(s, &zero, &k), 1);
    }
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational as Q;
    use proptest::prelude::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.iter().copied())
    }

    fn q(a: i64, b: i64) -> Q {
        Q::from_ratio(a, b)
    }

    #[test]
    fn da_examples() {
        assert_eq!(identity_da_brute::<Q>(&mi(&[1])).unwrap(), q(-1, 1));
        assert_eq!(identity_da_brute::<Q>(&mi(&[2])).unwrap(), q(1, 2));
        assert_eq!(identity_da_brute::<Q>(&mi(&[1, 1])).unwrap(), q(1, 1));
        assert_eq!(identity_da::<Q>(&mi(&[1, 1])).unwrap(), q(1, 1));
        assert_eq!(identity_da::<Q>(&mi(&[0, 0])), Err(CombinatoricsError::EmptyIndex));
    }

    #[test]
    fn harmonic_examples() {
        assert_eq!(identity_harmonic_brute::<Q>(&mi(&[1])).unwrap(), q(1, 1));
        assert_eq!(identity_harmonic_brute::<Q>(&mi(&[2])).unwrap(), q(0, 1));
        assert_eq!(identity_harmonic_brute::<Q>(&mi(&[2, 1])).unwrap(), q(0, 1));
    }

    #[test]
    fn selector_examples() {
        assert_eq!(identity_ec::<Q>(&mi(&[1]), &[mi(&[1])]).unwrap(), q(-1, 1));
        assert_eq!(identity_ec_brute::<Q>(&mi(&[1]), &[mi(&[1])]).unwrap(), q(-1, 1));
        assert_eq!(identity_ec::<Q>(&mi(&[1, 0]), &[mi(&[0, 1])]).unwrap(), q(0, 1));
        assert_eq!(identity_ec_brute::<Q>(&mi(&[1, 0]), &[mi(&[0, 1])]).unwrap(), q(0, 1));
        assert_eq!(identity_ea_brute::<Q>(&mi(&[1]), &[mi(&[1])]).unwrap(), q(1, 1));
        assert_eq!(identity_ea_brute::<Q>(&mi(&[2]), &[mi(&[1])]).unwrap(), q(0, 1));
        assert_eq!(identity_ea_brute::<Q>(&mi(&[2]), &[mi(&[1]), mi(&[1])]).unwrap(), q(-1, 1));
        assert_eq!(identity_ea::<Q>(&mi(&[2]), &[mi(&[1]), mi(&[1])]).unwrap(), q(-1, 1));
        assert_eq!(identity_ec::<Q>(&mi(&[2]), &[mi(&[0])]), Err(CombinatoricsError::ZeroSelector));
        assert_eq!(identity_ea::<Q>(&mi(&[2]), &[]), Err(CombinatoricsError::NoSelectors));
    }

    /// Two selectors cannot share the single slot of `L = (2)`; allowing it
    /// would add `2!/0!` and break the `−1` of the closed form.
    #[test]
    fn distinct_selectors_are_needed() {
        let comp = Composition { parts: vec![mi(&[2])] };
        assert_eq!(selector_sum(&comp, &[mi(&[1]), mi(&[1])]), 0);
    }

    #[test]
    fn factorial_expansion_examples() {
        assert_eq!(factorial_expand::<Q>(0, 3), vec![q(1, 1)]);
        assert_eq!(factorial_expand::<Q>(1, 1), vec![q(1, 1), q(1, 1)]);
        for s in 0..4 {
            let (l, r) = factorial_expand_sides::<Q>(1, 1, s);
            assert_eq!(l, r);
        }
        let table = factorial_expand_multi::<Q>(&mi(&[1, 1]), &mi(&[1, 1])).unwrap();
        assert_eq!(table.len(), 4);
        assert!(table.values().all(|v| *v == q(1, 1)));
    }

    proptest! {
        #[test]
        fn expansion_holds(p in 0u32..6, qq in 0u32..6, s in 0u32..14) {
            let (l, r) = factorial_expand_sides::<Q>(p, qq, s);
            prop_assert_eq!(l, r);
        }

        #[test]
        fn multi_expansion_holds(p in prop::collection::vec(0u32..4, 2), qq in prop::collection::vec(0u32..4, 2), s in prop::collection::vec(0u32..9, 2)) {
            let (l, r) = factorial_expand_multi_sides::<Q>(&MultiIndex::from(p), &MultiIndex::from(qq), &MultiIndex::from(s)).unwrap();
            prop_assert_eq!(l, r);
        }

        #[test]
        fn closed_forms_match(l in prop::collection::vec(0u32..3, 1..3), a in prop::collection::vec(0u32..2, 1..3)) {
            let l = MultiIndex::from(l);
            prop_assume!(!l.is_zero());
            prop_assert_eq!(identity_da::<Q>(&l).unwrap(), identity_da_brute::<Q>(&l).unwrap());
            prop_assert_eq!(identity_harmonic::<Q>(&l).unwrap(), identity_harmonic_brute::<Q>(&l).unwrap());
            let mut a: Vec<u32> = a.into_iter().take(l.len()).collect();
            a.resize(l.len(), 0);
            let a = MultiIndex::from(a);
            prop_assume!(!a.is_zero());
            let sel = [a.clone(), a];
            prop_assert_eq!(identity_ec::<Q>(&l, &sel).unwrap(), identity_ec_brute::<Q>(&l, &sel).unwrap());
            prop_assert_eq!(identity_ea::<Q>(&l, &sel).unwrap(), identity_ea_brute::<Q>(&l, &sel).unwrap());
        }
    }
}
