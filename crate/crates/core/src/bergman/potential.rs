//! The Bergman potential `K_m = μ^{−2} log(N / N(0))` and its convergence checks.

use num::Zero;

use super::gram::{gram_inverse, gram_matrix, GramError, GramMatrix};
use super::spec::PotentialSpec;
use crate::multiindex::{enumerate_indices, MultiIndex};
use crate::scalar::Scalar;
use crate::series::{log1p_series, BiKey, BiSeries, CPoly, MGraded, SeriesError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PotentialError {
    #[error(transparent)]
    Gram(#[from] GramError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("the (0,0) entry of the inverse Gram matrix is not invertible")]
    SingularCorner,
}

/// Symbolic `K_m` with every perturbation kept as a symbol.
pub fn bergman_potential_symbolic<T: Scalar>(spec: &PotentialSpec<T>) -> Result<BiSeries<MGraded<T>>, PotentialError> {
    let h = gram_inverse(&gram_matrix(spec)?)?;
    bergman_potential_from_inverse(spec, &h)
}

/// `K_m` with fixed perturbation values substituted.
pub fn bergman_potential<T: Scalar>(spec: &PotentialSpec<T>) -> Result<BiSeries<MGraded<T>>, PotentialError> {
    Ok(spec.evaluate(&bergman_potential_symbolic(spec)?))
}

/// `K_m` built from a given inverse Gram matrix (entry `(S,T)` multiplies `z^T z̄^S`).
pub fn bergman_potential_from_inverse<T: Scalar>(
    spec: &PotentialSpec<T>,
    h: &GramMatrix<T>,
) -> Result<BiSeries<MGraded<T>>, PotentialError> {
    let n = spec.n;
    let mut sum = BiSeries::zero(n, spec.dz);
    for s in h.indices() {
        if s.order() > spec.dz {
            break;
        }
        for (t, v) in h.row(s) {
            if s.order() + t.order() <= spec.dz {
                sum.add_term(BiKey::new(t.clone(), s.clone()), v.clone());
            }
        }
    }
    let corner = sum.constant_term().inverse_unit().ok_or(PotentialError::SingularCorner)?;
    let mut ratio = sum.mul_coeff(&corner);
    ratio.remove(&BiKey::new(MultiIndex::zeros(n), MultiIndex::zeros(n)));
    Ok(log1p_series(&ratio)?.map(|c| c.shifted(-2)))
}

/// Verdict for one `(S,T)` coefficient of `K_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyVerdict<T: Scalar> {
    pub key: BiKey,
    /// The part of the coefficient with positive μ-exponent (must vanish).
    pub positive: MGraded<T>,
    /// μ⁰ part minus the potential coefficient (must vanish).
    pub constant_mismatch: CPoly<T>,
    /// Leading `μ^{e}` term with `e < 0`: the `1/m` rate data.
    pub leading_residue: Option<(i32, CPoly<T>)>,
}

impl<T: Scalar> KeyVerdict<T> {
    pub fn pass(&self) -> bool {
        self.positive.is_zero() && self.constant_mismatch.is_zero()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport<T: Scalar> {
    pub verdicts: Vec<KeyVerdict<T>>,
    /// Largest |μ-exponent| present in `K_m`.
    pub max_abs_exponent: i32,
    pub mu_exponent_cap: i32,
}

impl<T: Scalar> ConvergenceReport<T> {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(KeyVerdict::pass) && self.max_abs_exponent <= self.mu_exponent_cap
    }

    pub fn failures(&self) -> impl Iterator<Item = &KeyVerdict<T>> {
        self.verdicts.iter().filter(|v| !v.pass())
    }
}

pub fn convergence_report<T: Scalar>(spec: &PotentialSpec<T>) -> Result<ConvergenceReport<T>, PotentialError> {
    Ok(convergence_report_from(spec, &bergman_potential_symbolic(spec)?))
}

/// Judge every key `(S,T)` with `s + t ≤ D_z` of a symbolic `K_m`.
pub fn convergence_report_from<T: Scalar>(spec: &PotentialSpec<T>, km: &BiSeries<MGraded<T>>) -> ConvergenceReport<T> {
    let target = spec.potential(spec.dz);
    let values = spec.symbol_values();
    let mut verdicts = Vec::new();
    for s in enumerate_indices(spec.n, spec.dz) {
        for t in enumerate_indices(spec.n, spec.dz - s.order()) {
            let key = BiKey::new(s.clone(), t);
            let c = km.get(&key).cloned().unwrap_or_else(MGraded::zero);
            let expected = target.get(&key).map(|v| v.part(0)).unwrap_or_else(CPoly::zero);
            verdicts.push(KeyVerdict {
                positive: c.positive_part().evaluate(&values),
                constant_mismatch: (c.part(0) - expected).evaluate(&values),
                leading_residue: c.evaluate(&values).leading_negative().map(|(e, p)| (e, p.clone())),
                key,
            });
        }
    }
    verdicts.sort_by(|a, b| a.key.cmp(&b.key));
    let max_abs_exponent = km
        .iter()
        .flat_map(|(_, c)| [c.max_exponent(), c.min_exponent()])
        .flatten()
        .map(i32::abs)
        .max()
        .unwrap_or(0);
    ConvergenceReport { verdicts, max_abs_exponent, mu_exponent_cap: spec.mu_exponent_cap() }
}

/// `K_m` coefficients with `s + t ≤ D_z` that change when `D_p` grows by two.
pub fn stability_check<T: Scalar>(spec: &PotentialSpec<T>) -> Result<Vec<BiKey>, PotentialError> {
    let base = bergman_potential_symbolic(spec)?;
    let mut wider = spec.clone();
    wider.dp = Some(spec.section_order() + 2);
    let extended = bergman_potential_symbolic(&wider)?;
    let mut keys: Vec<BiKey> = base.keys().chain(extended.keys()).cloned().collect();
    keys.sort();
    keys.dedup();
    Ok(keys.into_iter().filter(|k| base.get(k) != extended.get(k)).collect())
}

/// Largest μ-exponent of the inverse entries `(0, e_i)` and `(e_i, 0)`.
pub fn corner_exponents<T: Scalar>(h: &GramMatrix<T>, n: usize) -> Vec<(MultiIndex, MultiIndex, Option<i32>)> {
    let zero = MultiIndex::zeros(n);
    let mut out = Vec::new();
    for i in 0..n {
        let e = MultiIndex::unit(n, i);
        out.push((zero.clone(), e.clone(), h.get(&zero, &e).max_exponent()));
        out.push((e.clone(), zero.clone(), h.get(&e, &zero).max_exponent()));
    }
    out
}

/// The first-order corner entries are `O(1/m)`: every exponent is at most −2.
pub fn corner_decay<T: Scalar>(spec: &PotentialSpec<T>) -> Result<bool, PotentialError> {
    let h = gram_inverse(&gram_matrix(spec)?)?;
    Ok(corner_exponents(&h, spec.n).iter().all(|(_, _, e)| e.map_or(true, |e| e <= -2)))
}

/// Add `μ^{exponent} · value` to one inverse entry; used to exercise the report.
pub fn corrupt_entry<T: Scalar>(h: &mut GramMatrix<T>, s: &MultiIndex, t: &MultiIndex, exponent: i32, value: T) {
    let v = h.get(s, t) + MGraded::scalar(exponent, value);
    h.set(s, t, v);
}

impl<T: Scalar> BiSeries<MGraded<T>> {
    /// Numeric value of every coefficient at `m`, keeping exponents in `range`.
    pub fn values_at(&self, m: f64, symbols: &[f64], range: std::ops::RangeInclusive<i32>) -> Vec<(BiKey, f64)> {
        self.iter().map(|(k, c)| (k.clone(), c.value_at(m, symbols, range.clone()))).collect()
    }

    /// Whether every coefficient is a plain scalar times `μ⁰`.
    pub fn is_mu_free(&self) -> bool {
        self.iter().all(|(_, c)| c.terms().all(|(e, _)| e == 0))
    }
}
