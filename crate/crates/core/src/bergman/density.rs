//! The weighted volume density `e^{−m(K−|z|²)} det g` and its minor expansion.

use num::Zero;

use super::spec::{PotentialSpec, SpecError};
use crate::multiindex::{subsets, MultiIndex};
use crate::scalar::{int_determinant, Scalar};
use crate::series::{det_series, exp_series, hermitian_hessian, BiKey, BiSeries, CPoly, MGraded, Monomial};

/// `∫ |z^P|² e^{−m|z|²}` over `C^n` with the global `π^n` unit dropped: `P!·μ^{−2(n+p)}`.
pub fn gaussian_moment<T: Scalar>(p: &MultiIndex, n: usize) -> MGraded<T> {
    MGraded::scalar(-2 * (n as i32 + p.order() as i32), p.factorial())
}

/// `Σ ã_{S,T} z^S z̄^T = e^{−μ²(K−|z|²)} · det(∂∂̄K)`, to z-degree [`PotentialSpec::density_order`].
pub fn density_expansion<T: Scalar>(spec: &PotentialSpec<T>) -> Result<BiSeries<MGraded<T>>, SpecError> {
    spec.validate()?;
    let dz = spec.density_order();
    let weighted = spec.perturbation_series(dz).map(|c| -c.shifted(2));
    let exponential = exp_series(&weighted)?;
    let det = det_series(&hermitian_hessian(&spec.potential(dz + 2)))?.retruncate(dz);
    Ok(exponential.product(&det))
}

/// `det g` computed directly from the hessian of the potential.
pub fn hessian_determinant<T: Scalar>(spec: &PotentialSpec<T>) -> Result<BiSeries<MGraded<T>>, SpecError> {
    spec.validate()?;
    let dz = spec.density_order();
    Ok(det_series(&hermitian_hessian(&spec.potential(dz + 2)))?.retruncate(dz))
}

/// `det g` from the closed minor expansion
/// `Σ_{I ⊆ perturbations} Π_{i∈I} c_i z^{P^i} z̄^{Q^i} Σ_{|J|=|I|} det(P^I_J) det(Q^I_J) z^{−e_J} z̄^{−e_J}`.
pub fn det_minor_expansion<T: Scalar>(spec: &PotentialSpec<T>) -> Result<BiSeries<MGraded<T>>, SpecError> {
    spec.validate()?;
    let n = spec.n;
    let dz = spec.density_order();
    let mut out = BiSeries::zero(n, dz);
    let (ps, qs) = spec.exponents();
    for subset in subsets(spec.symbol_count()) {
        if subset.len() > n || subset.len() as u32 > spec.dc {
            continue;
        }
        let mut symbol_exp = vec![0u32; spec.symbol_count()];
        let mut p_sum = MultiIndex::zeros(n);
        let mut q_sum = MultiIndex::zeros(n);
        for &i in &subset {
            symbol_exp[i] = 1;
            p_sum = p_sum.add(&ps[i]);
            q_sum = q_sum.add(&qs[i]);
        }
        let monomial = CPoly::term(Monomial::new(symbol_exp), T::one(), Some(spec.dc));
        for cols in subsets(n).into_iter().filter(|c| c.len() == subset.len()) {
            let minor = |v: &[MultiIndex]| -> i64 {
                let m: Vec<Vec<i64>> =
                    subset.iter().map(|&i| cols.iter().map(|&k| v[i].get(k) as i64).collect()).collect();
                int_determinant(&m)
            };
            let weight = minor(&ps) * minor(&qs);
            if weight == 0 {
                continue;
            }
            let mut e_j = MultiIndex::zeros(n);
            for &k in &cols {
                e_j.set(k, 1);
            }
            let (Some(s), Some(t)) = (p_sum.checked_sub(&e_j), q_sum.checked_sub(&e_j)) else {
                continue;
            };
            let c = monomial.scale_by(&T::from_int(weight));
            if !c.is_zero() {
                out.add_term(BiKey::new(s, t), MGraded::from_cpoly(c));
            }
        }
    }
    Ok(out)
}
