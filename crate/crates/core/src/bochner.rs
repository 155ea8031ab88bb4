//! Normal coordinates for a Kähler potential jet.
//!
//! [`normalize`] finds a holomorphic coordinate change `z = φ(w)` and a
//! holomorphic gauge `f` such that `K(φ(w)) + f(w) + conj f(w)` has no
//! `(l,0)`, `(0,l)`, `(l,1)` or `(1,l)` terms apart from `|w|²`.
//!
//! Only real scalar coefficients are handled; the (1,1) block is then a real
//! symmetric matrix and the framing is its positive-definite inverse square root.

use std::collections::BTreeMap;


use crate::multiindex::{indices_of_order, MultiIndex};
use crate::scalar::Scalar;
use crate::series::{
    hermitian_hessian, substitute_holomorphic, BiKey, BiSeries, Coefficient, SeriesError, SymbolInvolution,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BochnerError {
    #[error("potential is not real: coefficient ({0}) differs from its conjugate")]
    NotReal(BiKey),
    #[error("not a metric jet: the (1,1) block is not positive definite")]
    NotMetric,
    #[error("the (1,1) block has no square root over this scalar field")]
    IrrationalFrame,
    #[error("requested degree {up_to} exceeds the truncation D_z = {dz}")]
    DegreeTooHigh { up_to: u32, dz: u32 },
    #[error("elimination at degree {0} did not reach a fixpoint")]
    NoFixpoint(u32),
    #[error("gauge violation at ({0})")]
    GaugeViolation(BiKey),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Result of [`normalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm<T: Scalar + Coefficient<Scalar = T>> {
    /// `z^i` as a holomorphic series in `w`.
    pub coordinate_change: Vec<BiSeries<T>>,
    /// Holomorphic `f(w)`; the normal form is `K∘φ + f + f̄`.
    pub gauge: BiSeries<T>,
    pub normalized_potential: BiSeries<T>,
    /// Total degree up to which the conditions hold.
    pub up_to: u32,
}

impl<T: Scalar + Coefficient<Scalar = T>> NormalForm<T> {
    /// Whether `φ` is the identity map.
    pub fn is_identity_change(&self) -> bool {
        let n = self.normalized_potential.n();
        let dz = self.normalized_potential.dz();
        self.coordinate_change
            .iter()
            .zip(BiSeries::identity_map(n, dz))
            .all(|(a, b)| a.retruncate(dz) == b)
    }
}

/// One coefficient breaking the normal-form conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeViolation<T> {
    pub key: BiKey,
    pub value: T,
    pub expected: T,
}

fn is_unit_pair(key: &BiKey) -> bool {
    key.s.order() == 1 && key.s == key.t
}

fn restricted(key: &BiKey) -> bool {
    key.s.is_zero() || key.t.is_zero() || key.s.order() == 1 || key.t.order() == 1
}

/// Every restricted coefficient of total degree ≤ `up_to` that differs from the normal form.
pub fn verify_gauge<T: Scalar + Coefficient<Scalar = T>>(k: &BiSeries<T>, up_to: u32) -> Vec<GaugeViolation<T>> {
    let n = k.n();
    let mut out = Vec::new();
    if up_to >= 2 {
        for i in 0..n {
            let e = MultiIndex::unit(n, i);
            let key = BiKey::new(e.clone(), e.clone());
            let value = k.coeff(&e, &e);
            if !value.is_one() {
                out.push(GaugeViolation { key, value, expected: T::one() });
            }
        }
    }
    for (key, c) in k.iter() {
        if key.degree() <= up_to && restricted(key) && !is_unit_pair(key) && !c.is_zero() {
            out.push(GaugeViolation { key: key.clone(), value: c.clone(), expected: T::zero() });
        }
    }
    out.sort_by(|a, b| a.key.cmp(&b.key));
    out
}

/// Bring `k` into normal form up to total degree `up_to`.
pub fn normalize<T: Scalar + Coefficient<Scalar = T>>(k: &BiSeries<T>, up_to: u32) -> Result<NormalForm<T>, BochnerError> {
    let n = k.n();
    if up_to > k.dz() {
        return Err(BochnerError::DegreeTooHigh { up_to, dz: k.dz() });
    }
    let conj = k.conjugate(&SymbolInvolution::identity());
    if let Some(key) = k.keys().chain(conj.keys()).find(|key| k.get(key) != conj.get(key)) {
        return Err(BochnerError::NotReal(key.clone()));
    }
    let k = k.retruncate(up_to);
    let block: Vec<Vec<T>> = (0..n)
        .map(|i| (0..n).map(|j| k.coeff(&MultiIndex::unit(n, i), &MultiIndex::unit(n, j))).collect())
        .collect();
    let frame = inverse(&positive_sqrt(&block)?).ok_or(BochnerError::NotMetric)?;

    let mut phi: Vec<BiSeries<T>> = (0..n)
        .map(|i| {
            BiSeries::from_terms(
                n,
                up_to,
                (0..n).map(|j| (BiKey::new(MultiIndex::unit(n, j), MultiIndex::zeros(n)), frame[i][j].clone())),
            )
        })
        .collect();
    let inv = SymbolInvolution::identity();
    let mut current = substitute_holomorphic(&k, &phi, &inv)?;

    for d in 2..up_to {
        let mut rounds = 0;
        loop {
            let psi = mixed_block(&current, d);
            // One step clears the block exactly; with floats only rounding is left.
            if psi.iter().all(BiSeries::is_zero) || (rounds > 0 && !T::EXACT) {
                break;
            }
            rounds += 1;
            if rounds > up_to {
                return Err(BochnerError::NoFixpoint(d));
            }
            let step: Vec<BiSeries<T>> = BiSeries::identity_map(n, up_to)
                .into_iter()
                .zip(&psi)
                .map(|(w, p)| w.add(p))
                .collect::<Result<_, _>>()?;
            current = substitute_holomorphic(&current, &step, &inv)?;
            phi = phi.iter().map(|f| substitute_holomorphic(f, &step, &inv)).collect::<Result<_, _>>()?;
        }
    }

    // f = −(holomorphic part), with the constant split evenly between f and f̄.
    let zero = MultiIndex::zeros(n);
    let mut gauge = current.filter(|key| key.t.is_zero()).neg();
    if let Some(c) = gauge.remove(&BiKey::new(zero.clone(), zero.clone())) {
        gauge.add_term(BiKey::new(zero.clone(), zero), c * T::from_ratio(1, 2));
    }
    let normalized = current.add(&gauge)?.add(&gauge.conjugate(&inv))?;
    Ok(NormalForm { coordinate_change: phi, gauge, normalized_potential: normalized, up_to })
}

/// `ψ^j = −Σ_{|D|=d} K_{D, e_j} w^D`.
fn mixed_block<T: Scalar + Coefficient<Scalar = T>>(k: &BiSeries<T>, d: u32) -> Vec<BiSeries<T>> {
    let n = k.n();
    let zero = MultiIndex::zeros(n);
    (0..n)
        .map(|j| {
            let e = MultiIndex::unit(n, j);
            BiSeries::from_terms(
                n,
                k.dz(),
                indices_of_order(n, d).into_iter().map(|s| (BiKey::new(s.clone(), zero.clone()), -k.coeff(&s, &e))),
            )
        })
        .collect()
}

/// The degree-(2,2) coefficients split evenly over ordered index quadruples.
///
/// Curvature coefficients keyed by `(i, j, k, l)`.
pub type CurvatureBlock<T> = BTreeMap<(usize, usize, usize, usize), T>;

/// Entry `(i,j,k,l)` multiplies `z^i z̄^j z^k z̄^l`, so summing over all quadruples
/// gives back the (2,2) part.
pub fn curvature_block<T: Scalar + Coefficient<Scalar = T>>(
    k: &BiSeries<T>,
) -> Result<CurvatureBlock<T>, BochnerError> {
    if let Some(v) = verify_gauge(k, 4.min(k.dz())).first() {
        return Err(BochnerError::GaugeViolation(v.key.clone()));
    }
    let n = k.n();
    let mult = |a: usize, b: usize| T::from_int(if a == b { 1 } else { 2 });
    let mut out = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            for kk in 0..n {
                for l in 0..n {
                    let s = MultiIndex::unit(n, i).add(&MultiIndex::unit(n, kk));
                    let t = MultiIndex::unit(n, j).add(&MultiIndex::unit(n, l));
                    out.insert((i, j, kk, l), k.coeff(&s, &t) / (mult(i, kk) * mult(j, l)));
                }
            }
        }
    }
    Ok(out)
}

/// `J_{ik} = ∂φ^i/∂w^k` of a coordinate change.
pub fn jacobian<T: Scalar + Coefficient<Scalar = T>>(phi: &[BiSeries<T>]) -> Vec<Vec<BiSeries<T>>> {
    use crate::series::{partial, Variable};
    phi.iter()
        .map(|f| (0..phi.len()).map(|k| partial(f, Variable::Holomorphic(k))).collect())
        .collect()
}

/// `Jᵀ · g(φ(w)) · J̄`: the metric of `k` pulled back through `phi`.
pub fn pullback_metric<T: Scalar + Coefficient<Scalar = T>>(
    k: &BiSeries<T>,
    phi: &[BiSeries<T>],
) -> Result<Vec<Vec<BiSeries<T>>>, BochnerError> {
    let n = k.n();
    let inv = SymbolInvolution::identity();
    let dz = k.dz().saturating_sub(2);
    let g: Vec<Vec<BiSeries<T>>> = hermitian_hessian(k)
        .iter()
        .map(|row| row.iter().map(|e| substitute_holomorphic(e, phi, &inv)).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;
    let jac = jacobian(phi);
    let mut out = vec![vec![BiSeries::zero(n, dz); n]; n];
    for (a, row) in out.iter_mut().enumerate() {
        for (b, entry) in row.iter_mut().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    let term = jac[i][a].product(&g[i][j]).product(&jac[j][b].conjugate(&inv));
                    entry.accumulate(&term.retruncate(dz));
                }
            }
        }
    }
    Ok(out)
}

/// Positive-definite square root of a symmetric matrix.
///
/// Diagonal matrices use the scalar root. Otherwise a floating-point
/// Denman–Beavers iterate is computed and, for exact scalars, each entry is
/// rounded to a nearby rational and the square is checked exactly.
fn positive_sqrt<T: Scalar>(h: &[Vec<T>]) -> Result<Vec<Vec<T>>, BochnerError> {
    let n = h.len();
    if !is_positive_definite(h) {
        return Err(BochnerError::NotMetric);
    }
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || h[i][j].is_zero()));
    if diagonal {
        let mut out = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            out[i][i] = h[i][i].exact_sqrt().ok_or(BochnerError::IrrationalFrame)?;
        }
        return Ok(out);
    }
    let approx: Vec<Vec<f64>> = h.iter().map(|r| r.iter().map(Scalar::approx).collect()).collect();
    let root = denman_beavers(&approx).ok_or(BochnerError::NotMetric)?;
    let candidate: Vec<Vec<T>> = root
        .iter()
        .map(|r| r.iter().map(|&v| nearby_scalar::<T>(v)).collect::<Option<_>>())
        .collect::<Option<_>>()
        .ok_or(BochnerError::IrrationalFrame)?;
    if T::EXACT && mat_mul(&candidate, &candidate) != h {
        return Err(BochnerError::IrrationalFrame);
    }
    Ok(candidate)
}

fn nearby_scalar<T: Scalar>(v: f64) -> Option<T> {
    if !T::EXACT {
        return T::from_f64(v);
    }
    let (p, q) = simplest_fraction(v, 1e-9, 1_000_000)?;
    Some(T::from_ratio(p, q))
}

/// Continued-fraction convergent of `v` within `tol`, denominators up to `max_den`.
fn simplest_fraction(v: f64, tol: f64, max_den: i64) -> Option<(i64, i64)> {
    if !v.is_finite() {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut x = v;
    loop {
        let a = x.floor();
        if a.abs() > 1e12 {
            return None;
        }
        let a = a as i64;
        let (p2, q2) = (a.checked_mul(p1)?.checked_add(p0)?, a.checked_mul(q1)?.checked_add(q0)?);
        if q2 > max_den {
            return None;
        }
        if (p2 as f64 / q2 as f64 - v).abs() <= tol * v.abs().max(1.0) {
            return Some((p2, q2));
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        x = 1.0 / (x - a as f64);
    }
}

fn is_positive_definite<T: Scalar>(h: &[Vec<T>]) -> bool {
    let n = h.len();
    if (0..n).any(|i| (0..n).any(|j| h[i][j] != h[j][i])) {
        return false;
    }
    // Leading pivots of Gaussian elimination are all positive.
    let mut a = h.to_vec();
    for c in 0..n {
        if a[c][c] <= T::zero() {
            return false;
        }
        for r in c + 1..n {
            let f = a[r][c].clone() / a[c][c].clone();
            for k in c..n {
                let v = a[c][k].clone() * f.clone();
                a[r][k] = a[r][k].clone() - v;
            }
        }
    }
    true
}

fn denman_beavers(h: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = h.len();
    let mut y = h.to_vec();
    let mut z: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _ in 0..100 {
        let yi = inverse(&y)?;
        let zi = inverse(&z)?;
        let ny: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| 0.5 * (y[i][j] + zi[i][j])).collect()).collect();
        let nz: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| 0.5 * (z[i][j] + yi[i][j])).collect()).collect();
        let delta = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (ny[i][j] - y[i][j]).abs()).fold(0.0, f64::max);
        y = ny;
        z = nz;
        if delta < 1e-15 {
            return Some(y);
        }
    }
    Some(y)
}

fn mat_mul<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>]) -> Vec<Vec<T>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).fold(T::zero(), |acc, k| acc + a[i][k].clone() * b[k][j].clone())).collect())
        .collect()
}

/// Gauss–Jordan inverse with partial pivoting.
fn inverse<T: Scalar>(m: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = m.len();
    let mut a: Vec<Vec<T>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { T::one() } else { T::zero() }));
            row
        })
        .collect();
    for c in 0..n {
        let pivot = (c..n).filter(|&r| !a[r][c].is_zero()).max_by(|&x, &y| {
            a[x][c].abs().partial_cmp(&a[y][c].abs()).unwrap_or(std::cmp::Ordering::Equal)
        })?;
        a.swap(c, pivot);
        let p = a[c][c].clone();
        for v in a[c].iter_mut() {
            *v = v.clone() / p.clone();
        }
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for k in 0..2 * n {
                    let v = a[c][k].clone() * f.clone();
                    a[r][k] = a[r][k].clone() - v;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational as Q;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.iter().copied())
    }

    fn q(p: i64, d: i64) -> Q {
        Q::from_ratio(p, d)
    }

    fn series(n: usize, dz: u32, terms: &[(&[u32], &[u32], Q)]) -> BiSeries<Q> {
        BiSeries::from_terms(n, dz, terms.iter().map(|(s, t, c)| (BiKey::new(mi(s), mi(t)), c.clone())))
    }

    fn fubini_study(dz: u32) -> BiSeries<Q> {
        let terms: Vec<(BiKey, Q)> = (1..=dz / 2)
            .map(|k| {
                let sign = if k % 2 == 1 { 1 } else { -1 };
                (BiKey::new(mi(&[k]), mi(&[k])), q(sign, k as i64))
            })
            .collect();
        BiSeries::from_terms(1, dz, terms)
    }

    #[test]
    fn quartic_term_is_already_normal() {
        let k = series(1, 6, &[(&[1], &[1], q(1, 1)), (&[2], &[2], q(3, 7))]);
        let nf = normalize(&k, 6).unwrap();
        assert!(nf.is_identity_change());
        assert_eq!(nf.normalized_potential, k);
        assert!(nf.gauge.is_zero());
        assert!(verify_gauge(&k, 6).is_empty());
    }

    #[test]
    fn fubini_study_is_already_normal() {
        let k = fubini_study(6);
        let nf = normalize(&k, 6).unwrap();
        assert!(nf.is_identity_change());
        assert_eq!(nf.normalized_potential, series(1, 6, &[(&[1], &[1], q(1, 1)), (&[2], &[2], q(-1, 2)), (&[3], &[3], q(1, 3))]));
        let r = curvature_block(&nf.normalized_potential).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[&(0, 0, 0, 0)], q(-1, 2));
    }

    #[test]
    fn cubic_terms_need_a_quadratic_change() {
        let k = series(1, 5, &[(&[1], &[1], q(1, 1)), (&[2], &[1], q(1, 1)), (&[1], &[2], q(1, 1))]);
        let nf = normalize(&k, 5).unwrap();
        // Solving the single (2,1) equation by hand: z = w + a w² turns z z̄ into
        // w w̄ + a w² w̄ + ..., so a = −1 cancels the (2,1) coefficient.
        let phi = &nf.coordinate_change[0];
        assert_eq!(phi.coeff(&mi(&[1]), &mi(&[0])), q(1, 1));
        assert_eq!(phi.coeff(&mi(&[2]), &mi(&[0])), q(-1, 1));
        let direct = substitute_holomorphic(&k, &nf.coordinate_change, &SymbolInvolution::identity()).unwrap();
        let corrected = direct.add(&nf.gauge).unwrap().add(&nf.gauge.conjugate(&SymbolInvolution::identity())).unwrap();
        assert_eq!(corrected, nf.normalized_potential);
        assert!(verify_gauge(&nf.normalized_potential, 5).is_empty());
        assert!(!verify_gauge(&k, 5).is_empty());
    }

    #[test]
    fn gauge_report_examples() {
        let k = series(1, 4, &[(&[1], &[1], q(1, 1)), (&[3], &[1], q(1, 1))]);
        let report = verify_gauge(&k, 4);
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].key, BiKey::new(mi(&[3]), mi(&[1])));
        assert!(matches!(curvature_block(&k), Err(BochnerError::GaugeViolation(_))));
    }

    #[test]
    fn flat_curvature_block_is_zero() {
        let k = BiSeries::<Q>::flat(2, 4);
        let r = curvature_block(&k).unwrap();
        assert_eq!(r.len(), 16);
        assert!(r.values().all(num::Zero::is_zero));
    }

    #[test]
    fn curvature_block_reassembles_the_quartic_part() {
        let k = series(
            2,
            4,
            &[
                (&[1, 0], &[1, 0], q(1, 1)),
                (&[0, 1], &[0, 1], q(1, 1)),
                (&[1, 1], &[1, 1], q(5, 1)),
                (&[2, 0], &[1, 1], q(3, 1)),
                (&[1, 1], &[2, 0], q(3, 1)),
            ],
        );
        let r = curvature_block(&k).unwrap();
        let mut rebuilt = BiSeries::<Q>::zero(2, 4);
        for (&(i, j, kk, l), v) in &r {
            let s = MultiIndex::unit(2, i).add(&MultiIndex::unit(2, kk));
            let t = MultiIndex::unit(2, j).add(&MultiIndex::unit(2, l));
            rebuilt.add_term(BiKey::new(s, t), v.clone());
        }
        assert_eq!(rebuilt, k.filter(|key| key.s.order() == 2 && key.t.order() == 2));
    }

    #[test]
    fn degenerate_block_is_rejected() {
        let k = series(1, 4, &[(&[2], &[2], q(1, 1))]);
        assert_eq!(normalize(&k, 4).unwrap_err(), BochnerError::NotMetric);
        let k = series(1, 4, &[(&[1], &[1], q(-1, 1))]);
        assert_eq!(normalize(&k, 4).unwrap_err(), BochnerError::NotMetric);
        let k = series(1, 4, &[(&[1], &[1], q(2, 1))]);
        assert_eq!(normalize(&k, 4).unwrap_err(), BochnerError::IrrationalFrame);
        let k = series(1, 4, &[(&[1], &[1], q(1, 1)), (&[2], &[1], q(1, 1))]);
        assert!(matches!(normalize(&k, 4).unwrap_err(), BochnerError::NotReal(_)));
    }

    #[test]
    fn framing_uses_the_positive_square_root() {
        // [[5,4],[4,5]] = X² with X = [[2,1],[1,2]].
        let k = series(
            2,
            4,
            &[
                (&[1, 0], &[1, 0], q(5, 1)),
                (&[0, 1], &[0, 1], q(5, 1)),
                (&[1, 0], &[0, 1], q(4, 1)),
                (&[0, 1], &[1, 0], q(4, 1)),
            ],
        );
        let nf = normalize(&k, 4).unwrap();
        assert_eq!(nf.normalized_potential, BiSeries::flat(2, 4));
        let x = [[q(2, 3), q(-1, 3)], [q(-1, 3), q(2, 3)]];
        for (i, row) in x.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(nf.coordinate_change[i].coeff(&MultiIndex::unit(2, j), &MultiIndex::zeros(2)), *v);
            }
        }
    }

    #[test]
    fn float_scalars_normalize() {
        let k = BiSeries::<f64>::from_terms(
            1,
            4,
            [(BiKey::new(mi(&[1]), mi(&[1])), 2.0), (BiKey::new(mi(&[2]), mi(&[1])), 0.5), (BiKey::new(mi(&[1]), mi(&[2])), 0.5)],
        );
        let nf = normalize(&k, 4).unwrap();
        let report = verify_gauge(&nf.normalized_potential, 4);
        assert!(report.iter().all(|v| (v.value - v.expected).abs() < 1e-12), "{report:?}");
    }

    /// A random real jet whose (1,1) block is the square of a rational symmetric matrix.
    fn random_jet(rng: &mut ChaCha8Rng, n: usize, dz: u32) -> BiSeries<Q> {
        let mut k = BiSeries::<Q>::zero(n, dz);
        let x: Vec<Vec<Q>> = if n == 1 {
            vec![vec![q(rng.gen_range(1..4), rng.gen_range(1..4))]]
        } else {
            let off = q(rng.gen_range(-1..=1), 2);
            let a = q(rng.gen_range(2..5), 1);
            let b = q(rng.gen_range(2..5), 1);
            vec![vec![a, off.clone()], vec![off, b]]
        };
        let h = mat_mul(&x, &x);
        for i in 0..n {
            for j in 0..n {
                k.add_term(BiKey::new(MultiIndex::unit(n, i), MultiIndex::unit(n, j)), h[i][j].clone());
            }
        }
        let mut others: Vec<(BiKey, Q)> = Vec::new();
        for s in crate::multiindex::enumerate_indices(n, dz) {
            for t in crate::multiindex::enumerate_indices(n, dz - s.order()) {
                let key = BiKey::new(s.clone(), t);
                if key.degree() < 2 || (key.s.order() == 1 && key.t.order() == 1) || key.swapped() < key {
                    continue;
                }
                if rng.gen_bool(0.4) {
                    others.push((key, q(rng.gen_range(-3..=3), rng.gen_range(1..4))));
                }
            }
        }
        for (key, c) in others {
            if key.s != key.t {
                k.add_term(key.swapped(), c.clone());
            }
            k.add_term(key, c);
        }
        k
    }

    fn pulled_back_matches(k: &BiSeries<Q>, nf: &NormalForm<Q>) {
        let lhs = hermitian_hessian(&nf.normalized_potential);
        let rhs = pullback_metric(k, &nf.coordinate_change).unwrap();
        let dz = k.dz() - 2;
        for (a, b) in lhs.iter().zip(&rhs) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(x.retruncate(dz), y.retruncate(dz));
            }
        }
    }

    #[test]
    fn random_jets_normalize() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for case in 0..20 {
            let n = 1 + case % 2;
            let k = random_jet(&mut rng, n, 6);
            let nf = normalize(&k, 6).unwrap();
            assert!(verify_gauge(&nf.normalized_potential, 6).is_empty(), "case {case}");
            pulled_back_matches(&k, &nf);
            let again = normalize(&nf.normalized_potential, 6).unwrap();
            assert!(again.is_identity_change(), "case {case}");
            assert_eq!(again.normalized_potential, nf.normalized_potential);
        }
    }

    #[test]
    fn mixed_blocks_vanish_after_normalizing() {
        // Each correction is read off the (d,1) block with unit weight, so one step clears it.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let k = random_jet(&mut rng, 2, 5);
        let nf = normalize(&k, 5).unwrap();
        for d in 2..5 {
            assert!(mixed_block(&nf.normalized_potential, d).iter().all(BiSeries::is_zero));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn normal_form_is_idempotent(seed in 0u64..1000, n in 1usize..=2) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = random_jet(&mut rng, n, 5);
            let nf = normalize(&k, 5).unwrap();
            prop_assert!(verify_gauge(&nf.normalized_potential, 5).is_empty());
            let again = normalize(&nf.normalized_potential, 5).unwrap();
            prop_assert!(again.is_identity_change());
            prop_assert!(again.gauge.is_zero());
            prop_assert_eq!(again.normalized_potential, nf.normalized_potential);
        }
    }
}
