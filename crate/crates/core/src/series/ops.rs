//! exp/log, derivatives, determinants and holomorphic substitution on [`BiSeries`].

use std::collections::HashMap;

use num::Zero;

use super::{BiKey, BiSeries, Coefficient, SeriesError, SymbolInvolution};
use crate::multiindex::MultiIndex;
use crate::scalar::{determinant, Scalar};

/// A coordinate to differentiate by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    /// `∂/∂z^i`
    Holomorphic(usize),
    /// `∂/∂z̄^i`
    Antiholomorphic(usize),
}

/// `Σ_{k≥0} a^k/k!`, for `a` without constant term.
pub fn exp_series<C: Coefficient>(a: &BiSeries<C>) -> Result<BiSeries<C>, SeriesError> {
    if !a.constant_term().is_zero() {
        return Err(SeriesError::NonZeroConstant);
    }
    let mut result = BiSeries::one(a.n(), a.dz());
    let mut term = result.clone();
    let mut k = 1i64;
    loop {
        term = term.product(a).scale(&C::Scalar::from_ratio(1, k));
        if term.is_zero() {
            return Ok(result);
        }
        result.accumulate(&term);
        k += 1;
    }
}

/// `Σ_{k≥1} (−1)^{k−1} a^k/k`, for `a` without constant term.
pub fn log1p_series<C: Coefficient>(a: &BiSeries<C>) -> Result<BiSeries<C>, SeriesError> {
    if !a.constant_term().is_zero() {
        return Err(SeriesError::NonZeroConstant);
    }
    let mut result = BiSeries::zero(a.n(), a.dz());
    let mut power = a.clone();
    let mut k = 1i64;
    while !power.is_zero() {
        let sign = if k % 2 == 1 { 1 } else { -1 };
        result.accumulate(&power.scale(&C::Scalar::from_ratio(sign, k)));
        power = power.product(a);
        k += 1;
    }
    Ok(result)
}

/// Formal partial derivative.
pub fn partial<C: Coefficient>(a: &BiSeries<C>, var: Variable) -> BiSeries<C> {
    let mut out = BiSeries::zero(a.n(), a.dz());
    for (k, c) in a.iter() {
        let (s, t, e) = match var {
            Variable::Holomorphic(i) => {
                let e = k.s.get(i);
                if e == 0 {
                    continue;
                }
                let mut s = k.s.clone();
                s.set(i, e - 1);
                (s, k.t.clone(), e)
            }
            Variable::Antiholomorphic(i) => {
                let e = k.t.get(i);
                if e == 0 {
                    continue;
                }
                let mut t = k.t.clone();
                t.set(i, e - 1);
                (k.s.clone(), t, e)
            }
        };
        out.add_term(BiKey::new(s, t), c.scale(&C::Scalar::from_int(e as i64)));
    }
    out
}

/// The matrix `∂_{z^i} ∂_{z̄^j} K`.
pub fn hermitian_hessian<C: Coefficient>(k: &BiSeries<C>) -> Vec<Vec<BiSeries<C>>> {
    let n = k.n();
    (0..n)
        .map(|i| {
            let di = partial(k, Variable::Holomorphic(i));
            (0..n).map(|j| partial(&di, Variable::Antiholomorphic(j))).collect()
        })
        .collect()
}

/// Determinant of a square matrix of series by cofactor expansion.
pub fn det_series<C: Coefficient>(m: &[Vec<BiSeries<C>>]) -> Result<BiSeries<C>, SeriesError> {
    let n = m.len();
    if n > 4 {
        return Err(SeriesError::TooLarge(n));
    }
    if n == 0 || m.iter().any(|row| row.len() != n) {
        return Err(SeriesError::BadMatrix);
    }
    let (dim, dz) = (m[0][0].n(), m[0][0].dz());
    for row in m {
        for e in row {
            if e.n() != dim {
                return Err(SeriesError::DimensionMismatch { left: dim, right: e.n() });
            }
            if e.dz() != dz {
                return Err(SeriesError::TruncationMismatch { left: dz, right: e.dz() });
            }
        }
    }
    Ok(cofactor(m))
}

fn cofactor<C: Coefficient>(m: &[Vec<BiSeries<C>>]) -> BiSeries<C> {
    if m.len() == 1 {
        return m[0][0].clone();
    }
    let mut out = BiSeries::zero(m[0][0].n(), m[0][0].dz());
    for j in 0..m.len() {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<BiSeries<C>>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, e)| e.clone()).collect())
            .collect();
        let term = m[0][j].product(&cofactor(&minor));
        if j % 2 == 0 {
            out.accumulate(&term);
        } else {
            out.accumulate(&term.neg());
        }
    }
    out
}

/// Replace `z^i` by `φ^i(w)` and `z̄^i` by the conjugate series.
pub fn substitute_holomorphic<C: Coefficient>(
    a: &BiSeries<C>,
    phi: &[BiSeries<C>],
    inv: &SymbolInvolution,
) -> Result<BiSeries<C>, SeriesError> {
    let n = a.n();
    if phi.len() != n {
        return Err(SeriesError::WrongArity { expected: n, got: phi.len() });
    }
    let zero = MultiIndex::zeros(n);
    let mut jac = vec![vec![C::Scalar::zero(); n]; n];
    for (i, f) in phi.iter().enumerate() {
        if f.n() != n {
            return Err(SeriesError::DimensionMismatch { left: n, right: f.n() });
        }
        if !f.is_holomorphic() || !f.constant_term().is_zero() {
            return Err(SeriesError::NotHolomorphic(i));
        }
        for (j, entry) in jac[i].iter_mut().enumerate() {
            *entry = f.coeff(&MultiIndex::unit(n, j), &zero).as_scalar().ok_or(SeriesError::NonScalarJacobian)?;
        }
    }
    if determinant(&jac).is_zero() {
        return Err(SeriesError::SingularJacobian);
    }
    let holo: Vec<BiSeries<C>> = phi.iter().map(|f| f.retruncate(a.dz())).collect();
    let anti: Vec<BiSeries<C>> = holo.iter().map(|f| f.conjugate(inv)).collect();
    let mut memo: HashMap<BiKey, BiSeries<C>> = HashMap::new();
    let mut out = BiSeries::zero(n, a.dz());
    for (k, c) in a.iter() {
        let m = monomial_image(k, &holo, &anti, &mut memo);
        out.accumulate(&m.mul_coeff(c));
    }
    Ok(out)
}

fn monomial_image<C: Coefficient>(
    key: &BiKey,
    holo: &[BiSeries<C>],
    anti: &[BiSeries<C>],
    memo: &mut HashMap<BiKey, BiSeries<C>>,
) -> BiSeries<C> {
    if let Some(v) = memo.get(key) {
        return v.clone();
    }
    let value = if let Some(i) = key.s.support().next() {
        let mut s = key.s.clone();
        s.set(i, s.get(i) - 1);
        monomial_image(&BiKey::new(s, key.t.clone()), holo, anti, memo).product(&holo[i])
    } else if let Some(j) = key.t.support().next() {
        let mut t = key.t.clone();
        t.set(j, t.get(j) - 1);
        monomial_image(&BiKey::new(key.s.clone(), t), holo, anti, memo).product(&anti[j])
    } else {
        BiSeries::one(holo[0].n(), holo[0].dz())
    };
    memo.insert(key.clone(), value.clone());
    value
}

impl<C: Coefficient> BiSeries<C> {
    /// Coordinate series `z^i` as a holomorphic series.
    pub fn coordinate(n: usize, dz: u32, i: usize) -> Self {
        BiSeries::monomial(n, dz, MultiIndex::unit(n, i), MultiIndex::zeros(n), C::one())
    }

    /// The identity coordinate change.
    pub fn identity_map(n: usize, dz: u32) -> Vec<Self> {
        (0..n).map(|i| Self::coordinate(n, dz, i)).collect()
    }
}
