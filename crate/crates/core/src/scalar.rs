//! Scalar field abstraction.
//!
//! Everything symbolic in the crate is generic over [`Scalar`]. Exact rationals
//! are the intended instance; `f64`/`f32` are accepted for quick numeric runs,
//! where equality tests become bitwise and therefore fragile.

use std::fmt::{Debug, Display};

use num::bigint::BigInt;
use num::rational::Ratio;
use num::{BigRational, FromPrimitive, Integer, Num, Signed, ToPrimitive};

/// A field usable as series coefficients.
///
/// Scalars are treated as real numbers: complex conjugation acts trivially on
/// them and only permutes perturbation symbols.
pub trait Scalar:
    Clone + Debug + Display + PartialEq + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// `true` for exact arithmetic.
    const EXACT: bool;

    /// Square root if it exists in the field (always for floats, perfect squares for rationals).
    fn exact_sqrt(&self) -> Option<Self>;

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer fits the scalar type")
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }

    /// Lossy conversion used by numeric cross-checks.
    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `n!` computed in the field.
    fn factorial(n: u32) -> Self {
        let mut acc = Self::one();
        for k in 2..=n {
            acc = acc * Self::from_int(k as i64);
        }
        acc
    }
}

fn int_sqrt<I: Integer + Clone + Signed + num::integer::Roots>(v: &I) -> Option<I> {
    if v.is_negative() {
        return None;
    }
    let r = v.sqrt();
    if r.clone() * r.clone() == *v {
        Some(r)
    } else {
        None
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn exact_sqrt(&self) -> Option<Self> {
        let n = int_sqrt::<BigInt>(self.numer())?;
        let d = int_sqrt::<BigInt>(self.denom())?;
        Some(Ratio::new(n, d))
    }

    fn from_int(v: i64) -> Self {
        Ratio::from_integer(BigInt::from(v))
    }
}

impl Scalar for Ratio<i64> {
    const EXACT: bool = true;

    fn exact_sqrt(&self) -> Option<Self> {
        let n = int_sqrt(self.numer())?;
        let d = int_sqrt(self.denom())?;
        Some(Ratio::new(n, d))
    }
}

impl Scalar for Ratio<i128> {
    const EXACT: bool = true;

    fn exact_sqrt(&self) -> Option<Self> {
        let n = int_sqrt(self.numer())?;
        let d = int_sqrt(self.denom())?;
        Some(Ratio::new(n, d))
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn exact_sqrt(&self) -> Option<Self> {
        (*self >= 0.0).then(|| self.sqrt())
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn exact_sqrt(&self) -> Option<Self> {
        (*self >= 0.0).then(|| self.sqrt())
    }
}

/// Parse `"p"`, `"p/q"` or (for floats) a decimal literal.
pub fn parse_scalar<T: Scalar>(text: &str) -> Option<T> {
    let text = text.trim();
    match text.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().ok()?;
            let q: i64 = q.trim().parse().ok()?;
            (q != 0).then(|| T::from_ratio(p, q))
        }
        None => match text.parse::<i64>() {
            Ok(v) => Some(T::from_int(v)),
            Err(_) if !T::EXACT => text.parse::<f64>().ok().and_then(T::from_f64),
            Err(_) => None,
        },
    }
}

/// Determinant by Gaussian elimination over the field.
pub fn determinant<T: Scalar>(matrix: &[Vec<T>]) -> T {
    let n = matrix.len();
    let mut a: Vec<Vec<T>> = matrix.to_vec();
    let mut det = T::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return T::zero();
        };
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det = det * p.clone();
        for row in col + 1..n {
            if a[row][col].is_zero() {
                continue;
            }
            let f = a[row][col].clone() / p.clone();
            for k in col..n {
                let v = a[col][k].clone() * f.clone();
                a[row][k] = a[row][k].clone() - v;
            }
        }
    }
    det
}

/// Integer determinant via cofactor expansion (tiny matrices only).
pub fn int_determinant(matrix: &[Vec<i64>]) -> i64 {
    match matrix.len() {
        0 => 1,
        1 => matrix[0][0],
        n => (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> = matrix[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, v)| *v).collect())
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * matrix[0][j] * int_determinant(&minor)
            })
            .sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::Zero;

    type Q = BigRational;

    #[test]
    fn rational_sqrt() {
        assert_eq!(Q::from_ratio(9, 4).exact_sqrt(), Some(Q::from_ratio(3, 2)));
        assert_eq!(Q::from_int(2).exact_sqrt(), None);
        assert_eq!(Q::from_int(-4).exact_sqrt(), None);
    }

    #[test]
    fn parse() {
        assert_eq!(parse_scalar::<Q>("-3/6"), Some(Q::from_ratio(-1, 2)));
        assert_eq!(parse_scalar::<Q>("7"), Some(Q::from_int(7)));
        assert_eq!(parse_scalar::<Q>("0.5"), None);
        assert_eq!(parse_scalar::<f64>("0.5"), Some(0.5));
        assert_eq!(parse_scalar::<Q>("1/0"), None);
    }

    #[test]
    fn determinants() {
        let m = vec![vec![Q::from_int(2), Q::from_int(1)], vec![Q::from_int(4), Q::from_int(3)]];
        assert_eq!(determinant(&m), Q::from_int(2));
        assert_eq!(int_determinant(&[vec![2, 1], vec![4, 3]]), 2);
        assert_eq!(int_determinant(&[]), 1);
        let sing = vec![vec![Q::from_int(1), Q::from_int(2)], vec![Q::from_int(2), Q::from_int(4)]];
        assert!(determinant(&sing).is_zero());
    }

    #[test]
    fn factorials() {
        assert_eq!(Q::factorial(0), Q::from_int(1));
        assert_eq!(Q::factorial(5), Q::from_int(120));
        assert_eq!(f64::factorial(4), 24.0);
    }
}
