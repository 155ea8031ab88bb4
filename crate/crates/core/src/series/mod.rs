//! The coefficient tower `scalars → CPoly → MGraded` and truncated series in `(z, z̄)`.

mod biseries;
mod cpoly;
mod mgraded;
mod ops;

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num::rational::Ratio;
use num::{BigRational, One, Zero};
use thiserror::Error;

pub use biseries::{BiKey, BiSeries};
pub use cpoly::{CPoly, Monomial};
pub use mgraded::{MGraded, MU_EXPONENT_LIMIT};
pub use ops::{
    det_series, exp_series, hermitian_hessian, log1p_series, partial, substitute_holomorphic, Variable,
};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("truncation mismatch: D_z = {left} vs {right}")]
    TruncationMismatch { left: u32, right: u32 },
    #[error("series has a nonzero constant term")]
    NonZeroConstant,
    #[error("matrix is not square or has the wrong size")]
    BadMatrix,
    #[error("determinant supports n ≤ 4, got {0}")]
    TooLarge(usize),
    #[error("substitution needs {expected} component series, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("component {0} of the substitution is not holomorphic with zero constant term")]
    NotHolomorphic(usize),
    #[error("linear part of the substitution is not a scalar matrix")]
    NonScalarJacobian,
    #[error("Jacobian of the substitution is singular at the origin")]
    SingularJacobian,
}

/// Action of complex conjugation on perturbation symbols.
///
/// Symbol `i` is sent to `image[i]`; symbols past the table are fixed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolInvolution {
    image: Vec<usize>,
}

impl SymbolInvolution {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Build from unordered conjugate pairs over `count` symbols.
    pub fn from_pairs(count: usize, pairs: &[(usize, usize)]) -> Self {
        let mut image: Vec<usize> = (0..count).collect();
        for &(a, b) in pairs {
            image[a] = b;
            image[b] = a;
        }
        SymbolInvolution { image }
    }

    pub fn apply(&self, i: usize) -> usize {
        self.image.get(i).copied().unwrap_or(i)
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &j)| i == j)
    }
}

/// A commutative ring usable as series coefficients.
pub trait Coefficient:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
{
    type Scalar: Scalar;

    fn from_scalar(v: Self::Scalar) -> Self;

    fn scale(&self, v: &Self::Scalar) -> Self;

    fn mul_ref(&self, other: &Self) -> Self;

    fn add_assign_ref(&mut self, other: &Self);

    fn conjugate(&self, inv: &SymbolInvolution) -> Self;

    /// The value if `self` is a plain scalar (no symbols, no μ-weight).
    fn as_scalar(&self) -> Option<Self::Scalar>;

    fn sub_ref(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign_ref(&-other.clone());
        out
    }
}

macro_rules! scalar_coefficient {
    ($($t:ty),*) => {$(
        impl Coefficient for $t {
            type Scalar = $t;

            fn from_scalar(v: Self) -> Self {
                v
            }

            fn scale(&self, v: &Self) -> Self {
                self.clone() * v.clone()
            }

            fn mul_ref(&self, other: &Self) -> Self {
                self.clone() * other.clone()
            }

            fn add_assign_ref(&mut self, other: &Self) {
                *self = self.clone() + other.clone();
            }

            fn conjugate(&self, _: &SymbolInvolution) -> Self {
                self.clone()
            }

            fn as_scalar(&self) -> Option<Self> {
                Some(self.clone())
            }
        }
    )*};
}

scalar_coefficient!(BigRational, Ratio<i64>, Ratio<i128>, f64, f32);
