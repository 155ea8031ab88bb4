//! Exact expansions of Bergman potentials near a point.
//!
//! The pipeline expands `K_m = (1/m) log Σ |S_i|²` for a potential
//! `K = |z|² + Σ c z^P z̄^Q` as a series in `z`, `z̄`, the perturbation symbols
//! and `μ = m^{1/2}`, and checks that the μ-free part reproduces `K` while every
//! positive power of μ cancels. Companion modules give the closed-form
//! combinatorial route to the same series, normal coordinates for arbitrary
//! potential jets and numeric CP¹ models.
//!
//! Everything is generic over [`scalar::Scalar`]; the aliases below fix exact
//! rationals, which is what the checks are meant to run with.

pub mod bergman;
pub mod bochner;
pub mod combinatorics;
pub mod models;
pub mod multiindex;
pub mod scalar;
pub mod series;

pub type Rational = num::BigRational;
pub type CPolyQ = series::CPoly<Rational>;
pub type MGradedQ = series::MGraded<Rational>;
pub type BiSeriesQ = series::BiSeries<MGradedQ>;
pub type ScalarSeriesQ = series::BiSeries<Rational>;
pub type PotentialSpecQ = bergman::PotentialSpec<Rational>;
