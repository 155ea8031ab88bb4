//! Input records for the expansion pipelines.

use thiserror::Error;

use crate::multiindex::{MultiIndex, MAX_DIMENSION};
use crate::scalar::Scalar;
use crate::series::{BiKey, BiSeries, CPoly, MGraded, SeriesError, SymbolInvolution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("dimension must be between 1 and {MAX_DIMENSION}, got {0}")]
    Dimension(usize),
    #[error("perturbation {index}: exponent length does not match dimension {n}")]
    ExponentLength { index: usize, n: usize },
    #[error("perturbation {index}: both |P| and |Q| must be at least 2")]
    LowDegree { index: usize },
    #[error("section order D_p = {dp} is below D_z = {dz}")]
    SectionOrder { dp: u32, dz: u32 },
    #[error("conjugate pair ({0}, {1}) does not reference two perturbations")]
    PairIndex(usize, usize),
    #[error("conjugate pair ({0}, {1}) does not have swapped exponents")]
    PairExponents(usize, usize),
    #[error("conjugate pair ({0}, {1}) mixes values that are not equal")]
    PairValues(usize, usize),
    #[error("perturbation {0} is listed in more than one conjugate pair")]
    PairReuse(usize),
    #[error("symbol name `{0}` is used twice")]
    DuplicateSymbol(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// A perturbation coefficient: a free symbol or a fixed value.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientValue<T> {
    Symbol(String),
    Value(T),
}

/// One term `c · z^P z̄^Q` of the potential.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation<T> {
    pub p: MultiIndex,
    pub q: MultiIndex,
    pub value: CoefficientValue<T>,
}

impl<T> Perturbation<T> {
    pub fn symbolic(p: impl Into<MultiIndex>, q: impl Into<MultiIndex>, name: &str) -> Self {
        Perturbation { p: p.into(), q: q.into(), value: CoefficientValue::Symbol(name.to_string()) }
    }

    pub fn valued(p: impl Into<MultiIndex>, q: impl Into<MultiIndex>, v: T) -> Self {
        Perturbation { p: p.into(), q: q.into(), value: CoefficientValue::Value(v) }
    }
}

/// `K = |z|² + Σ_i c_i z^{P^i} z̄^{Q^i}` together with the truncation orders.
///
/// Every perturbation is carried as its own symbol internally (so that the
/// c-degree truncation stays meaningful); fixed values are substituted only
/// in the final outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec<T> {
    pub n: usize,
    pub perturbations: Vec<Perturbation<T>>,
    /// Pairs of perturbation positions exchanged by complex conjugation.
    pub conjugate_pairs: Vec<(usize, usize)>,
    /// Total z-degree kept in `K_m`.
    pub dz: u32,
    /// Total degree in the perturbation symbols.
    pub dc: u32,
    /// Largest section order; `None` selects [`PotentialSpec::default_section_order`].
    pub dp: Option<u32>,
}

impl<T: Scalar> PotentialSpec<T> {
    pub fn flat(n: usize, dz: u32, dc: u32) -> Self {
        PotentialSpec { n, perturbations: Vec::new(), conjugate_pairs: Vec::new(), dz, dc, dp: None }
    }

    pub fn with_perturbation(mut self, p: Perturbation<T>) -> Self {
        self.perturbations.push(p);
        self
    }

    pub fn with_pair(mut self, a: usize, b: usize) -> Self {
        self.conjugate_pairs.push((a, b));
        self
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if self.n == 0 || self.n > MAX_DIMENSION {
            return Err(SpecError::Dimension(self.n));
        }
        let mut names = std::collections::HashSet::new();
        for (index, pert) in self.perturbations.iter().enumerate() {
            if pert.p.len() != self.n || pert.q.len() != self.n {
                return Err(SpecError::ExponentLength { index, n: self.n });
            }
            if pert.p.order() < 2 || pert.q.order() < 2 {
                return Err(SpecError::LowDegree { index });
            }
            if let CoefficientValue::Symbol(name) = &pert.value {
                if !names.insert(name.clone()) {
                    return Err(SpecError::DuplicateSymbol(name.clone()));
                }
            }
        }
        let dp = self.section_order();
        if dp < self.dz {
            return Err(SpecError::SectionOrder { dp, dz: self.dz });
        }
        let mut used = std::collections::HashSet::new();
        for &(a, b) in &self.conjugate_pairs {
            let r = self.perturbations.len();
            if a >= r || b >= r || a == b {
                return Err(SpecError::PairIndex(a, b));
            }
            for i in [a, b] {
                if !used.insert(i) {
                    return Err(SpecError::PairReuse(i));
                }
            }
            let (x, y) = (&self.perturbations[a], &self.perturbations[b]);
            if x.p != y.q || x.q != y.p {
                return Err(SpecError::PairExponents(a, b));
            }
            match (&x.value, &y.value) {
                (CoefficientValue::Value(u), CoefficientValue::Value(v)) if u != v => {
                    return Err(SpecError::PairValues(a, b))
                }
                (CoefficientValue::Value(_), CoefficientValue::Symbol(_))
                | (CoefficientValue::Symbol(_), CoefficientValue::Value(_)) => return Err(SpecError::PairValues(a, b)),
                _ => {}
            }
        }
        Ok(())
    }

    /// Number of perturbation symbols `r`.
    pub fn symbol_count(&self) -> usize {
        self.perturbations.len()
    }

    /// `max_i (|P^i| + |Q^i|)`, or 0 without perturbations.
    pub fn max_total_degree(&self) -> u32 {
        self.perturbations.iter().map(|p| p.p.order() + p.q.order()).max().unwrap_or(0)
    }

    /// `D_z + D_c · max(p + q)`.
    pub fn default_section_order(&self) -> u32 {
        self.dz + self.dc * self.max_total_degree()
    }

    pub fn section_order(&self) -> u32 {
        self.dp.unwrap_or_else(|| self.default_section_order())
    }

    /// z-degree needed for the density: every term of c-degree ≤ D_c fits.
    pub fn density_order(&self) -> u32 {
        self.dc * self.max_total_degree()
    }

    /// Bound on |μ-exponent| of the output potential.
    pub fn mu_exponent_cap(&self) -> i32 {
        (2 * self.dz + 2 * self.dc * self.max_total_degree()) as i32
    }

    pub fn involution(&self) -> SymbolInvolution {
        SymbolInvolution::from_pairs(self.symbol_count(), &self.conjugate_pairs)
    }

    /// Display names: given symbol names, `c{i}` placeholders for fixed values.
    pub fn symbol_names(&self) -> Vec<String> {
        self.perturbations
            .iter()
            .enumerate()
            .map(|(i, p)| match &p.value {
                CoefficientValue::Symbol(s) => s.clone(),
                CoefficientValue::Value(_) => format!("c{}", i + 1),
            })
            .collect()
    }

    pub fn symbol_values(&self) -> Vec<Option<T>> {
        self.perturbations
            .iter()
            .map(|p| match &p.value {
                CoefficientValue::Value(v) => Some(v.clone()),
                CoefficientValue::Symbol(_) => None,
            })
            .collect()
    }

    /// The internal symbol of perturbation `i`.
    pub fn symbol(&self, i: usize) -> CPoly<T> {
        CPoly::symbol(i, Some(self.dc))
    }

    pub fn exponents(&self) -> (Vec<MultiIndex>, Vec<MultiIndex>) {
        (self.perturbations.iter().map(|p| p.p.clone()).collect(), self.perturbations.iter().map(|p| p.q.clone()).collect())
    }

    /// `K − |z|²` with symbolic coefficients.
    pub fn perturbation_series(&self, dz: u32) -> BiSeries<MGraded<T>> {
        let mut out = BiSeries::zero(self.n, dz);
        for (i, p) in self.perturbations.iter().enumerate() {
            out.add_term(BiKey::new(p.p.clone(), p.q.clone()), MGraded::from_cpoly(self.symbol(i)));
        }
        out
    }

    /// `K` with symbolic coefficients.
    pub fn potential(&self, dz: u32) -> BiSeries<MGraded<T>> {
        let mut k = BiSeries::flat(self.n, dz);
        k.accumulate(&self.perturbation_series(dz));
        k
    }

    /// Substitute the fixed perturbation values.
    pub fn evaluate(&self, series: &BiSeries<MGraded<T>>) -> BiSeries<MGraded<T>> {
        let values = self.symbol_values();
        if values.iter().all(Option::is_none) {
            return series.clone();
        }
        series.map(|c| c.evaluate(&values))
    }
}
