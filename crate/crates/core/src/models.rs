//! Rotation-invariant metrics on CP¹ used as end-to-end checks.
//!
//! With `t = |z|²` and a radial potential `ψ(t)`, the monomials `z^k` are
//! orthogonal for the weight `e^{−mψ} ω`, `ω = (tψ')' dt`, so the Bergman
//! potential is `(1/m) log Σ_k t^k / N_k` with `N_k = ∫_0^∞ t^k e^{−mψ} (tψ')' dt`.
//! The common factor π is dropped; it cancels in every ratio used here.

use num::bigint::BigInt;
use num::{BigRational, Float, One, Signed, ToPrimitive, Zero};

use crate::bergman::{bergman_potential, Perturbation, PotentialError, PotentialSpec};
use crate::multiindex::MultiIndex;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("metric density is not positive at t = {0}")]
    NonPositiveMetric(f64),
    #[error("quadrature did not settle below {tolerance} with {nodes} nodes (last change {change})")]
    QuadratureFailed { nodes: usize, tolerance: f64, change: f64 },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

/// Radial potential `ψ(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `log(1 + t)`.
    FubiniStudy,
    /// `log(1 + t) + ε t² e^{−t}`.
    Perturbed { epsilon: BigRational },
}

impl Profile {
    fn epsilon<F: Float>(&self) -> F {
        match self {
            Profile::FubiniStudy => F::zero(),
            Profile::Perturbed { epsilon } => F::from(epsilon.to_f64().unwrap_or(f64::NAN)).unwrap(),
        }
    }

    pub fn psi<F: Float>(&self, t: F) -> F {
        t.ln_1p() + self.epsilon::<F>() * t * t * (-t).exp()
    }

    fn bump_factor<F: Float>(&self, t: F) -> F {
        let eps = self.epsilon::<F>();
        if eps.is_zero() {
            F::zero()
        } else {
            eps * (-t).exp()
        }
    }

    /// The metric `g(t) = (tψ')'`, written without the cancellation in `ψ' + tψ''`.
    pub fn metric<F: Float>(&self, t: F) -> F {
        let c = |v: f64| F::from(v).unwrap();
        let u = F::one() + t;
        F::one() / (u * u) + self.bump_factor(t) * t * (c(4.0) - c(5.0) * t + t * t)
    }

    /// `dg/dt`.
    pub fn metric_slope<F: Float>(&self, t: F) -> F {
        let c = |v: f64| F::from(v).unwrap();
        let u = F::one() + t;
        c(-2.0) / (u * u * u) + self.bump_factor(t) * (c(4.0) - c(14.0) * t + c(8.0) * t * t - t * t * t)
    }

    /// Taylor coefficients `a_k` of `ψ(t) = Σ a_k t^k` for `k = 1..=max`.
    pub fn taylor(&self, max: u32) -> Vec<BigRational> {
        let eps = match self {
            Profile::FubiniStudy => BigRational::zero(),
            Profile::Perturbed { epsilon } => epsilon.clone(),
        };
        (1..=max)
            .map(|k| {
                let sign = if k % 2 == 1 { 1 } else { -1 };
                let log_part = BigRational::from_ratio(sign, k as i64);
                if k < 2 {
                    return log_part;
                }
                let bump = eps.clone() * BigRational::from_int(-sign) / BigRational::factorial(k - 2);
                log_part + bump
            })
            .collect()
    }
}

/// Quadrature settings for the radial integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    /// Nodes at the first level (at least 64).
    pub initial_nodes: usize,
    /// Stop once successive levels agree to this relative accuracy.
    pub tolerance: f64,
    pub max_nodes: usize,
    /// Nodes lie in `x ∈ [−w, w]`, `t = e^{π sinh x}`.
    pub half_width: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { initial_nodes: 64, tolerance: 1e-12, max_nodes: 1 << 16, half_width: 3.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialMetricSpec {
    pub profile: Profile,
    pub quadrature: Quadrature,
}

impl RadialMetricSpec {
    pub fn fubini_study() -> Self {
        RadialMetricSpec { profile: Profile::FubiniStudy, quadrature: Quadrature::default() }
    }

    pub fn perturbed(epsilon: BigRational) -> Self {
        RadialMetricSpec { profile: Profile::Perturbed { epsilon }, quadrature: Quadrature::default() }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let q = &self.quadrature;
        if q.initial_nodes < 64 {
            return Err(ModelError::Invalid(format!("at least 64 quadrature nodes required, got {}", q.initial_nodes)));
        }
        if !(q.tolerance > 0.0 && q.half_width > 0.0) || q.max_nodes < q.initial_nodes {
            return Err(ModelError::Invalid("quadrature settings out of range".into()));
        }
        Ok(())
    }
}

/// `∫_0^∞ exp(log_f(ln t)) dt` by the trapezoid rule in `x` after `t = e^{π sinh x}`.
///
/// This is the tanh-sinh rule on `(0,1)` composed with `t = u/(1−u)`.
pub fn double_exponential<F: Float>(log_f: impl Fn(F) -> F, nodes: usize, half_width: F) -> F {
    let pi = F::from(std::f64::consts::PI).unwrap();
    let h = (half_width + half_width) / F::from(nodes - 1).unwrap();
    let mut sum = F::zero();
    for j in 0..nodes {
        let x = -half_width + h * F::from(j).unwrap();
        let lt = pi * x.sinh();
        sum = sum + (log_f(lt) + lt + (pi * x.cosh()).ln()).exp();
    }
    sum * h
}

/// Norms `N_k`, `k = 0..=m`, with the achieved relative accuracy and node count.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionNorms {
    pub m: u32,
    pub norms: Vec<f64>,
    pub error_estimate: f64,
    pub nodes: usize,
}

pub fn section_norms(spec: &RadialMetricSpec, m: u32) -> Result<SectionNorms, ModelError> {
    spec.validate()?;
    let q = &spec.quadrature;
    let profile = &spec.profile;
    let pi = std::f64::consts::PI;
    let mut nodes = q.initial_nodes;
    // Positivity on the finest grid implies positivity on the coarser ones.
    let check = |nodes: usize| -> Result<(), ModelError> {
        let h = 2.0 * q.half_width / (nodes - 1) as f64;
        for j in 0..nodes {
            let t = (pi * (-q.half_width + h * j as f64).sinh()).exp();
            if profile.metric(t) <= 0.0 && t.is_finite() && t > 0.0 {
                return Err(ModelError::NonPositiveMetric(t));
            }
        }
        Ok(())
    };
    let level = |nodes: usize| -> Vec<f64> {
        (0..=m)
            .map(|k| {
                let log_f = |lt: f64| {
                    let t = lt.exp();
                    k as f64 * lt - m as f64 * profile.psi(t) + profile.metric(t).ln()
                };
                double_exponential(log_f, nodes, q.half_width)
            })
            .collect()
    };
    check(nodes)?;
    let mut prev = level(nodes);
    loop {
        let next_nodes = 2 * nodes - 1;
        if next_nodes > q.max_nodes {
            let change = relative_change(&prev, &level(nodes));
            return Err(ModelError::QuadratureFailed { nodes, tolerance: q.tolerance, change });
        }
        check(next_nodes)?;
        let next = level(next_nodes);
        let change = relative_change(&prev, &next);
        nodes = next_nodes;
        if change < q.tolerance {
            return Ok(SectionNorms { m, norms: next, error_estimate: change, nodes });
        }
        prev = next;
    }
}

fn relative_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| ((x - y) / y).abs()).fold(0.0, f64::max)
}

/// `g_m(t)` and `dg_m/dt` from section norms.
pub fn bergman_metric(norms: &[f64], m: u32, t: f64) -> (f64, f64) {
    let m = m as f64;
    if t == 0.0 {
        // log B = log c₀ + a t + b t² + …
        let (c0, c1) = (1.0 / norms[0], 1.0 / norms[1]);
        let c2 = norms.get(2).map_or(0.0, |v| 1.0 / v);
        let a = c1 / c0;
        let b = c2 / c0 - a * a / 2.0;
        return (a / m, 4.0 * b / m);
    }
    // Cumulants of k under the weights t^k / N_k.
    let lt = t.ln();
    let logs: Vec<f64> = norms.iter().enumerate().map(|(k, n)| k as f64 * lt - n.ln()).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = w.iter().sum();
    let mean = w.iter().enumerate().map(|(k, v)| k as f64 * v).sum::<f64>() / total;
    let central = |p: i32| w.iter().enumerate().map(|(k, v)| (k as f64 - mean).powi(p) * v).sum::<f64>() / total;
    let var = central(2);
    let third = central(3);
    (var / (m * t), (third - var) / (m * t * t))
}

/// `t = 0, 0.1, …, 4`.
pub fn default_samples() -> Vec<f64> {
    (0..=40).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePoint {
    pub t: f64,
    pub metric: f64,
    pub bergman: f64,
    pub error: f64,
    pub slope_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub m: u32,
    pub max_error: f64,
    pub worst_t: f64,
    pub max_slope_error: f64,
    pub quadrature_error: f64,
    pub nodes: usize,
    pub samples: Vec<SamplePoint>,
}

pub fn cp1_perturbed_bergman(spec: &RadialMetricSpec, m: u32, samples: &[f64]) -> Result<ConvergenceRecord, ModelError> {
    if m < 2 {
        return Err(ModelError::Invalid(format!("m must be at least 2, got {m}")));
    }
    if let Some(&t) = samples.iter().find(|&&t| !(t >= 0.0 && t.is_finite())) {
        return Err(ModelError::Invalid(format!("sample point {t} is not a finite non-negative number")));
    }
    let norms = section_norms(spec, m)?;
    let mut points = Vec::with_capacity(samples.len());
    for &t in samples {
        let g = spec.profile.metric(t);
        if g <= 0.0 {
            return Err(ModelError::NonPositiveMetric(t));
        }
        let (gm, dgm) = bergman_metric(&norms.norms, m, t);
        points.push(SamplePoint {
            t,
            metric: g,
            bergman: gm,
            error: (gm - g).abs(),
            slope_error: (dgm - spec.profile.metric_slope(t)).abs(),
        });
    }
    let worst = points.iter().max_by(|a, b| a.error.total_cmp(&b.error));
    Ok(ConvergenceRecord {
        m,
        max_error: worst.map_or(0.0, |p| p.error),
        worst_t: worst.map_or(0.0, |p| p.t),
        max_slope_error: points.iter().map(|p| p.slope_error).fold(0.0, f64::max),
        quadrature_error: norms.error_estimate,
        nodes: norms.nodes,
        samples: points,
    })
}

/// Exact Fubini–Study data for one `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct FubiniStudyRecord {
    pub m: u32,
    /// `N_k = k!(m−k)!/(m+1)!`.
    pub norms: Vec<BigRational>,
    /// `Σ_k t^k/N_k ÷ (1+t)^m` at each sample; all equal `m+1` when balanced.
    pub kernel_ratios: Vec<(BigRational, BigRational)>,
    /// `g_m − g` at each sample.
    pub metric_defects: Vec<(BigRational, BigRational)>,
    /// `K_m − K = log(m+1)/m`.
    pub potential_offset: f64,
}

impl FubiniStudyRecord {
    /// `K_m − K` is constant and `g_m = g` at every sample.
    pub fn balanced(&self) -> bool {
        let target = BigRational::from_int(self.m as i64 + 1);
        self.kernel_ratios.iter().all(|(_, r)| *r == target) && self.metric_defects.iter().all(|(_, d)| d.is_zero())
    }

    pub fn max_defect(&self) -> BigRational {
        self.metric_defects.iter().map(|(_, d)| d.abs()).max().unwrap_or_else(BigRational::zero)
    }
}

/// `t = i/10`, `i = 0..=40`, as exact rationals.
pub fn rational_samples() -> Vec<BigRational> {
    (0..=40).map(|i| BigRational::from_ratio(i, 10)).collect()
}

pub fn cp1_fs_bergman(m: u32) -> Result<FubiniStudyRecord, ModelError> {
    if m < 1 {
        return Err(ModelError::Invalid("m must be at least 1".into()));
    }
    let norms: Vec<BigRational> = (0..=m)
        .map(|k| BigRational::factorial(k) * BigRational::factorial(m - k) / BigRational::factorial(m + 1))
        .collect();
    let coeffs: Vec<BigRational> = norms.iter().map(|n| BigRational::one() / n).collect();
    let mut kernel_ratios = Vec::new();
    let mut metric_defects = Vec::new();
    for t in rational_samples() {
        let (b, b1, b2) = polynomial_jet(&coeffs, &t);
        let one_t = BigRational::one() + t.clone();
        kernel_ratios.push((t.clone(), b.clone() / pow(&one_t, m)));
        let mf = BigRational::from_int(m as i64);
        let gm = ((b1.clone() + t.clone() * b2) / b.clone() - t.clone() * b1.clone() * b1 / (b.clone() * b)) / mf;
        let g = BigRational::one() / (one_t.clone() * one_t);
        metric_defects.push((t, gm - g));
    }
    Ok(FubiniStudyRecord {
        m,
        norms,
        kernel_ratios,
        metric_defects,
        potential_offset: ((m + 1) as f64).ln() / m as f64,
    })
}

fn pow(x: &BigRational, e: u32) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * x.clone())
}

/// `(p(t), p'(t), p''(t))` for `p = Σ c_k t^k`.
fn polynomial_jet(c: &[BigRational], t: &BigRational) -> (BigRational, BigRational, BigRational) {
    let mut p = BigRational::zero();
    let mut d1 = BigRational::zero();
    let mut d2 = BigRational::zero();
    for k in (0..c.len()).rev() {
        d2 = d2 * t.clone() + d1.clone() * BigRational::from_int(2);
        d1 = d1 * t.clone() + p.clone();
        p = p * t.clone() + c[k].clone();
    }
    (p, d1, d2)
}

/// Symbolic prediction of `g_m(0) − g(0)` against the quadrature value.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossModalRecord {
    /// `(μ-exponent, value)` of the `z z̄` coefficient for exponents −8..−1.
    ///
    /// Lower exponents depend on the c-degree truncation and are left out.
    pub residues: Vec<(i32, BigRational)>,
    /// `(m, predicted, numeric, numeric / predicted)`.
    pub rows: Vec<(u32, f64, f64, f64)>,
    /// Allowed ratio window `[1/f, f]`.
    pub factor: f64,
}

impl CrossModalRecord {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|&(_, _, _, r)| r >= 1.0 / self.factor && r <= self.factor)
    }
}

/// Expand the local jet `|z|² + Σ_{k=2}^{5} a_k |z|^{2k}` of the profile
/// (D_z = 2, D_c = 4) and compare the predicted `g_m(0) − g(0)` with quadrature.
pub fn cross_modal_check(spec: &RadialMetricSpec, m_list: &[u32]) -> Result<CrossModalRecord, ModelError> {
    let taylor = spec.profile.taylor(5);
    let mut jet = PotentialSpec::<BigRational>::flat(1, 2, 4);
    for (k, a) in taylor.iter().enumerate().skip(1) {
        let e = k as u32 + 1;
        jet = jet.with_perturbation(Perturbation::valued([e], [e], a.clone()));
    }
    let km = bergman_potential(&jet)?;
    let one = MultiIndex::new([1]);
    let coeff = km.coeff(&one, &one);
    let residues: Vec<(i32, BigRational)> =
        coeff.terms().filter(|(e, _)| (-8..0).contains(e)).map(|(e, p)| (e, p.constant_term())).collect();
    let mut rows = Vec::new();
    for &m in m_list {
        let predicted: f64 = residues.iter().map(|(e, v)| v.approx() * (m as f64).powf(*e as f64 / 2.0)).sum();
        let norms = section_norms(spec, m)?;
        let numeric = bergman_metric(&norms.norms, m, 0.0).0 - spec.profile.metric(0.0);
        rows.push((m, predicted, numeric, numeric / predicted));
    }
    Ok(CrossModalRecord { residues, rows, factor: 2.0 })
}

/// `(m+1) C(m,k)` summed against `t^k` equals `(m+1)(1+t)^m`, as integer coefficients.
pub fn fs_binomial_identity(m: u32) -> bool {
    let mut row = vec![BigInt::one()];
    for _ in 0..m {
        let mut next = vec![BigInt::one(); row.len() + 1];
        for k in 1..row.len() {
            next[k] = &row[k - 1] + &row[k];
        }
        row = next;
    }
    let fact = |k: u32| (1..=k).fold(BigInt::one(), |a, i| a * BigInt::from(i));
    (0..=m).all(|k| {
        let n_k = BigRational::new(fact(k) * fact(m - k), fact(m + 1));
        BigRational::one() / n_k == BigRational::from_integer(BigInt::from(m + 1) * &row[k as usize])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tenth() -> BigRational {
        BigRational::from_ratio(1, 10)
    }

    #[test]
    fn beta_integrals_match_quadrature() {
        let exact = cp1_fs_bergman(10).unwrap();
        let numeric = section_norms(&RadialMetricSpec::fubini_study(), 10).unwrap();
        for (a, b) in exact.norms.iter().zip(&numeric.norms) {
            assert!((a.approx() - b).abs() <= 1e-12 * a.approx(), "{a} vs {b}");
        }
        assert!(numeric.nodes >= 64);
    }

    #[test]
    fn fubini_study_is_balanced() {
        for m in [1, 2, 10, 50] {
            let rec = cp1_fs_bergman(m).unwrap();
            assert!(rec.balanced(), "m = {m}");
            assert!(fs_binomial_identity(m));
        }
        assert!((cp1_fs_bergman(1).unwrap().potential_offset - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn unperturbed_numeric_model_is_exact() {
        let rec = cp1_perturbed_bergman(&RadialMetricSpec::fubini_study(), 16, &default_samples()).unwrap();
        assert!(rec.max_error < 1e-12, "{}", rec.max_error);
        assert!(rec.max_slope_error < 1e-10, "{}", rec.max_slope_error);
    }

    #[test]
    fn perturbed_errors_halve() {
        let spec = RadialMetricSpec::perturbed(tenth());
        let errs: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&m| cp1_perturbed_bergman(&spec, m, &default_samples()).unwrap().max_error)
            .collect();
        // Reference values from an independent 40-digit quadrature.
        for (got, want) in errs.iter().zip([0.032780611, 0.020631746, 0.011787887]) {
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
        for w in errs.windows(2) {
            let r = w[1] / w[0];
            assert!((0.3..=0.8).contains(&r), "{r}");
        }
    }

    #[test]
    fn metric_at_origin_matches_series() {
        let spec = RadialMetricSpec::perturbed(tenth());
        let norms = section_norms(&spec, 32).unwrap();
        let (g0, _) = bergman_metric(&norms.norms, 32, 0.0);
        let (g_small, _) = bergman_metric(&norms.norms, 32, 1e-6);
        assert!((g0 - g_small).abs() < 1e-5);
    }

    #[test]
    fn taylor_coefficients() {
        let a = Profile::Perturbed { epsilon: tenth() }.taylor(4);
        assert_eq!(a[0], BigRational::one());
        assert_eq!(a[1], BigRational::from_ratio(-1, 2) + tenth());
        assert_eq!(a[2], BigRational::from_ratio(1, 3) - tenth());
        assert_eq!(a[3], BigRational::from_ratio(-1, 4) + tenth() / BigRational::from_int(2));
    }

    #[test]
    fn symbolic_jet_predicts_the_origin_error() {
        let rec = cross_modal_check(&RadialMetricSpec::perturbed(tenth()), &[64, 128]).unwrap();
        // Leading coefficients of the z z̄ entry, from an independent exact expansion.
        let q = BigRational::from_ratio;
        assert_eq!(rec.residues, vec![(-8, q(1707, 125)), (-6, q(1044, 125)), (-4, q(-9, 25))]);
        assert!(rec.passed(), "{:?}", rec.rows);
    }

    #[test]
    fn negative_density_is_rejected() {
        let spec = RadialMetricSpec::perturbed(BigRational::from_int(3));
        assert!(matches!(section_norms(&spec, 8), Err(ModelError::NonPositiveMetric(_))));
        let mut few = RadialMetricSpec::fubini_study();
        few.quadrature.initial_nodes = 32;
        assert!(matches!(section_norms(&few, 8), Err(ModelError::Invalid(_))));
    }
}
