//! Exhaustive sweeps over the identities and the tower.

use std::collections::HashMap;

use rayon::prelude::*;

use super::identities::{
    factorial_expand_multi_sides, factorial_expand_sides, identity_da, identity_da_brute, identity_ea, identity_ec,
    identity_harmonic, identity_harmonic_brute, selector_sum_with, CompositionTable, SlotWeight,
};
use super::tower::{Tower, TowerInput};
use crate::multiindex::{enumerate_box, enumerate_indices, indices_of_order, injections, MultiIndex};
use crate::scalar::Scalar;

/// Outcome of one identity family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepOutcome {
    pub name: &'static str,
    pub cases: usize,
    /// Up to ten mismatching cases, rendered.
    pub mismatches: Vec<String>,
    pub mismatch_count: usize,
}

impl SweepOutcome {
    fn new(name: &'static str) -> Self {
        SweepOutcome { name, cases: 0, mismatches: Vec::new(), mismatch_count: 0 }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.mismatch_count += 1;
            if self.mismatches.len() < 10 {
                self.mismatches.push(describe());
            }
        }
    }

    fn merge(mut self, other: SweepOutcome) -> Self {
        self.cases += other.cases;
        self.mismatch_count += other.mismatch_count;
        for m in other.mismatches {
            if self.mismatches.len() < 10 {
                self.mismatches.push(m);
            }
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.mismatch_count == 0
    }
}

/// Bounds of the identity sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentitySweep {
    /// Largest `|L|`.
    pub max_order: u32,
    /// Largest length of `L`.
    pub max_length: usize,
    /// Largest `Σ|A_k|`.
    pub max_selector_order: u32,
    /// Largest number of selectors `r`.
    pub max_selectors: usize,
    /// Largest `p`, `q` in the factorial expansions.
    pub max_pq: u32,
    /// Flip the sign of one closed-form value to confirm the sweep notices.
    pub inject_fault: bool,
}

impl Default for IdentitySweep {
    fn default() -> Self {
        IdentitySweep { max_order: 6, max_length: 3, max_selector_order: 4, max_selectors: 3, max_pq: 5, inject_fault: false }
    }
}

fn selector_lists(length: usize, max_order: u32, max_count: usize) -> Vec<Vec<MultiIndex>> {
    let singles: Vec<MultiIndex> = enumerate_indices(length, max_order).filter(|a| !a.is_zero()).collect();
    let mut out: Vec<Vec<MultiIndex>> = Vec::new();
    let mut frontier: Vec<(Vec<MultiIndex>, u32)> = vec![(Vec::new(), 0)];
    for _ in 0..max_count {
        let mut next = Vec::new();
        for (list, used) in &frontier {
            for a in &singles {
                if used + a.order() <= max_order {
                    let mut l = list.clone();
                    l.push(a.clone());
                    next.push((l, used + a.order()));
                }
            }
        }
        out.extend(next.iter().map(|(l, _)| l.clone()));
        frontier = next;
    }
    out
}

fn nonzero_indices(max_length: usize, max_order: u32) -> Vec<MultiIndex> {
    (1..=max_length).flat_map(|len| enumerate_indices(len, max_order).filter(|l| !l.is_zero())).collect()
}

/// Compare every closed form with its companion over the configured grid.
pub fn run_identity_sweep<T: Scalar>(config: &IdentitySweep) -> Vec<SweepOutcome> {
    let ls = nonzero_indices(config.max_length, config.max_order);

    let mut da = SweepOutcome::new("composition sum (-1)^l/L!");
    let mut harmonic = SweepOutcome::new("logarithmic composition sum");
    for l in &ls {
        let (c, b) = (identity_da::<T>(l).unwrap(), identity_da_brute::<T>(l).unwrap());
        da.record(c == b, || format!("L={l}: closed {c}, enumerated {b}"));
        let (c, b) = (identity_harmonic::<T>(l).unwrap(), identity_harmonic_brute::<T>(l).unwrap());
        harmonic.record(c == b, || format!("L={l}: closed {c}, enumerated {b}"));
    }

    let mut lists_by_length: HashMap<usize, Vec<Vec<MultiIndex>>> = HashMap::new();
    for len in 1..=config.max_length {
        lists_by_length.insert(len, selector_lists(len, config.max_selector_order, config.max_selectors));
    }
    let fault = config.inject_fault;
    let (ec, ea) = ls
        .par_iter()
        .enumerate()
        .map(|(index, l)| {
            let table = CompositionTable::new(l);
            let mut inj: HashMap<(usize, usize), Vec<Vec<usize>>> = HashMap::new();
            let mut ec = SweepOutcome::new("falling-factorial selectors, alternating weight");
            let mut ea = SweepOutcome::new("falling-factorial selectors, logarithmic weight");
            for (k, sel) in lists_by_length[&l.len()].iter().enumerate() {
                let mut selector = |comp: &crate::multiindex::Composition| {
                    if sel.len() > comp.len() {
                        return 0;
                    }
                    let js = inj.entry((sel.len(), comp.len())).or_insert_with(|| injections(sel.len(), comp.len()));
                    selector_sum_with(comp, sel, js)
                };
                let brute_ec: T = table.sum(SlotWeight::Alternating, &mut selector);
                let brute_ea: T = table.sum(SlotWeight::Logarithmic, &mut selector);
                let mut closed_ec = identity_ec::<T>(l, sel).unwrap();
                if fault && index == 0 && k == 0 {
                    closed_ec = if closed_ec.is_zero() { T::one() } else { -closed_ec };
                }
                let closed_ea = identity_ea::<T>(l, sel).unwrap();
                let render = || sel.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
                ec.record(closed_ec == brute_ec, || format!("L={l} A=[{}]: closed {closed_ec}, enumerated {brute_ec}", render()));
                ea.record(closed_ea == brute_ea, || format!("L={l} A=[{}]: closed {closed_ea}, enumerated {brute_ea}", render()));
            }
            (ec, ea)
        })
        .reduce(
            || {
                (
                    SweepOutcome::new("falling-factorial selectors, alternating weight"),
                    SweepOutcome::new("falling-factorial selectors, logarithmic weight"),
                )
            },
            |a, b| (a.0.merge(b.0), a.1.merge(b.1)),
        );

    let mut single = SweepOutcome::new("falling-factorial shift, one variable");
    for p in 0..=config.max_pq {
        for q in 0..=config.max_pq {
            for s in 0..=p + q + 2 {
                let (lhs, rhs) = factorial_expand_sides::<T>(p, q, s);
                single.record(lhs == rhs, || format!("p={p} q={q} s={s}: {lhs} vs {rhs}"));
            }
        }
    }
    let mut multi = SweepOutcome::new("falling-factorial shift, multi-index");
    let pairs = enumerate_indices(2, config.max_pq).collect::<Vec<_>>();
    for p in &pairs {
        for q in &pairs {
            let upper = MultiIndex::new((0..2).map(|k| p.get(k) + q.get(k) + 2));
            for s in crate::multiindex::enumerate_box(&upper) {
                let (lhs, rhs) = factorial_expand_multi_sides::<T>(p, q, &s).unwrap();
                multi.record(lhs == rhs, || format!("P={p} Q={q} S={s}: {lhs} vs {rhs}"));
            }
        }
    }
    vec![da, harmonic, ec, ea, single, multi]
}

/// Every perturbation exponent set with `r ≤ max_r`, `n ≤ max_n` and
/// `min_order ≤ |P^i|, |Q^i| ≤ max_order`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExponentGrid {
    pub max_n: usize,
    pub max_r: usize,
    pub min_order: u32,
    pub max_order: u32,
}

impl ExponentGrid {
    pub fn inputs(&self) -> Vec<TowerInput> {
        let mut out = Vec::new();
        for n in 1..=self.max_n {
            let singles: Vec<MultiIndex> =
                (self.min_order..=self.max_order).flat_map(|o| indices_of_order(n, o)).collect();
            let pairs: Vec<(MultiIndex, MultiIndex)> =
                singles.iter().flat_map(|p| singles.iter().map(move |q| (p.clone(), q.clone()))).collect();
            let mut frontier: Vec<Vec<(MultiIndex, MultiIndex)>> = vec![Vec::new()];
            for _ in 0..self.max_r {
                let mut next = Vec::new();
                for list in &frontier {
                    for pair in &pairs {
                        let mut l = list.clone();
                        l.push(pair.clone());
                        next.push(l);
                    }
                }
                for list in &next {
                    let (p, q) = list.iter().cloned().unzip();
                    out.push(TowerInput { n, p, q });
                }
                frontier = next;
            }
        }
        out
    }
}

/// Result of a tower-wide check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerCheck {
    pub inputs: usize,
    pub evaluations: usize,
    pub violations: Vec<String>,
    pub violation_count: usize,
}

impl TowerCheck {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }

    fn combine(parts: Vec<(usize, Vec<String>, usize)>) -> Self {
        let inputs = parts.len();
        let evaluations = parts.iter().map(|p| p.0).sum();
        let violation_count = parts.iter().map(|p| p.2).sum();
        let violations = parts.into_iter().flat_map(|p| p.1).take(10).collect();
        TowerCheck { inputs, evaluations, violations, violation_count }
    }
}

fn describe(input: &TowerInput) -> String {
    let terms: Vec<String> = input.p.iter().zip(&input.q).map(|(p, q)| format!("{p}|{q}")).collect();
    format!("n={} [{}]", input.n, terms.join(" "))
}

/// `D_{e_j}(L) = 0` for every `j`, every grid input and every `0 < |L| ≤ max_l`.
pub fn first_order_vanishing(grid: &ExponentGrid, max_l: u32) -> TowerCheck {
    let parts = grid
        .inputs()
        .into_par_iter()
        .map(|input| {
            let mut tower = Tower::new(input.clone());
            let (mut count, mut bad, mut found) = (0, 0, Vec::new());
            for l in enumerate_indices(input.r(), max_l).filter(|l| !l.is_zero()) {
                for j in 0..input.n {
                    count += 1;
                    let v = tower.d_int(&MultiIndex::unit(input.n, j), &l);
                    if v != 0 {
                        bad += 1;
                        if found.len() < 10 {
                            found.push(format!("{} L={l} j={j}: D = {v}", describe(&input)));
                        }
                    }
                }
            }
            (count, found, bad)
        })
        .collect();
    TowerCheck::combine(parts)
}

/// `F_I[L] = 0` for every `|I| = order` and `order < |L| ≤ x_degree`.
pub fn f_degree_check(grid: &ExponentGrid, order: u32, x_degree: u32) -> TowerCheck {
    let parts = grid
        .inputs()
        .into_par_iter()
        .map(|input| {
            let mut tower = Tower::new(input.clone());
            let (mut count, mut bad, mut found) = (0, 0, Vec::new());
            for i in indices_of_order(input.n, order) {
                for l in enumerate_indices(input.r(), x_degree).filter(|l| l.order() > order) {
                    count += 1;
                    let v: num::BigRational = tower.f(&i, &l);
                    if !num::Zero::is_zero(&v) {
                        bad += 1;
                        if found.len() < 10 {
                            found.push(format!("{} I={i} L={l}: F = {v}", describe(&input)));
                        }
                    }
                }
            }
            (count, found, bad)
        })
        .collect();
    TowerCheck::combine(parts)
}

/// Total degree of `D_A` as a function of `L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeCheck {
    pub check: TowerCheck,
    /// Largest Newton degree observed (`None` if `D_A` vanished on every sample).
    pub max_degree: Option<u32>,
}

fn binomial_i128(n: u32, k: u32) -> i128 {
    (0..k).fold(1i128, |acc, j| acc * (n - j) as i128 / (j + 1) as i128)
}

/// Forward difference `Δ^α f(0)` from the values of `f` on the simplex below `α`.
fn forward_difference(alpha: &MultiIndex, values: &HashMap<MultiIndex, i128>) -> i128 {
    enumerate_box(alpha)
        .into_iter()
        .map(|beta| {
            let weight: i128 =
                alpha.entries().iter().zip(beta.entries()).map(|(&a, &b)| binomial_i128(a, b)).product();
            let sign = if (alpha.order() - beta.order()) % 2 == 0 { 1 } else { -1 };
            sign * weight * values[&beta]
        })
        .sum()
}

/// Highest `|α|` with a nonzero Newton coefficient among samples on `|α| ≤ top`.
fn newton_degree(r: usize, top: u32, values: &HashMap<MultiIndex, i128>) -> Option<u32> {
    enumerate_indices(r, top).filter(|alpha| forward_difference(alpha, values) != 0).map(|alpha| alpha.order()).max()
}

/// `deg_L D_A ≤ 2a` for every `|A| = a`. `D_A` is sampled at `L = e_0 + α` for
/// `|α| ≤ 2a+1` and every Newton coefficient of order above `2a` must vanish.
pub fn d_degree_check(grid: &ExponentGrid, a: u32) -> DegreeCheck {
    let top = 2 * a + 1;
    let parts: Vec<(usize, Vec<String>, usize, Option<u32>)> = grid
        .inputs()
        .into_par_iter()
        .map(|input| {
            let mut tower = Tower::new(input.clone());
            let r = input.r();
            let base = MultiIndex::unit(r, 0);
            let (mut count, mut bad, mut found, mut max_degree) = (0, 0, Vec::new(), None);
            for sel in indices_of_order(input.n, a) {
                let values: HashMap<MultiIndex, i128> =
                    enumerate_indices(r, top).map(|alpha| (alpha.clone(), tower.d_int(&sel, &base.add(&alpha)))).collect();
                count += 1;
                let degree = newton_degree(r, top, &values);
                max_degree = max_degree.max(degree);
                if degree.is_some_and(|d| d > 2 * a) {
                    bad += 1;
                    if found.len() < 10 {
                        found.push(format!("{} A={sel}: degree {}", describe(&input), degree.unwrap_or(0)));
                    }
                }
            }
            (count, found, bad, max_degree)
        })
        .collect();
    let max_degree = parts.iter().filter_map(|p| p.3).max();
    DegreeCheck { check: TowerCheck::combine(parts.into_iter().map(|p| (p.0, p.1, p.2)).collect()), max_degree }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational as Q;

    #[test]
    fn small_identity_sweep() {
        let config = IdentitySweep { max_order: 3, max_length: 2, max_selector_order: 2, max_selectors: 2, max_pq: 2, inject_fault: false };
        let outcomes = run_identity_sweep::<Q>(&config);
        assert!(outcomes.iter().all(SweepOutcome::passed), "{outcomes:?}");
        assert!(outcomes.iter().all(|o| o.cases > 0));
    }

    #[test]
    fn injected_fault_is_reported() {
        let config = IdentitySweep { max_order: 2, max_length: 1, max_selector_order: 1, max_selectors: 1, max_pq: 1, inject_fault: true };
        let outcomes = run_identity_sweep::<Q>(&config);
        let failed: Vec<_> = outcomes.iter().filter(|o| !o.passed()).collect();
        assert_eq!(failed.len(), 1);
        assert_eq!(failed[0].mismatch_count, 1);
    }

    #[test]
    fn selector_list_counts() {
        assert_eq!(selector_lists(1, 2, 2).len(), 2 + 1);
        assert_eq!(selector_lists(2, 1, 2).len(), 2 + 0);
    }

    #[test]
    fn newton_degrees() {
        let sample = |f: &dyn Fn(i128, i128) -> i128| -> HashMap<MultiIndex, i128> {
            enumerate_indices(2, 4).map(|a| (a.clone(), f(a.get(0) as i128, a.get(1) as i128))).collect()
        };
        assert_eq!(newton_degree(2, 4, &sample(&|_, _| 0)), None);
        assert_eq!(newton_degree(2, 4, &sample(&|_, _| 5)), Some(0));
        assert_eq!(newton_degree(2, 4, &sample(&|x, y| x * y * y - 3 * x)), Some(3));
    }

    #[test]
    fn small_tower_checks() {
        let grid = ExponentGrid { max_n: 1, max_r: 2, min_order: 2, max_order: 3 };
        assert_eq!(grid.inputs().len(), 4 + 16);
        assert!(first_order_vanishing(&grid, 3).passed());
        assert!(f_degree_check(&grid, 1, 3).passed());
        let degree = d_degree_check(&grid, 2);
        assert!(degree.check.passed(), "{:?}", degree.check.violations);
    }
}
