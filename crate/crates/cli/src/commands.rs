//! The four subcommands. Each returns the rendered document plus a verdict.

use bergcheck::bergman::{
    bergman_potential_from_inverse, convergence_report_from, gram_inverse, gram_matrix, stability_check,
};
use bergcheck::bochner::{normalize, verify_gauge, BochnerError};
use bergcheck::combinatorics::{bergman_potential_combinatorial, run_identity_sweep, IdentitySweep};
use bergcheck::models::{
    cp1_fs_bergman, cp1_perturbed_bergman, cross_modal_check, default_samples, RadialMetricSpec,
};
use bergcheck::series::BiKey;
use bergcheck::Rational;
use serde_json::{json, Value};
use thiserror::Error;

use crate::render;
use crate::specfile::{SpecFile, Truncation};

#[derive(Debug, Error)]
pub enum Failure {
    /// Bad flags or a bad spec file.
    #[error("{0}")]
    Input(String),
    /// A computation that could not be carried out.
    #[error("{0}")]
    Compute(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Compute(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A rendered report. `problems` is empty when every check held; `notes`
/// go to stderr.
pub struct Report {
    pub body: String,
    pub problems: Vec<String>,
    pub notes: Vec<String>,
}

fn json_body(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn csv_body(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn verify_identities(max_order: Option<u32>, inject_fault: bool, format: Format) -> Report {
    let mut config = IdentitySweep { inject_fault, ..IdentitySweep::default() };
    if let Some(order) = max_order {
        config.max_order = order;
        config.max_selector_order = config.max_selector_order.min(order);
    }
    let outcomes = run_identity_sweep::<Rational>(&config);
    let problems = outcomes
        .iter()
        .filter(|o| !o.passed())
        .map(|o| format!("{}: {} mismatches, first: {}", o.name, o.mismatch_count, o.mismatches[0]))
        .collect();
    let body = match format {
        Format::Json => json_body(&json!({
            "max_order": config.max_order,
            "max_length": config.max_length,
            "max_selector_order": config.max_selector_order,
            "max_selectors": config.max_selectors,
            "max_pq": config.max_pq,
            "total_cases": outcomes.iter().map(|o| o.cases).sum::<usize>(),
            "passed": outcomes.iter().all(|o| o.passed()),
            "identities": outcomes.iter().map(|o| json!({
                "name": o.name,
                "cases": o.cases,
                "mismatches": o.mismatch_count,
                "examples": o.mismatches,
            })).collect::<Vec<_>>(),
        })),
        Format::Csv => csv_body(
            &["identity", "cases", "mismatches"],
            outcomes.iter().map(|o| vec![o.name.to_string(), o.cases.to_string(), o.mismatch_count.to_string()]).collect(),
        ),
    };
    Report { body, problems, notes: Vec::new() }
}

pub fn bergman_expand(file: &SpecFile, cli: Truncation, cross_check: bool, format: Format) -> Result<Report, Failure> {
    let spec = file.potential_spec(cli).map_err(|e| Failure::Input(e.to_string()))?;
    let compute = |e: &dyn std::fmt::Display| Failure::Compute(e.to_string());
    let h = gram_inverse(&gram_matrix(&spec).map_err(|e| compute(&e))?).map_err(|e| compute(&e))?;
    let symbolic = bergman_potential_from_inverse(&spec, &h).map_err(|e| compute(&e))?;
    let report = convergence_report_from(&spec, &symbolic);
    let km = spec.evaluate(&symbolic);
    let unstable = stability_check(&spec).map_err(|e| compute(&e))?;
    let names = spec.symbol_names();

    let mut problems: Vec<String> =
        report.failures().map(|v| format!("coefficient of {} does not converge", v.key)).collect();
    if report.max_abs_exponent > report.mu_exponent_cap {
        problems.push(format!("μ-exponent {} exceeds the cap {}", report.max_abs_exponent, report.mu_exponent_cap));
    }
    problems.extend(unstable.iter().map(|k| format!("coefficient of {k} changes when D_p grows")));

    let cross = if cross_check {
        let other = bergman_potential_combinatorial(&spec).map_err(|e| compute(&e))?;
        let mut keys: Vec<&BiKey> = km.keys().chain(other.keys()).collect();
        keys.sort();
        keys.dedup();
        let differing: Vec<&BiKey> = keys.into_iter().filter(|k| km.get(k) != other.get(k)).collect();
        problems.extend(differing.iter().map(|k| format!("combinatorial route differs at {k}")));
        Some((km.len(), differing.len()))
    } else {
        None
    };

    let body = match format {
        Format::Json => {
            let coefficients: Vec<Value> = km
                .iter()
                .map(|(k, c)| {
                    let (s, t) = render::key(k);
                    json!({
                        "s": s,
                        "t": t,
                        "stable": !unstable.contains(k),
                        "terms": c.terms().map(|(e, p)| json!({
                            "mu_exponent": e,
                            "coefficient": render::poly(p, &names),
                        })).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let verdicts: Vec<Value> = report
                .verdicts
                .iter()
                .map(|v| {
                    let (s, t) = render::key(&v.key);
                    json!({
                        "s": s,
                        "t": t,
                        "pass": v.pass(),
                        "positive_part": v.positive.terms().map(|(e, p)| json!({
                            "mu_exponent": e,
                            "coefficient": render::poly(p, &names),
                        })).collect::<Vec<_>>(),
                        "constant_mismatch": render::poly(&v.constant_mismatch, &names),
                        "leading_decay": v.leading_residue.as_ref().map(|(e, p)| json!({
                            "mu_exponent": e,
                            "coefficient": render::poly(p, &names),
                        })),
                    })
                })
                .collect();
            let mut doc = json!({
                "n": spec.n,
                "dz": spec.dz,
                "dc": spec.dc,
                "dp": spec.section_order(),
                "symbols": names,
                "passed": problems.is_empty(),
                "max_abs_mu_exponent": report.max_abs_exponent,
                "mu_exponent_cap": report.mu_exponent_cap,
                "unstable": unstable.iter().map(|k| { let (s, t) = render::key(k); json!({ "s": s, "t": t }) }).collect::<Vec<_>>(),
                "coefficients": coefficients,
                "verdicts": verdicts,
            });
            if let Some((compared, differing)) = cross {
                doc["cross_check"] = json!({ "keys": compared, "differing": differing, "equal": differing == 0 });
            }
            json_body(&doc)
        }
        Format::Csv => {
            let verdict_of = |k: &BiKey| {
                report.verdicts.iter().find(|v| &v.key == k).map_or("", |v| if v.pass() { "PASS" } else { "FAIL" })
            };
            let mut rows = Vec::new();
            for (k, c) in km.iter() {
                let stable = if unstable.contains(k) { "unstable" } else { "stable" };
                for (e, p) in c.terms() {
                    for (m, v) in p.terms() {
                        rows.push(vec![
                            render::index_label(&k.s),
                            render::index_label(&k.t),
                            e.to_string(),
                            render::monomial(m, &names),
                            render::rational(v),
                            verdict_of(k).to_string(),
                            stable.to_string(),
                        ]);
                    }
                }
            }
            // Failing keys whose coefficient vanished entirely still get a row.
            for v in report.failures().filter(|v| km.get(&v.key).is_none()) {
                rows.push(vec![
                    render::index_label(&v.key.s),
                    render::index_label(&v.key.t),
                    "0".into(),
                    "1".into(),
                    "0/1".into(),
                    "FAIL".into(),
                    "stable".into(),
                ]);
            }
            csv_body(&["s", "t", "mu_exponent", "monomial", "value", "verdict", "stability"], rows)
        }
    };
    let notes = cross
        .map(|(compared, differing)| vec![format!("cross-check: {compared} keys compared, {differing} differ")])
        .unwrap_or_default();
    Ok(Report { body, problems, notes })
}

pub fn bochner(file: &SpecFile, cli: Truncation, format: Format) -> Result<Report, Failure> {
    let k = file.jet(cli).map_err(|e| Failure::Input(e.to_string()))?;
    let up_to = k.dz();
    let normal = normalize(&k, up_to).map_err(|e| match e {
        BochnerError::NotReal(_) | BochnerError::NotMetric | BochnerError::IrrationalFrame => {
            Failure::Input(e.to_string())
        }
        other => Failure::Compute(other.to_string()),
    })?;
    let violations = verify_gauge(&normal.normalized_potential, up_to);
    let problems =
        violations.iter().map(|v| format!("coefficient of {} is {} instead of {}", v.key, render::rational(&v.value), render::rational(&v.expected))).collect();
    let body = match format {
        Format::Json => json_body(&json!({
            "n": k.n(),
            "up_to": up_to,
            "identity_change": normal.is_identity_change(),
            "coordinate_change": normal.coordinate_change.iter().map(render::scalar_series).collect::<Vec<_>>(),
            "gauge": render::scalar_series(&normal.gauge),
            "normalized_potential": render::scalar_series(&normal.normalized_potential),
            "gauge_violations": violations.iter().map(|v| {
                let (s, t) = render::key(&v.key);
                json!({ "s": s, "t": t, "value": render::rational(&v.value), "expected": render::rational(&v.expected) })
            }).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut rows = Vec::new();
            let mut push = |section: String, series: &bergcheck::ScalarSeriesQ| {
                for (key, v) in series.iter() {
                    rows.push(vec![section.clone(), render::index_label(&key.s), render::index_label(&key.t), render::rational(v)]);
                }
            };
            for (i, z) in normal.coordinate_change.iter().enumerate() {
                push(format!("z{}", i + 1), z);
            }
            push("gauge".into(), &normal.gauge);
            push("normalized".into(), &normal.normalized_potential);
            for v in &violations {
                rows.push(vec!["violation".into(), render::index_label(&v.key.s), render::index_label(&v.key.t), render::rational(&v.value)]);
            }
            csv_body(&["section", "s", "t", "value"], rows)
        }
    };
    Ok(Report { body, problems, notes: Vec::new() })
}

/// `16,32,64`, `1..20` or a mix such as `2..4,8`; sorted and deduplicated.
pub fn parse_m_list(text: &str) -> Result<Vec<u32>, Failure> {
    let bad = |part: &str| Failure::Input(format!("--m-list: `{part}` is not a positive integer or range a..b"));
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u32 = a.trim().parse().map_err(|_| bad(part))?;
            let b: u32 = b.trim().parse().map_err(|_| bad(part))?;
            if a == 0 || a > b {
                return Err(bad(part));
            }
            out.extend(a..=b);
        } else {
            let m: u32 = part.parse().map_err(|_| bad(part))?;
            if m == 0 {
                return Err(bad(part));
            }
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(Failure::Input("--m-list is empty".into()));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

struct Cp1Row {
    m: u32,
    error: String,
    ratio: String,
    quadrature_error: String,
}

pub fn cp1(file: &SpecFile, m_list: &[u32], cross_check: bool, format: Format) -> Result<Report, Failure> {
    let spec: RadialMetricSpec = file.radial_spec().map_err(|e| Failure::Input(e.to_string()))?;
    let mut rows = Vec::new();
    let mut problems = Vec::new();
    if file.is_fubini_study() {
        for &m in m_list {
            let rec = cp1_fs_bergman(m).map_err(|e| Failure::Compute(e.to_string()))?;
            if !rec.balanced() {
                problems.push(format!("m = {m}: Fubini-Study metric is not balanced"));
            }
            rows.push(Cp1Row { m, error: render::rational(&rec.max_defect()), ratio: String::new(), quadrature_error: "0/1".into() });
        }
    } else {
        if let Some(&m) = m_list.iter().find(|&&m| m < 2) {
            return Err(Failure::Input(format!("--m-list: the perturbed model needs m ≥ 2, got {m}")));
        }
        let samples = default_samples();
        let mut previous: Option<f64> = None;
        for &m in m_list {
            let rec = cp1_perturbed_bergman(&spec, m, &samples).map_err(|e| Failure::Compute(e.to_string()))?;
            let ratio = previous.map_or(String::new(), |p| render::float(rec.max_error / p));
            if previous.is_some_and(|p| rec.max_error >= p) {
                problems.push(format!("m = {m}: error {} does not decrease", render::float(rec.max_error)));
            }
            previous = Some(rec.max_error);
            rows.push(Cp1Row { m, error: render::float(rec.max_error), ratio, quadrature_error: render::float(rec.quadrature_error) });
        }
    }
    let cross = if cross_check && !file.is_fubini_study() {
        let rec = cross_modal_check(&spec, m_list).map_err(|e| Failure::Compute(e.to_string()))?;
        if !rec.passed() {
            problems.push("local expansion and quadrature disagree beyond the allowed factor".into());
        }
        Some(rec)
    } else {
        None
    };
    let mut notes = Vec::new();
    let body = match format {
        Format::Json => {
            let mut doc = json!({
                "model": if file.is_fubini_study() { "fubini_study" } else { "perturbed" },
                "rows": rows.iter().map(|r| json!({
                    "m": r.m,
                    "max_error": r.error,
                    "ratio": if r.ratio.is_empty() { Value::Null } else { json!(r.ratio) },
                    "quadrature_error": r.quadrature_error,
                })).collect::<Vec<_>>(),
            });
            if let Some(rec) = &cross {
                doc["cross_check"] = json!({
                    "residues": rec.residues.iter().map(|(e, v)| json!({ "mu_exponent": e, "value": render::rational(v) })).collect::<Vec<_>>(),
                    "rows": rec.rows.iter().map(|&(m, predicted, numeric, ratio)| json!({
                        "m": m,
                        "predicted": render::float(predicted),
                        "numeric": render::float(numeric),
                        "ratio": render::float(ratio),
                    })).collect::<Vec<_>>(),
                    "passed": rec.passed(),
                });
            }
            json_body(&doc)
        }
        Format::Csv => {
            if let Some(rec) = &cross {
                for &(m, p, q, r) in &rec.rows {
                    notes.push(format!(
                        "cross-check m = {m}: predicted {} numeric {} ratio {}",
                        render::float(p),
                        render::float(q),
                        render::float(r)
                    ));
                }
            }
            csv_body(
                &["m", "max_error", "ratio", "quadrature_error"],
                rows.into_iter().map(|r| vec![r.m.to_string(), r.error, r.ratio, r.quadrature_error]).collect(),
            )
        }
    };
    Ok(Report { body, problems, notes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m_lists() {
        assert_eq!(parse_m_list("16,32,64").unwrap(), vec![16, 32, 64]);
        assert_eq!(parse_m_list("3..5, 2, 4").unwrap(), vec![2, 3, 4, 5]);
        assert!(parse_m_list("").is_err());
        assert!(parse_m_list(" , ").is_err());
        assert!(parse_m_list("0").is_err());
        assert!(parse_m_list("5..2").is_err());
        assert!(parse_m_list("x").is_err());
    }
}
