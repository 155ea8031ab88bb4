use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bergcheck"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn spec_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name)
}

fn write_spec(dir: &tempfile::TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("input.spec");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn identity_sweep_default_ranges() {
    let out = run(&["verify-identities"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = stdout_json(&out);
    assert!(doc["total_cases"].as_u64().unwrap() >= 10_000);
    assert_eq!(doc["passed"], true);
}

#[test]
fn identity_sweep_smaller_order() {
    let small = stdout_json(&run(&["verify-identities", "--max-order", "2"]));
    let full = stdout_json(&run(&["verify-identities", "--max-order", "4"]));
    assert_eq!(small["passed"], true);
    assert!(small["total_cases"].as_u64() < full["total_cases"].as_u64());
}

#[test]
fn injected_fault_prints_counterexample() {
    let out = run(&["verify-identities", "--max-order", "2", "--inject-fault"]);
    assert_eq!(code(&out), 1);
    let err = stderr(&out);
    assert!(err.contains("FAIL") && err.contains("L=("), "{err}");
}

#[test]
fn flat_potential_has_only_the_euclidean_rows() {
    let out = run(&["bergman-expand", spec_path("flat.spec").to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows, vec!["s,t,mu_exponent,monomial,value,verdict,stability", "(1),(1),0,1,1/1,PASS,stable"]);
}

#[test]
fn curvature_spec_passes_every_key() {
    let out = run(&["bergman-expand", spec_path("curvature.spec").to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = stdout_json(&out);
    assert_eq!(doc["passed"], true);
    let verdicts = doc["verdicts"].as_array().unwrap();
    assert_eq!(verdicts.len(), 28);
    assert!(verdicts.iter().all(|v| v["pass"] == true));
    assert!(doc["unstable"].as_array().unwrap().is_empty());
}

#[test]
fn cross_check_agrees() {
    let out = run(&["bergman-expand", spec_path("two_variables.spec").to_str().unwrap(), "--dz", "4", "--cross-check"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = stdout_json(&out);
    assert_eq!(doc["dz"], 4);
    assert_eq!(doc["cross_check"]["equal"], true);
    assert!(doc["cross_check"]["keys"].as_u64().unwrap() > 0);
}

#[test]
fn output_is_deterministic_and_written_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_path("conjugate_pair.spec");
    let first = dir.path().join("a.json");
    let second = dir.path().join("b.json");
    for target in [&first, &second] {
        let out = run(&["bergman-expand", spec.to_str().unwrap(), "--dz", "4", "--out", target.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert!(out.stdout.is_empty());
    }
    let a = std::fs::read(&first).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, std::fs::read(&second).unwrap());
}

#[test]
fn rationals_render_as_fractions() {
    let out = run(&["bergman-expand", spec_path("curvature.spec").to_str().unwrap(), "--dz", "4"]);
    let doc = stdout_json(&out);
    for c in doc["coefficients"].as_array().unwrap() {
        for term in c["terms"].as_array().unwrap() {
            for mono in term["coefficient"].as_array().unwrap() {
                let v = mono["value"].as_str().unwrap();
                let (p, q) = v.split_once('/').unwrap();
                assert!(p.parse::<i64>().is_ok() && q.parse::<u64>().is_ok(), "{v}");
            }
        }
    }
}

#[test]
fn parse_errors_report_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(&dir, "n: 1\ndz: 4\ndc: 2\nterm: [2] [2 a\n");
    let out = run(&["bergman-expand", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(&dir, "n: 1\ndz: 4\ndc: 2\nscale: 3\n");
    let out = run(&["bergman-expand", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unknown key `scale`"), "{}", stderr(&out));
}

#[test]
fn invalid_potential_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(&dir, "n: 1\ndz: 4\ndc: 2\nterm: [2] [1] a\n");
    let out = run(&["bergman-expand", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn bochner_fubini_study_is_already_normal() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(&dir, "n: 1\ndz: 6\nterm: [2] [2] -1/2\nterm: [3] [3] 1/3\n");
    let out = run(&["bochner", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = stdout_json(&out);
    assert_eq!(doc["identity_change"], true);
    assert!(doc["gauge_violations"].as_array().unwrap().is_empty());
}

fn term_lines(series: &Value) -> String {
    let mut out = String::new();
    for entry in series.as_array().unwrap() {
        let (s, t) = (&entry["s"], &entry["t"]);
        if s == t && s.as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).sum::<u64>() == 1 {
            continue;
        }
        out.push_str(&format!("term: {s} {t} {}\n", entry["value"].as_str().unwrap()));
    }
    out
}

#[test]
fn bochner_cubic_term_needs_a_quadratic_change() {
    let out = run(&["bochner", spec_path("cubic_jet.spec").to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = stdout_json(&out);
    assert_eq!(doc["identity_change"], false);
    assert!(doc["gauge_violations"].as_array().unwrap().is_empty());
    let change = doc["coordinate_change"][0].as_array().unwrap();
    assert!(change.iter().any(|e| e["s"] == serde_json::json!([2]) && e["value"] == "-1/1"));

    // The normal form is a fixed point.
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(&dir, &format!("n: 1\ndz: 4\n{}", term_lines(&doc["normalized_potential"])));
    let again = stdout_json(&run(&["bochner", path.to_str().unwrap()]));
    assert_eq!(again["identity_change"], true);
    assert_eq!(again["normalized_potential"], doc["normalized_potential"]);
}

#[test]
fn bochner_rejects_non_real_jets() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(&dir, "n: 1\ndz: 4\nterm: [2] [1] 1\n");
    let out = run(&["bochner", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("not real"), "{}", stderr(&out));
}

#[test]
fn bochner_rejects_degenerate_metric() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(&dir, "n: 1\ndz: 4\nterm: [1] [1] -1\n");
    let out = run(&["bochner", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn cp1_fubini_study_errors_vanish() {
    let out = run(&["cp1", spec_path("fubini_study.spec").to_str().unwrap(), "--m-list", "1..20"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,max_error,ratio,quadrature_error"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r.split(',').nth(1) == Some("0/1")), "{text}");
}

#[test]
fn cp1_perturbed_errors_halve() {
    let out = run(&["cp1", spec_path("perturbed.spec").to_str().unwrap(), "--m-list", "16,32,64", "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = stdout_json(&out);
    let rows = doc["rows"].as_array().unwrap();
    let errors: Vec<f64> = rows.iter().map(|r| r["max_error"].as_str().unwrap().parse().unwrap()).collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    for r in &rows[1..] {
        let ratio: f64 = r["ratio"].as_str().unwrap().parse().unwrap();
        assert!((0.3..=0.8).contains(&ratio), "{ratio}");
    }
}

#[test]
fn cp1_cross_check_at_large_m() {
    let out =
        run(&["cp1", spec_path("perturbed.spec").to_str().unwrap(), "--m-list", "64,128", "--format", "json", "--cross-check"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout_json(&out)["cross_check"]["passed"], true);
}

#[test]
fn cp1_empty_m_list_is_a_usage_error() {
    let out = run(&["cp1", spec_path("perturbed.spec").to_str().unwrap(), "--m-list", ""]);
    assert_eq!(code(&out), 2);
    let out = run(&["cp1", spec_path("perturbed.spec").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn cp1_needs_a_model() {
    let out = run(&["cp1", spec_path("curvature.spec").to_str().unwrap(), "--m-list", "4"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("model"), "{}", stderr(&out));
}
