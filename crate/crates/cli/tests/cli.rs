use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_csym"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

struct Run {
    code: i32,
    report: Option<Value>,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let out = bin().args(args).output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        report: serde_json::from_slice(&out.stdout).ok(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn check_on_complex_symmetric_matrix() {
    let r = run(&["check", fixture("complex_symmetric_3.json").to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = r.report.unwrap();
    assert_eq!(rep["results"]["c_selfadjoint"], Value::Bool(true));
    assert_eq!(rep["regime"], "operator");
    assert_eq!(rep["command"], "check");
}

#[test]
fn check_on_non_symmetric_matrix_reports_false() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        &dir,
        "ns.json",
        r#"{"dim":2,"conjugation":{"kind":"entrywise"},"operator":{"matrix":[[1,2],[0,1]]}}"#,
    );
    let r = run(&["check", &spec]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = r.report.unwrap();
    assert_eq!(rep["results"]["c_symmetric"], Value::Bool(false));
    assert_eq!(rep["results"]["doubled"]["symmetric"], Value::Bool(false));
}

#[test]
fn enumerate_f_min_recovers_every_hit() {
    let r = run(&["enumerate", fixture("f_min.json").to_str().unwrap(), "--budget", "10000", "--seed", "3"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = r.report.unwrap();
    let summary = rep["results"]["summary"].as_str().unwrap();
    assert!(summary.starts_with("all hits recovered"), "{summary}");
    assert!(rep["results"]["hits"].as_u64().unwrap() > 0);
}

#[test]
fn malformed_param_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let spec = fixture("f_min.json");
    for (name, text) in [
        ("garbage.json", "not json"),
        ("kind.json", r#"{"kind":"rotation","matrix":[[1,0],[0,1]]}"#),
        ("entry.json", r#"{"kind":"conjugation","matrix":[[1,0],[0,"x"]]}"#),
        ("dims.json", r#"{"kind":"conjugation","matrix":[[1,0,0],[0,1,0],[0,0,1]]}"#),
        ("unitary.json", r#"{"kind":"unitary","matrix":[[2,0],[0,1]]}"#),
    ] {
        let p = write(&dir, name, text);
        let r = run(&["extend", spec.to_str().unwrap(), "--param", &p]);
        assert_eq!(r.code, 2, "{name}: {}", r.stderr);
    }
    let r = run(&["extend", spec.to_str().unwrap(), "--param", "/nonexistent/param.json"]);
    assert_eq!(r.code, 2);
}

#[test]
fn canonical_parameter_reproduces_its_extension() {
    let spec = fixture("f_zero.json");
    let r = run(&["extend", spec.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = r.report.unwrap();
    let param = rep["results"]["parameter"].clone();
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "p.json", &param.to_string());
    let again = run(&["extend", spec.to_str().unwrap(), "--param", &p]);
    assert_eq!(again.code, 0, "{}", again.stderr);
    let rep2 = again.report.unwrap();
    assert_eq!(rep2["results"]["extension"]["graph_dim"], rep["results"]["extension"]["graph_dim"]);
    assert_eq!(rep2["results"]["is_c_selfadjoint"], Value::Bool(true));
}

#[test]
fn non_decoupling_parameter_exits_1_with_residual() {
    // On F_min the identity coordinates are a conjugation of N+ whose doubled
    // extension is not block antidiagonal.
    let spec = fixture("f_min.json");
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "id.json", r#"{"kind":"conjugation","matrix":[[1,0],[0,1]]}"#);
    let r = run(&["extend", spec.to_str().unwrap(), "--param", &p]);
    match r.code {
        0 => assert_eq!(r.report.unwrap()["passed"], Value::Bool(true)),
        1 => {
            let rep = r.report.unwrap();
            assert_eq!(rep["passed"], Value::Bool(false));
            let failed: Vec<&Value> = rep["check_list"]
                .as_array()
                .unwrap()
                .iter()
                .filter(|c| c["passed"] == Value::Bool(false))
                .collect();
            assert!(!failed.is_empty());
            assert!(failed.iter().all(|c| c["residual"].as_f64().is_some()));
        }
        other => panic!("exit {other}: {}", r.stderr),
    }
}

#[test]
fn schema_errors_carry_pointer_and_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"conjugation":{"kind":"entrywise"},"operator":{"matrix":[[1]]}}"#, "/"),
        (r#"{"dim":2,"conjugation":{"kind":"odd"},"operator":{"matrix":[[1,0],[0,1]]}}"#, "/conjugation/kind"),
        (
            r#"{"dim":2,"conjugation":{"kind":"matrix","matrix":[[2,0],[0,1]]},"operator":{"matrix":[[1,0],[0,1]]}}"#,
            "/conjugation/matrix",
        ),
        (r#"{"dim":2,"conjugation":{"kind":"flip"},"operator":{"images":[[1,0]]}}"#, "/operator/images"),
        (r#"{"dim":2,"conjugation":{"kind":"flip"},"operator":{"matrix":[[1,0],[0,[1,2,3]]]}}"#, "/operator/matrix/1/1"),
        (
            r#"{"dim":2,"conjugation":{"kind":"flip"},"operator":{"domain_basis":[[1,0],[2,0]],"images":[[0,0],[0,0]]}}"#,
            "/operator/domain_basis",
        ),
    ];
    for (i, (text, pointer)) in cases.iter().enumerate() {
        let p = write(&dir, &format!("s{i}.json"), text);
        let r = run(&["check", &p]);
        assert_eq!(r.code, 2, "case {i}: {}", r.stderr);
        assert!(r.stderr.contains(pointer), "case {i}: {}", r.stderr);
    }
    let r = run(&["check", "/nonexistent/spec.json"]);
    assert_eq!(r.code, 2);
    let r = run(&["frobnicate"]);
    assert_eq!(r.code, 2);
}

#[test]
fn preconditions_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let ns = write(
        &dir,
        "ns.json",
        r#"{"dim":2,"conjugation":{"kind":"entrywise"},"operator":{"matrix":[[1,2],[0,1]]}}"#,
    );
    assert_eq!(run(&["deficiency", &ns]).code, 2);
    assert_eq!(run(&["takagi", &ns]).code, 2);
    assert_eq!(run(&["polar", fixture("f_min.json").to_str().unwrap()]).code, 2);
}

#[test]
fn matrix_commands_pass_on_symmetric_matrix() {
    let spec = fixture("complex_symmetric_3.json");
    for cmd in ["polar", "takagi", "powers", "deficiency", "extend"] {
        let r = run(&[cmd, spec.to_str().unwrap(), "--max-power", "4"]);
        assert_eq!(r.code, 0, "{cmd}: {}", r.stderr);
    }
    let r = run(&["polar", fixture("random_csym_6.json").to_str().unwrap()]);
    assert_eq!(r.report.unwrap()["results"]["cjt"]["status"], "factorized");
}

#[test]
fn polar_refuses_cjt_for_non_selfadjoint_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let ns = write(
        &dir,
        "ns.json",
        r#"{"dim":2,"conjugation":{"kind":"entrywise"},"operator":{"matrix":[[1,2],[0,1]]}}"#,
    );
    let r = run(&["polar", &ns]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.report.unwrap()["results"]["cjt"]["status"], "refused");
}

#[test]
fn identical_inputs_give_identical_payloads() {
    let spec = fixture("f_zero.json");
    let a = run(&["verify-all", spec.to_str().unwrap(), "--seed", "11"]);
    let b = run(&["verify-all", spec.to_str().unwrap(), "--seed", "11"]);
    let strip = |v: Value| {
        let mut v = v;
        v.as_object_mut().unwrap().remove("timestamp");
        v.to_string()
    };
    assert_eq!(strip(a.report.unwrap()), strip(b.report.unwrap()));
}

#[test]
fn json_flag_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let r = run(&["deficiency", fixture("f_zero.json").to_str().unwrap(), "--json", out.to_str().unwrap()]);
    assert_eq!(r.code, 0);
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rep["results"]["n_plus"], 4);
    assert_eq!(rep["results"]["n_minus"], 4);
    assert_eq!(rep["inputs_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn example_builder() {
    let r = run(&["example", "race_schrodinger", "--n", "16", "--h", "0.25"]);
    assert_eq!(r.code, 0);
    let spec = r.report.unwrap();
    assert_eq!(spec["dim"], 16);
    assert!(spec["label"].as_str().unwrap().contains("discretized model"));
    assert_eq!(run(&["example", "race_schrodinger", "--n", "3"]).code, 2);
    assert_eq!(run(&["example", "unknown"]).code, 2);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rc.json");
    let r = run(&["example", "random_csym", "--n", "6", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(r.code, 0);
    let c = run(&["check", out.to_str().unwrap()]);
    assert_eq!(c.code, 0);
    assert_eq!(c.report.unwrap()["results"]["c_symmetric"], Value::Bool(true));
}

#[test]
fn non_orthonormal_domain_basis_warns() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        &dir,
        "w.json",
        r#"{"dim":3,"conjugation":{"kind":"entrywise"},"operator":{"domain_basis":[[1,1,0]],"images":[[0,0,0]]}}"#,
    );
    let r = run(&["check", &spec]);
    assert_eq!(r.code, 0);
    assert!(r.stderr.contains("orthonormalized"), "{}", r.stderr);
    assert_eq!(r.report.unwrap()["warnings"].as_array().unwrap().len(), 1);
}
