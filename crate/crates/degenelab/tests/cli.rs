use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn degenelab(args: &[&str], config: Option<&str>, dir: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_degenelab"));
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(json) = config {
        let path = dir.join("config.json");
        fs::write(&path, json).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn certificate_rows(dir: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(dir.join("out/certificates.csv")).unwrap();
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["name", "k", "lhs", "rhs", "slack", "passed"]
    );
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn zero_solve_exits_cleanly_with_zero_solution() {
    let dir = tempfile::tempdir().unwrap();
    let out = degenelab(&["solve", "--n-elems", "16"], Some(r#"{"datum":"zero"}"#), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("out/solution.csv")).unwrap();
    let values: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 17);
    assert!(values.iter().all(|&v| v == 0.0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("PASS max_principle"));
}

#[test]
fn contraction_emits_twenty_rows_and_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["contraction", "--seed", "42", "--n-elems", "64"];
    let oa = degenelab(&args, None, a.path());
    let ob = degenelab(&args, None, b.path());
    assert_eq!(oa.status.code(), Some(0), "{}", String::from_utf8_lossy(&oa.stderr));
    assert_eq!(ob.status.code(), Some(0));
    let rows = certificate_rows(a.path());
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r[5] == "true"));
    assert_eq!(String::from_utf8(oa.stdout).unwrap().lines().count(), 20);
    let bytes = |d: &Path| fs::read(d.join("out/certificates.csv")).unwrap();
    assert_eq!(bytes(a.path()), bytes(b.path()));
    let other = tempfile::tempdir().unwrap();
    degenelab(&["contraction", "--seed", "7", "--n-elems", "64"], None, other.path());
    assert_ne!(bytes(a.path()), bytes(other.path()));
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"gamma":2,"N":3,"sigma":1.5}"#, "mms", "sigma"),
        (r#"{"gamma":0.5}"#, "dirac", "gamma-not-supercritical"),
        ("{\n\"gamma\": 2,\n\"nope\": 1}", "solve", "line 3"),
    ];
    for (json, command, needle) in cases {
        let out = degenelab(&[command], Some(json), dir.path());
        assert_eq!(out.status.code(), Some(1), "{json}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.contains(needle), "{err}");
    }
    let out = degenelab(&["solve", "--gamma", "-1"], None, dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn flags_override_the_document() {
    let dir = tempfile::tempdir().unwrap();
    let out = degenelab(
        &["solve", "--n-elems", "8", "--format", "json"],
        Some(r#"{"elements":1000,"datum":"constant","datum_params":[1],"format":"csv"}"#),
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/solution.json")).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 9);
    assert!(v[0]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn exit_code_agrees_with_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let out = degenelab(
        &["mms", "--n-elems", "128"],
        Some(r#"{"gamma":2,"N":5,"sigma":1.5}"#),
        dir.path(),
    );
    let rows = certificate_rows(dir.path());
    let all = rows.iter().all(|r| r[5] == "true");
    assert_eq!(out.status.code(), Some(if all { 0 } else { 2 }));
    let table = fs::read_to_string(dir.path().join("out/mms_convergence.csv")).unwrap();
    assert_eq!(table.lines().count(), 5);
    assert!(table.starts_with("elements,h_max,iters,residual,l2_error,w11_error,l2_order,w11_order\n"));
}

#[test]
fn dirac_writes_both_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = degenelab(
        &["dirac", "--n-elems", "64"],
        Some(r#"{"n_list":[4,8,16]}"#),
        dir.path(),
    );
    assert!(matches!(out.status.code(), Some(0 | 2)));
    for name in ["dirac", "dirac_contrast"] {
        let text = fs::read_to_string(dir.path().join(format!("out/{name}.csv"))).unwrap();
        assert!(text.starts_with("n,sup_tail,pairing_phi1,pairing_phi2,energy,flux_phi1,flux_phi2\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
