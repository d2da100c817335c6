use std::path::Path;
use std::process::{Command, Output};

fn mtbvp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtbvp")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const LB: &str = "s = 1\nn = 1\na_over_pi = \"1\"\nphi = [\"sin(x) + 0.3*sin(2*x)\"]\n[run]\nk = 10\ngrid = [21, 21]\n";

#[test]
fn solve_writes_four_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), LB);
    let out = dir.path().join("out");
    let o = mtbvp(&["solve", &cfg, "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["solution.csv", "metadata.json", "denominator.json", "residual.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(out.join("solution.csv")).unwrap();
    assert!(csv.starts_with("x,y,u\n"));
    assert_eq!(csv.lines().count(), 1 + 21 * 21);
    let residual: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("residual.json")).unwrap()).unwrap();
    assert_eq!(residual["pass"], true);
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), LB);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(mtbvp(&["solve", &cfg, "-o", a.to_str().unwrap()]).status.success());
    assert!(mtbvp(&["solve", &cfg, "-o", b.to_str().unwrap()]).status.success());
    for f in ["solution.csv", "metadata.json", "denominator.json", "residual.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn non_integer_b_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s = 3\nn = 2\na_over_pi = \"1\"\n");
    let o = mtbvp(&["solve", &cfg, "-o", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "validation");
    assert!(err["message"].as_str().unwrap().contains("b = s/n not integer"));
    assert_eq!(err["violations"][0]["id"], "b_integer");
}

#[test]
fn unseparated_case_is_flagged_in_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s = 1\nn = 1\na_over_pi = \"1/4\"\nphi = [\"sin(x)\"]\n[run]\nk = 8\n");
    let out = dir.path().join("out");
    let o = mtbvp(&["solve", &cfg, "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["verdict"], "not-guaranteed");
    assert_eq!(meta["phase"], "pi/4");
    assert!(String::from_utf8_lossy(&o.stdout).contains("WARNING"));
}

#[test]
fn singular_mode_with_data_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s = 1\nn = 1\na_over_pi = \"1/4\"\nphi = [\"sin(3*x)\"]\n[run]\nk = 4\nsingular_tol = 0.02\n");
    let o = mtbvp(&["solve", &cfg, "-o", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "singular_mode_with_data");
}

#[test]
fn denominator_integer_ratio() {
    let o = mtbvp(&["denominator", "--2n", "4", "--gamma", "1", "--q", "1", "--a-ratio", "1/1"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("phase pi/2"));
    assert!(text.contains("separated-with-delta1"));
    assert!(text.contains("delta1 1.000000000000"));
}

#[test]
fn denominator_scan_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    let o = mtbvp(&["denominator", "--2n", "2", "--gamma", "1", "--q", "0", "--tau", "sqrt2", "--kmax", "10000", "-o", path.to_str().unwrap()]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(report["scan_min_w"].as_f64().unwrap() > 0.0);
    assert_eq!(report["scan"].as_array().unwrap().len(), 10_000);
    assert_eq!(report["verdict"], "diophantine-bounded");
}

#[test]
fn denominator_odd_order_table() {
    let o = mtbvp(&["denominator", "--2n", "6", "--gamma", "2", "--q", "0", "--a-ratio", "1"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("phase pi/4"));
}

#[test]
fn untabulated_case_exit_code() {
    let o = mtbvp(&["denominator", "--2n", "3", "--gamma", "1", "--q", "0", "--a-ratio", "1"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn eigs_constant_potential() {
    let o = mtbvp(&["eigs", "--s", "1", "--p0", "2", "--k", "5"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    let rows: Vec<f64> = text
        .lines()
        .skip(1)
        .take(5)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    for (i, v) in rows.iter().enumerate() {
        let k = (i + 1) as f64;
        assert!((v - k * k - 2.0).abs() < 1e-9);
    }
    let o = mtbvp(&["eigs", "--s", "2", "--k", "4"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("4,2.56000000000000000e2"));
}

#[test]
fn verify_exit_code_follows_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), LB);
    let o = mtbvp(&["verify", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["oracle"]["max_deviation"].as_f64().unwrap() < 1e-9);
    let strict = write_config(dir.path(), &format!("{LB}[thresholds]\nfd = 1e-12\n"));
    assert_eq!(mtbvp(&["verify", &strict]).status.code(), Some(1));
}

#[test]
fn bad_config_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s = 1\nn = 1\na_over_pi = \"1\"\nphi = [\"sin(\"]\n");
    assert_eq!(mtbvp(&["solve", &cfg]).status.code(), Some(2));
}
