use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mpf(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpf"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_order_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let run = mpf(dir.path(), &["verify-order"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = fs::read_to_string(dir.path().join("order.csv")).unwrap();
    assert!(csv.starts_with("tau,trotter_error,mpf_error"));
    assert_eq!(csv.lines().count(), 13);
    let report = json(&dir.path().join("order.json"));
    assert_eq!(report["passed"], true);
    let fits = report["fits"].as_array().unwrap();
    assert_eq!(fits.len(), 2);
    assert!(fits.iter().all(|f| f["verdict"] == "pass"));
    assert!(dir.path().join("config.json").exists());
}

#[test]
fn config_echo_reproduces_run() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let run = mpf(first.path(), &["verify-order", "--p", "4", "--J", "1", "--tau-grid", "0.02:0.2:5"]);
    assert_eq!(run.status.code(), Some(0));
    let echo = first.path().join("config.json");
    let again = mpf(second.path(), &["verify-order", "--config", echo.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0));
    for name in ["order.csv", "order.json"] {
        assert_eq!(
            fs::read_to_string(first.path().join(name)).unwrap(),
            fs::read_to_string(second.path().join(name)).unwrap(),
            "{name} differs"
        );
    }
}

#[test]
fn malformed_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "order = 2\n").unwrap();
    let run = mpf(dir.path(), &["verify-order", "--config", cfg.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("invalid config"));
}

#[test]
fn unsupported_order_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(mpf(dir.path(), &["verify-order", "--p", "3"]).status.code(), Some(2));
}

#[test]
fn missing_hamiltonian_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("none.json");
    let run = mpf(dir.path(), &["phi", "--hamiltonian", missing.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn orders_beyond_qmax_are_untestable() {
    let dir = tempfile::tempdir().unwrap();
    let run = mpf(dir.path(), &["verify-bounds", "--qmax", "3", "--eps", "0.05"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
    assert!(csv.lines().any(|l| l.ends_with("untestable")));
    assert!(!csv.lines().any(|l| l.ends_with(",fail")));
}

#[test]
fn commuting_family_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("zz.toml");
    fs::write(&cfg, "[hamiltonian]\nkind = \"long-range\"\nn = 4\nexponent = 2.0\n").unwrap();
    let run = mpf(dir.path(), &["verify-order", "--config", cfg.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let report = json(&dir.path().join("order.json"));
    assert!(report["fits"].as_array().unwrap().iter().all(|f| f["verdict"] == "exact"));
}

#[test]
fn formula_tables_run() {
    let dir = tempfile::tempdir().unwrap();
    let run = mpf(dir.path(), &["table1", "--N", "100", "--g", "3", "--eps", "1e-6"]);
    assert_eq!(run.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    assert!(csv.lines().count() >= 3);

    let run = mpf(dir.path(), &["bounds", "report", "--N", "100"]);
    assert_eq!(run.status.code(), Some(0));
    assert!(json(&dir.path().join("bound_report.json")).is_object());
}

#[test]
fn phi_and_alpha_reports() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["phi", "alpha"] {
        let run = mpf(dir.path(), &[cmd, "--qmax", "4"]);
        assert_eq!(run.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&run.stderr));
    }
    assert!(dir.path().join("phi.csv").exists());
    assert!(dir.path().join("alpha.csv").exists());
}
