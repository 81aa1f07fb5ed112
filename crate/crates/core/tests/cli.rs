use std::path::Path;
use std::process::{Command, Output};

const BASE: &str = r#"
curves = [
  { type = "ellipse", center = [0.0, 0.0], a = 1.0, b = 2.0 },
  { type = "ellipse", center = [4.0, 5.0], a = 2.0, b = 1.0 },
]
k = 1.0
z0 = [0.1, 0.2]
eps = 0.16666666666666666
N_list = [10, 20, 40]
formulation = "indirect"
experiment = "convergence"
"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_staggered-nystrom")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, extra: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, format!("{BASE}{extra}")).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn convergence_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", "observation_points = [[-4.0, -4.0], [7.0, 7.6]]\n");
    let out = dir.path().join("nested/table.csv");
    let res = run(&["convergence", "--config", &cfg, "--N", "10,20", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "N,error,ecr");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("10,") && lines[1].ends_with(','));
    // scientific notation with at least six significant digits
    let err = lines[2].split(',').nth(1).unwrap();
    let mantissa = err.split('e').next().unwrap();
    assert!(err.contains('e') && mantissa.replace(['.', '-'], "").len() >= 6, "{err}");
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("nested/table.csv.json")).unwrap()).unwrap();
    assert_eq!(side["config"]["N_list"], serde_json::json!([10, 20]));
}

#[test]
fn overrides_reach_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", "observation_points = [[-4.0, -4.0]]\n");
    let out = dir.path().join("c.csv");
    let res = run(&["cond", "--config", &cfg, "--N", "10", "--eps", "-0.25", "--k", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("N,cond_vw,cond_w\n10,"));
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("c.csv.json")).unwrap()).unwrap();
    assert_eq!(side["config"]["eps"], serde_json::json!(-0.25));
    assert_eq!(side["config"]["k"], serde_json::json!(2.0));
    assert_eq!(side["config"]["experiment"], serde_json::json!("cond"));
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.toml");
    assert_eq!(run(&["convergence", "--config", missing.to_str().unwrap()]).status.code(), Some(1));
    let unknown = write_config(dir.path(), "bad.toml", "observation_points = [[-4.0, -4.0]]\ncolour = 3\n");
    assert_eq!(run(&["convergence", "--config", &unknown]).status.code(), Some(1));
    let good = write_config(dir.path(), "good.toml", "observation_points = [[-4.0, -4.0]]\n");
    assert_eq!(run(&["convergence", "--config", &good, "--N", "10,30"]).status.code(), Some(1));
    assert_eq!(run(&["convergence", "--config", &good, "--eps", "0"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-verb"]).status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_with_two() {
    // (1, 0) lies on the first ellipse, at the node t = 0
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "on_curve.toml", "observation_points = [[1.0, 0.0]]\n");
    let res = run(&["convergence", "--config", &cfg, "--N", "10,20"]);
    assert_eq!(res.status.code(), Some(2), "{}", String::from_utf8_lossy(&res.stderr));
}
