use std::path::Path;
use std::process::{Command, Output};

fn dsl2(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsl2"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn dsl2")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report(out: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(out.join(name)).unwrap()).unwrap()
}

#[test]
fn verify_all_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = dsl2(dir.path(), &["verify", "all", "--seed", "42"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(dir.path().join("verify_report.json").exists());
}

#[test]
fn toda_evolve_writes_stack() {
    let dir = tempfile::tempdir().unwrap();
    let o = dsl2(dir.path(), &["toda", "evolve", "--size", "8x8", "--steps", "4", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let stack = std::fs::read_to_string(dir.path().join("stack.csv")).unwrap();
    assert!(stack.lines().count() > 64);
    let r = report(dir.path(), "toda_report.json");
    assert!(r["max_residual"].as_f64().unwrap() < 1e-10);

    let again = tempfile::tempdir().unwrap();
    let stack_path = dir.path().join("stack.csv");
    let o = dsl2(again.path(), &["toda", "residual", stack_path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn generic_connection_fails_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = dsl2(dir.path(), &["conn", "build", "octahedron", "--gl2", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let path = dir.path().join("connection.json");
    let o = dsl2(dir.path(), &["conn", "check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("verdict: not SL2"), "{text}");
    assert!(text.contains("vertex 0"), "{text}");
    assert!(dir.path().join("sl2_report.json").exists());
}

#[test]
fn edge_weight_connection_passes_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = dsl2(dir.path(), &["conn", "build", "icosahedron", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let path = dir.path().join("connection.json");
    for sub in ["check", "reconstruct", "curvature"] {
        let o = dsl2(dir.path(), &["conn", sub, path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{sub}: {}{}", stdout(&o), stderr(&o));
    }
}

#[test]
fn bad_size_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = dsl2(dir.path(), &["toda", "evolve", "--size", "8by8"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--size"), "{}", stderr(&o));
}

#[test]
fn missing_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = dsl2(dir.path(), &["conn", "check", "/nonexistent/connection.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn smoke_commands() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["mesh", "gen", "torus:4x4"][..],
        &["mesh", "gen", "double-torus"],
        &["op", "factorize", "--size", "6x6"],
        &["net", "stardelta"],
        &["net", "factorize"],
        &["net", "laplace"],
        &["tree", "factorize", "--steps", "3"],
        &["tree", "laplace", "--steps", "3"],
    ] {
        let o = dsl2(dir.path(), args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}{}", stdout(&o), stderr(&o));
    }
    let c = report(dir.path(), "complex.json");
    assert!(c.is_object());
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["net", "laplace", "--seed", "11"];
    let oa = dsl2(a.path(), &args);
    let ob = dsl2(b.path(), &args);
    assert_eq!(oa.status.code(), ob.status.code());
    assert_eq!(oa.stdout, ob.stdout);
    for name in ["network.json", "network_laplace.json"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}
