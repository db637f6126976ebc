//! End-to-end tests of the binary: verbs, exit codes, JSON mode, and
//! output determinism.

use s2net_core::network::DeviceSpec;
use s2net_core::{fixtures, io};
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_s2net")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_glued(dir: &Path) -> String {
    let c = fixtures::glued_tetrahedra();
    let mut d = DeviceSpec::uniform(7, 1.0);
    d.loop_current[0] = 1.0;
    let path = dir.join("glued.s2c");
    std::fs::write(&path, io::serialize_complex(&c, &d)).unwrap();
    path.to_string_lossy().into_owned()
}

fn write_cube(dir: &Path) -> String {
    let c = fixtures::cube_surface(s2net_core::vec3::Vec3::zero(), 1.0);
    let mut d = DeviceSpec::uniform(12, 2.0);
    d.loop_current[4] = 1.5;
    d.mmf_source[7] = -0.25;
    let path = dir.join("cube.s2c");
    std::fs::write(&path, io::serialize_complex(&c, &d)).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn dual_reports_node_and_edge_counts() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_glued(dir.path());
    let out = run(&["dual", &file]);
    assert!(out.status.success());
    assert!(
        stdout(&out).contains("3 nodes, 7 edges"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn solve_both_methods_cross_check() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_cube(dir.path());
    let out = run(&["solve", &file, "--method", "both"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("diagnostics: pass"));
    let cob = run(&["solve", &file, "--method", "coboundary"]);
    assert!(cob.status.success());
    assert!(stdout(&cob).contains("method: coboundary"));
}

#[test]
fn validate_rejects_crossing_triangles() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.s2c");
    std::fs::write(
        &path,
        "\
vertex 0 0 0 0
vertex 1 2 0 0
vertex 2 0 2 0
vertex 3 0.5 0.2 -1
vertex 4 0.5 1.2 1
vertex 5 0.6 0.2 1
triangle 0 0 1 2
triangle 1 3 4 5
",
    )
    .unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("non-face intersection"));

    let good = write_cube(dir.path());
    let ok = run(&["validate", &good]);
    assert!(ok.status.success());
}

#[test]
fn parse_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.s2c");
    std::fs::write(&path, "vertex 0 0 0 0\ntriangle 0 0 1 2\n").unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");

    let missing = run(&["validate", "/nonexistent/nope.s2c"]);
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn impossible_tolerance_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_cube(dir.path());
    let out = run(&["solve", &file, "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_outputs_parse() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_glued(dir.path());
    for args in [
        vec!["validate", file.as_str(), "--json"],
        vec!["dual", file.as_str(), "--json"],
        vec!["solve", file.as_str(), "--json"],
        vec!["verify", file.as_str(), "--json"],
        vec!["dual-analyze", file.as_str(), "--triangle", "0", "--json"],
    ] {
        let out = run(&args);
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let value: serde_json::Value = serde_json::from_str(stdout(&out).trim())
            .unwrap_or_else(|e| panic!("{args:?} produced invalid JSON ({e}): {}", stdout(&out)));
        assert!(value.is_object());
    }
}

#[test]
fn dual_analyze_routes_agree() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_glued(dir.path());
    let out = run(&["dual-analyze", &file, "--triangle", "0", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    let spread = v["spread"].as_f64().unwrap();
    assert!(spread < 1e-11, "spread {spread}");
    let direct = v["direct"].as_f64().unwrap();
    assert!((direct - 11.0 / 15.0).abs() < 1e-9);
}

#[test]
fn csv_and_dot_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_cube(dir.path());
    let csv1 = dir.path().join("a.csv");
    let csv2 = dir.path().join("b.csv");
    assert!(run(&["solve", &file, "--csv", csv1.to_str().unwrap()])
        .status
        .success());
    assert!(run(&["solve", &file, "--csv", csv2.to_str().unwrap()])
        .status
        .success());
    let a = std::fs::read(&csv1).unwrap();
    let b = std::fs::read(&csv2).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("triangle_id,flux_weber,mmf_adjusted,mmf_raw\n"));
    assert!(text.contains("# method,cycle"));

    let dot1 = dir.path().join("a.dot");
    let dot2 = dir.path().join("b.dot");
    assert!(run(&["dual", &file, "--dot", dot1.to_str().unwrap()])
        .status
        .success());
    assert!(run(&["dual", &file, "--dot", dot2.to_str().unwrap()])
        .status
        .success());
    let da = std::fs::read(&dot1).unwrap();
    assert_eq!(da, std::fs::read(&dot2).unwrap());
    assert!(String::from_utf8(da).unwrap().starts_with("digraph dual {"));
}

#[test]
fn fusion_flag_merges_external_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let c = fixtures::two_disjoint_cubes();
    let d = DeviceSpec::uniform(24, 1.0);
    let path = dir.path().join("pair.s2c");
    std::fs::write(&path, io::serialize_complex(&c, &d)).unwrap();
    let plain = run(&["dual", path.to_str().unwrap()]);
    assert!(stdout(&plain).contains("4 nodes, 24 edges"));
    let fused = run(&["dual", path.to_str().unwrap(), "--fuse-external"]);
    assert!(stdout(&fused).contains("3 nodes, 24 edges"));
}

#[test]
fn bench_emits_size_time_table() {
    let out = run(&["bench", "--sizes", "1,2", "--runs", "1"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "cubes,triangles,seconds_median");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1,12,"));
    assert!(lines[2].starts_with("2,22,"));
}

#[test]
fn verify_passes_on_suite_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_cube(dir.path());
    let out = run(&["verify", &file]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("rank sum: ok"));
    assert!(text.contains("coboundary composition zero: ok"));
}
