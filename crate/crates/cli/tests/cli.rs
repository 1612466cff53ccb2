use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hyperideal"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hyperideal-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn solve_to(problem: &str, out: &Path) {
    let o = run(&["solve", data(problem).to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn check_exit_codes() {
    assert_eq!(code(&run(&["check", data("torus.json").to_str().unwrap()])), 0);
    assert_eq!(code(&run(&["check", data("triangle_feasible.json").to_str().unwrap()])), 0);
    let bad = run(&["check", data("triangle_infeasible.json").to_str().unwrap()]);
    assert_eq!(code(&bad), 2);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("certificate"));
}

#[test]
fn usage_errors() {
    assert_eq!(code(&run(&["--bogus"])), 3);
    assert_eq!(code(&run(&["check", "/nonexistent/problem.json"])), 3);
    assert_eq!(code(&run(&["volume", "--ideal", "pi/3", "oops", "pi/3"])), 3);
    assert_eq!(code(&run(&["--help"])), 0);
    let t = data("torus.json");
    assert_eq!(code(&run(&["solve", t.to_str().unwrap(), "--tol", "0.1"])), 5);
}

#[test]
fn malformed_problem_is_a_parse_error() {
    let p = tmp("malformed.json");
    std::fs::write(&p, "{\"triangles\": 1").unwrap();
    assert_eq!(code(&run(&["check", p.to_str().unwrap()])), 3);
}

#[test]
fn iteration_limit_exits_four() {
    let o = run(&["solve", data("hexagon.json").to_str().unwrap(), "--max-iters", "1"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn torus_solution_has_quarter_pi_alphas() {
    let out = tmp("torus.json");
    solve_to("torus.json", &out);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    for tri in v["angles"].as_array().unwrap() {
        for a in tri["alpha"].as_array().unwrap() {
            assert!((a.as_f64().unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-9);
        }
    }
    assert_eq!(v["report"]["status"], "converged");
    assert_eq!(code(&run(&["check", out.to_str().unwrap()])), 0);
}

#[test]
fn repeated_solves_are_byte_identical() {
    let (a, b) = (tmp("hex-a.json"), tmp("hex-b.json"));
    solve_to("hexagon.json", &a);
    solve_to("hexagon.json", &b);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn volume_of_regular_ideal_tetrahedron() {
    let o = run(&["volume", "--ideal", "pi/3", "pi/3", "pi/3"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("1.01494160640"), "{}", stdout(&o));
    let p4 = run(&["volume", "--p4", "0.2", "0.3", "pi/3"]);
    assert_eq!(code(&p4), 0);
    assert_eq!(code(&run(&["volume", "--p1", "-0.5"])), 5);
}

#[test]
fn layout_outputs() {
    let sol = tmp("disk.json");
    solve_to("hexagon.json", &sol);
    let svg = run(&["layout", sol.to_str().unwrap()]);
    assert_eq!(code(&svg), 0);
    let text = stdout(&svg);
    assert!(text.starts_with("<?xml") && text.contains("class=\"layout\""));
    let json = run(&["layout", sol.to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["mode"], "global");
    assert_eq!(v["triangles"].as_array().unwrap().len(), 6);
    assert_eq!(code(&run(&["layout", data("hexagon.json").to_str().unwrap()])), 3);
}

#[test]
fn check_writes_starting_solution() {
    let out = tmp("start.json");
    let o = run(&["check", data("disk_two.json").to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&run(&["check", out.to_str().unwrap()])), 0);
    // No metric yet, so there is nothing to lay out.
    assert_eq!(code(&run(&["layout", out.to_str().unwrap()])), 5);
}

#[test]
fn probe_inverts_solve() {
    let sol = tmp("probe-src.json");
    solve_to("hexagon.json", &sol);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    let geom = serde_json::json!({
        "triangles": v["problem"]["triangles"],
        "gluings": v["problem"]["gluings"],
        "lengths": v["lengths"],
        "radii": v["radii"],
    });
    let g = tmp("geom.json");
    std::fs::write(&g, geom.to_string()).unwrap();
    let o = run(&["probe", g.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let back: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let nums = |v: &serde_json::Value| -> Vec<f64> { v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect() };
    let close = |got: Vec<f64>, want: &[f64]| {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-7, "{g} vs {w}");
        }
    };
    let pi = std::f64::consts::PI;
    close(nums(&back["theta"]["interior"]), &[pi / 2.0; 6]);
    close(nums(&back["theta"]["boundary"]), &[0.75 * pi; 6]);
    let mut xi = vec![2.0 * pi / 3.0; 7];
    xi[0] = 2.0 * pi;
    close(nums(&back["xi"]), &xi);
}

#[test]
fn selftest_passes() {
    let o = run(&["selftest"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 7);
}
